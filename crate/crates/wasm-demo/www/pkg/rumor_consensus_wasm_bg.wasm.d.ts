/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const consensus_trace: (a: number, b: number, c: bigint) => [number, number, number, number];
export const spread_curve: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
export const wom_histogram: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
