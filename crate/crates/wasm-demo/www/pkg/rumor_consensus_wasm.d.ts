/* tslint:disable */
/* eslint-disable */

/**
 * Holders of each message every `n` rounds until sign consensus.
 */
export function consensus_trace(n: number, n1: number, seed: bigint): string;

/**
 * Simulated and closed-form infective fraction against the susceptible
 * fraction: `[{l, s, i_simulated, i_theoretical}, ...]`.
 */
export function spread_curve(n: number, l: number, seeds: number, trials: number, seed: bigint): string;

/**
 * Histograms of the initial and final counters of a word-of-mouth run
 * stopped after `fraction` of the usual round budget.
 */
export function wom_histogram(n: number, mu: number, sigma: number, fraction: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly consensus_trace: (a: number, b: number, c: bigint) => [number, number, number, number];
    readonly spread_curve: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly wom_histogram: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
