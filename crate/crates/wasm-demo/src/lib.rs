//! Browser bindings. Each function returns a JSON string so the page can
//! plot it without any glue beyond `JSON.parse`.

use rumor_consensus::apps::{Weighting, WomConfig};
use rumor_consensus::consensus::default_round_budget;
use rumor_consensus::experiments::{fig1, fig3, fig5, wom_round_budget, Fig1Params};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_js<T: Serialize>(v: &rumor_consensus::Result<T>) -> Result<String, JsError> {
    match v {
        Ok(v) => Ok(serde_json::to_string(v)?),
        Err(e) => Err(JsError::new(&e.to_string())),
    }
}

/// Simulated and closed-form infective fraction against the susceptible
/// fraction: `[{l, s, i_simulated, i_theoretical}, ...]`.
#[wasm_bindgen]
pub fn spread_curve(
    n: usize,
    l: u32,
    seeds: usize,
    trials: usize,
    seed: u64,
) -> Result<String, JsError> {
    to_js(&fig1(&Fig1Params {
        n,
        ls: vec![l],
        n1: seeds,
        n2: seeds,
        trials,
        grid_step: 0.01,
        seed,
    }))
}

/// Holders of each message every `n` rounds until sign consensus.
#[wasm_bindgen]
pub fn consensus_trace(n: usize, n1: usize, seed: u64) -> Result<String, JsError> {
    if n1 > n {
        return Err(JsError::new("n1 exceeds n"));
    }
    to_js(&fig3(n, n1, n - n1, default_round_budget(n), seed).map(|(_, rows)| rows))
}

#[derive(Serialize)]
struct WomView {
    initial_mean: f64,
    consensus_value: f64,
    rounds: u64,
    initial: Vec<rumor_consensus::apps::HistogramBin>,
    final_bins: Vec<rumor_consensus::apps::HistogramBin>,
}

/// Histograms of the initial and final counters of a word-of-mouth run
/// stopped after `fraction` of the usual round budget.
#[wasm_bindgen]
pub fn wom_histogram(
    n: usize,
    mu: f64,
    sigma: f64,
    fraction: f64,
    seed: u64,
) -> Result<String, JsError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(JsError::new("fraction must lie in (0, 1]"));
    }
    let rounds = ((wom_round_budget(n) as f64 * fraction).ceil() as u64).max(1);
    let config = WomConfig {
        mu,
        sigma,
        weighting: Weighting::None,
    };
    to_js(&fig5(n, &config, rounds, seed).map(|o| WomView {
        initial_mean: o.initial_mean,
        consensus_value: o.consensus_value,
        rounds,
        initial: rumor_consensus::apps::histogram(
            o.initial.values(),
            rumor_consensus::apps::HISTOGRAM_BINS,
        ),
        final_bins: o.histogram,
    }))
}
