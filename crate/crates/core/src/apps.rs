//! Applications of the averaging consensus: a repeated voting game scored by
//! camp size, and word-of-mouth competition between two products with
//! Gaussian convincingness.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::consensus::{run_consensus, Choice, ConsensusRun, CounterVector, Opinion, StopRule};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Payoff of each agent: the number of agents, itself included, whose current
/// choice equals its own. An undecided agent agrees with nobody but itself.
pub fn voting_payoffs(choices: &[Choice]) -> Vec<usize> {
    let (camp1, camp2) = camp_sizes(choices);
    choices
        .iter()
        .map(|c| match c {
            Choice::G1 => camp1,
            Choice::G2 => camp2,
            Choice::Undecided => 1,
        })
        .collect()
}

fn camp_sizes(choices: &[Choice]) -> (usize, usize) {
    let camp1 = choices.iter().filter(|&&c| c == Choice::G1).count();
    let camp2 = choices.iter().filter(|&&c| c == Choice::G2).count();
    (camp1, camp2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VotingRow {
    pub round: u64,
    pub camp1: usize,
    pub camp2: usize,
    pub undecided: usize,
    pub total_payoff: usize,
}

impl VotingRow {
    fn from_counters(round: u64, cv: &CounterVector) -> Self {
        let (camp1, camp2, undecided) = (
            cv.positive_count(),
            cv.negative_count(),
            cv.undecided_count(),
        );
        Self {
            round,
            camp1,
            camp2,
            undecided,
            total_payoff: camp1 * camp1 + camp2 * camp2 + undecided,
        }
    }
}

/// Observer-side record of a voting game. An agent's payoff in a round is
/// the size of its camp in that row (1 if undecided); agents never see it.
#[derive(Debug, Clone, PartialEq)]
pub struct VotingOutcome {
    pub history: Vec<VotingRow>,
    pub final_choices: Vec<Choice>,
    pub final_payoffs: Vec<usize>,
}

pub fn simulate_voting_game<R: Rng + ?Sized>(
    g: &Graph,
    preferences: &[Opinion],
    rounds: u64,
    rng: &mut R,
) -> Result<VotingOutcome> {
    if preferences.len() != g.node_count() {
        return Err(Error::InvalidInput(format!(
            "{} preferences for {} agents",
            preferences.len(),
            g.node_count()
        )));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut cv = CounterVector::binary(preferences);
    let mut history = Vec::with_capacity(rounds as usize + 1);
    history.push(VotingRow::from_counters(0, &cv));
    for r in 1..=rounds {
        cv.gossip_round(g, rng)?;
        history.push(VotingRow::from_counters(r, &cv));
    }
    let final_choices = cv.decision();
    let final_payoffs = voting_payoffs(&final_choices);
    Ok(VotingOutcome {
        history,
        final_choices,
        final_payoffs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Weighting {
    #[default]
    None,
    /// Scale each draw by `1 + b_i`, `b_i` the max-normalised betweenness.
    Betweenness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WomConfig {
    pub mu: f64,
    pub sigma: f64,
    pub weighting: Weighting,
}

/// Initial counters `X_i ~ N(mu, sigma^2)`, optionally centrality weighted.
pub fn wom_init<R: Rng + ?Sized>(
    g: &Graph,
    config: &WomConfig,
    rng: &mut R,
) -> Result<CounterVector> {
    if !(config.sigma >= 0.0 && config.sigma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "sigma must be finite and >= 0, got {}",
            config.sigma
        )));
    }
    let normal = Normal::new(config.mu, config.sigma)
        .map_err(|e| Error::InvalidInput(format!("sigma = {}: {e}", config.sigma)))?;
    let mut draws: Vec<f64> = (0..g.node_count()).map(|_| normal.sample(rng)).collect();
    if config.weighting == Weighting::Betweenness {
        let b = g.betweenness_centrality();
        draws
            .iter_mut()
            .zip(&b.normalized)
            .for_each(|(x, b)| *x *= 1.0 + b);
    }
    Ok(CounterVector::from_values(draws))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: usize,
}

pub const HISTOGRAM_BINS: usize = 50;

/// Uniform bins spanning `[min, max]` of `values`; the last bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            bin_left: lo + k as f64 * width,
            bin_right: if k + 1 == bins {
                hi
            } else {
                lo + (k + 1) as f64 * width
            },
            count,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WomOutcome {
    pub initial: CounterVector,
    pub initial_mean: f64,
    pub run: ConsensusRun,
    /// Mean of the final counters; every counter converges to it.
    pub consensus_value: f64,
    pub histogram: Vec<HistogramBin>,
}

impl WomOutcome {
    pub fn final_counters(&self) -> &CounterVector {
        &self.run.counters
    }
}

/// Draws initial counters on `g` and averages them on the complete graph with
/// the same node set for exactly `rounds` rounds.
pub fn simulate_wom<R: Rng + ?Sized>(
    g: &Graph,
    config: &WomConfig,
    rounds: u64,
    rng: &mut R,
) -> Result<WomOutcome> {
    if rounds == 0 {
        return Err(Error::InvalidInput("rounds must be at least 1".into()));
    }
    let initial = wom_init(g, config, rng)?;
    let complete = Graph::complete(g.node_count())?;
    let run = run_consensus(&complete, initial.clone(), rng, StopRule::Budget(rounds))?;
    let values = run.counters.values();
    let consensus_value = values.iter().sum::<f64>() / values.len() as f64;
    Ok(WomOutcome {
        initial_mean: initial.c_ave(),
        histogram: histogram(values, HISTOGRAM_BINS),
        initial,
        consensus_value,
        run,
    })
}
