//! Two conflicting rumors spreading with stop-counter removal.
//!
//! Each step picks one node uniformly. An infective node calls a uniform
//! neighbor: a susceptible callee adopts the caller's message and starts
//! spreading it, any other callee (either message, spreading or not) is an
//! unnecessary call. After `l` unnecessary calls the caller is removed. Nodes
//! that are not infective do nothing, but the step still counts.
//!
//! More than two messages reduce to this case by treating every adversary
//! message as [`Message::M2`].

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{run_trials, substream};
use crate::stats::mean_var;

/// Substream id used by [`monte_carlo_spread`].
pub const SPREAD_STREAM: u64 = 0x5350_5245_4144;

/// Largest node count accepted by [`exact_absorption_distribution`].
pub const ORACLE_MAX_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Message {
    M1,
    M2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeStatus {
    M1Infective,
    M2Infective,
    M1Removed,
    M2Removed,
    Susceptible,
}

impl NodeStatus {
    pub fn infective(msg: Message) -> Self {
        match msg {
            Message::M1 => Self::M1Infective,
            Message::M2 => Self::M2Infective,
        }
    }

    pub fn removed(msg: Message) -> Self {
        match msg {
            Message::M1 => Self::M1Removed,
            Message::M2 => Self::M2Removed,
        }
    }

    pub fn message(self) -> Option<Message> {
        match self {
            Self::M1Infective | Self::M1Removed => Some(Message::M1),
            Self::M2Infective | Self::M2Removed => Some(Message::M2),
            Self::Susceptible => None,
        }
    }

    pub fn is_infective(self) -> bool {
        matches!(self, Self::M1Infective | Self::M2Infective)
    }
}

/// Aggregate state `(I1, I2, S, R1, R2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Counts {
    pub i1: usize,
    pub i2: usize,
    pub s: usize,
    pub r1: usize,
    pub r2: usize,
}

impl Counts {
    pub fn new(i1: usize, i2: usize, s: usize, r1: usize, r2: usize) -> Self {
        Self { i1, i2, s, r1, r2 }
    }

    pub fn total(&self) -> usize {
        self.i1 + self.i2 + self.s + self.r1 + self.r2
    }

    pub fn infective(&self) -> usize {
        self.i1 + self.i2
    }

    pub fn informed(&self) -> usize {
        self.total() - self.s
    }

    pub fn tally(status: &[NodeStatus]) -> Self {
        let mut c = Self::default();
        for st in status {
            c.add(*st);
        }
        c
    }

    fn add(&mut self, st: NodeStatus) {
        *self.slot(st) += 1;
    }

    fn sub(&mut self, st: NodeStatus) {
        *self.slot(st) -= 1;
    }

    fn slot(&mut self, st: NodeStatus) -> &mut usize {
        match st {
            NodeStatus::M1Infective => &mut self.i1,
            NodeStatus::M2Infective => &mut self.i2,
            NodeStatus::M1Removed => &mut self.r1,
            NodeStatus::M2Removed => &mut self.r2,
            NodeStatus::Susceptible => &mut self.s,
        }
    }

    pub fn to_real(self) -> ExpectedCounts {
        ExpectedCounts {
            i1: self.i1 as f64,
            i2: self.i2 as f64,
            s: self.s as f64,
            r1: self.r1 as f64,
            r2: self.r2 as f64,
        }
    }
}

/// What a single [`SpreadState::step`] did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    /// No infective nodes remain; nothing changed.
    Absorbed,
    /// The chosen node was not spreading.
    Idle,
    Informed {
        caller: usize,
        callee: usize,
        message: Message,
    },
    UnnecessaryCall {
        caller: usize,
    },
    Removed {
        caller: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadState {
    status: Vec<NodeStatus>,
    calls: Vec<u32>,
    threshold: u32,
    step: u64,
    counts: Counts,
}

impl SpreadState {
    pub fn new(g: &Graph, seeds1: &[usize], seeds2: &[usize], l: u32) -> Result<Self> {
        if l < 1 {
            return Err(Error::InvalidThreshold(l));
        }
        let n = g.node_count();
        let mut status = vec![NodeStatus::Susceptible; n];
        for (seeds, msg) in [(seeds1, Message::M1), (seeds2, Message::M2)] {
            for &v in seeds {
                if v >= n {
                    return Err(Error::SeedOutOfRange(v));
                }
                match status[v].message() {
                    Some(m) if m != msg => return Err(Error::SeedConflict(v)),
                    _ => {}
                }
                if g.degree(v) == 0 {
                    return Err(Error::NoNeighbor(v));
                }
                status[v] = NodeStatus::infective(msg);
            }
        }
        let counts = Counts::tally(&status);
        Ok(Self {
            status,
            calls: vec![0; n],
            threshold: l,
            step: 0,
            counts,
        })
    }

    /// Seeds nodes `0..n1` with m1 and `n1..n1+n2` with m2.
    pub fn with_seed_counts(g: &Graph, n1: usize, n2: usize, l: u32) -> Result<Self> {
        if n1 + n2 > g.node_count() {
            return Err(Error::SeedOutOfRange(n1 + n2 - 1));
        }
        let seeds1: Vec<usize> = (0..n1).collect();
        let seeds2: Vec<usize> = (n1..n1 + n2).collect();
        Self::new(g, &seeds1, &seeds2, l)
    }

    pub fn status(&self) -> &[NodeStatus] {
        &self.status
    }

    pub fn call_counters(&self) -> &[u32] {
        &self.calls
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn counts(&self) -> Counts {
        self.counts
    }

    pub fn node_count(&self) -> usize {
        self.status.len()
    }

    pub fn is_absorbed(&self) -> bool {
        self.counts.infective() == 0
    }

    pub fn step<R: Rng + ?Sized>(&mut self, g: &Graph, rng: &mut R) -> StepEvent {
        if self.is_absorbed() {
            return StepEvent::Absorbed;
        }
        self.step += 1;
        let i = rng.random_range(0..self.status.len());
        let st = self.status[i];
        let Some(msg) = st.message().filter(|_| st.is_infective()) else {
            return StepEvent::Idle;
        };
        // infective nodes always have a neighbor: seeds are checked at
        // construction and every other infective was called by a neighbor
        let j = g
            .sample_neighbor(i, rng)
            .expect("infective node without neighbors");
        if self.status[j] == NodeStatus::Susceptible {
            self.set_status(j, NodeStatus::infective(msg));
            return StepEvent::Informed {
                caller: i,
                callee: j,
                message: msg,
            };
        }
        self.calls[i] += 1;
        if self.calls[i] >= self.threshold {
            self.set_status(i, NodeStatus::removed(msg));
            StepEvent::Removed { caller: i }
        } else {
            StepEvent::UnnecessaryCall { caller: i }
        }
    }

    fn set_status(&mut self, v: usize, st: NodeStatus) {
        self.counts.sub(self.status[v]);
        self.counts.add(st);
        self.status[v] = st;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub step: u64,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadResult {
    pub counts: Counts,
    pub steps: u64,
    /// False when `max_steps` ran out before the last infective retired.
    pub absorbed: bool,
    /// Samples every `n` steps, plus the initial and final state.
    pub trajectory: Option<Vec<TrajectorySample>>,
}

pub fn default_max_steps(n: usize) -> u64 {
    100 * (n as u64) * (n as u64)
}

pub fn run_to_absorption<R: Rng + ?Sized>(
    state: &mut SpreadState,
    g: &Graph,
    rng: &mut R,
    max_steps: u64,
) -> SpreadResult {
    run(state, g, rng, max_steps, false)
}

/// Like [`run_to_absorption`] but keeps a trajectory sampled every `n` steps.
pub fn run_recorded<R: Rng + ?Sized>(
    state: &mut SpreadState,
    g: &Graph,
    rng: &mut R,
    max_steps: u64,
) -> SpreadResult {
    run(state, g, rng, max_steps, true)
}

fn run<R: Rng + ?Sized>(
    state: &mut SpreadState,
    g: &Graph,
    rng: &mut R,
    max_steps: u64,
    record: bool,
) -> SpreadResult {
    let stride = state.node_count() as u64;
    let mut trajectory = record.then(|| {
        vec![TrajectorySample {
            step: state.step,
            counts: state.counts,
        }]
    });
    let start = state.step;
    while !state.is_absorbed() && state.step - start < max_steps {
        state.step(g, rng);
        if let Some(tr) = trajectory.as_mut() {
            if state.step.is_multiple_of(stride) {
                tr.push(TrajectorySample {
                    step: state.step,
                    counts: state.counts,
                });
            }
        }
    }
    if let Some(tr) = trajectory.as_mut() {
        if tr.last().map(|s| s.step) != Some(state.step) {
            tr.push(TrajectorySample {
                step: state.step,
                counts: state.counts,
            });
        }
    }
    SpreadResult {
        counts: state.counts,
        steps: state.step - start,
        absorbed: state.is_absorbed(),
        trajectory,
    }
}

/// Which removal factor the complete-graph kernel uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// `n - 1 - S` informed targets: the caller cannot call itself.
    #[default]
    Exact,
    /// `n - S`, as the recursions are usually printed. Does not normalise.
    Approximate,
}

/// One-step transition probabilities on the complete graph with `l = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionProbs {
    /// Self loop: the chosen node is not infective.
    pub p0: f64,
    pub p1_plus: f64,
    pub p1_minus: f64,
    pub p2_plus: f64,
    pub p2_minus: f64,
}

impl TransitionProbs {
    pub fn sum(&self) -> f64 {
        self.p0 + self.p1_plus + self.p1_minus + self.p2_plus + self.p2_minus
    }
}

pub fn transition_probabilities(counts: Counts, n: usize) -> Result<TransitionProbs> {
    transition_probabilities_with(counts, n, Kernel::Exact)
}

pub fn transition_probabilities_with(
    counts: Counts,
    n: usize,
    kernel: Kernel,
) -> Result<TransitionProbs> {
    if counts.total() != n {
        return Err(Error::InconsistentState {
            sum: counts.total() as u64,
            n: n as u64,
        });
    }
    if n < 2 {
        return Err(Error::InvalidSize(n));
    }
    let nf = n as f64;
    let denom = nf * (nf - 1.0);
    let s = counts.s as f64;
    let informed_targets = match kernel {
        Kernel::Exact => nf - 1.0 - s,
        Kernel::Approximate => nf - s,
    };
    let (i1, i2) = (counts.i1 as f64, counts.i2 as f64);
    Ok(TransitionProbs {
        p0: (counts.s + counts.r1 + counts.r2) as f64 / nf,
        p1_plus: i1 * s / denom,
        p1_minus: i1 * informed_targets / denom,
        p2_plus: i2 * s / denom,
        p2_minus: i2 * informed_targets / denom,
    })
}

/// Real-valued `(I1, I2, S, R1, R2)` used by the expectation recursion.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ExpectedCounts {
    pub i1: f64,
    pub i2: f64,
    pub s: f64,
    pub r1: f64,
    pub r2: f64,
}

impl ExpectedCounts {
    pub fn total(&self) -> f64 {
        self.i1 + self.i2 + self.s + self.r1 + self.r2
    }
}

/// Conditional-expectation update with the printed `N - S` removal factor,
/// removal terms scaled by `1/l`.
pub fn expectation_step(c: ExpectedCounts, n: usize, l: u32) -> ExpectedCounts {
    expectation_step_with(c, n, l, Kernel::Approximate)
}

pub fn expectation_step_with(
    c: ExpectedCounts,
    n: usize,
    l: u32,
    kernel: Kernel,
) -> ExpectedCounts {
    let nf = n as f64;
    let denom = nf * (nf - 1.0);
    let targets = match kernel {
        Kernel::Exact => nf - 1.0 - c.s,
        Kernel::Approximate => nf - c.s,
    };
    let inv_l = 1.0 / l as f64;
    let gain1 = c.i1 * c.s / denom;
    let gain2 = c.i2 * c.s / denom;
    let loss1 = inv_l * c.i1 * targets / denom;
    let loss2 = inv_l * c.i2 * targets / denom;
    ExpectedCounts {
        i1: c.i1 + gain1 - loss1,
        i2: c.i2 + gain2 - loss2,
        s: c.s - gain1 - gain2,
        r1: c.r1 + loss1,
        r2: c.r2 + loss2,
    }
}

/// Final `(S, R1, R2)` once no infective remains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FinalCounts {
    pub s: usize,
    pub r1: usize,
    pub r2: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionDistribution {
    pub n: usize,
    pub outcomes: BTreeMap<FinalCounts, f64>,
}

impl AbsorptionDistribution {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.values().sum()
    }

    pub fn prob_s(&self, s: usize) -> f64 {
        self.outcomes
            .iter()
            .filter(|(k, _)| k.s == s)
            .map(|(_, p)| p)
            .sum()
    }

    /// Mean and variance of `f` over the absorption distribution.
    pub fn moments(&self, f: impl Fn(&FinalCounts) -> f64) -> (f64, f64) {
        let mean: f64 = self.outcomes.iter().map(|(k, p)| p * f(k)).sum();
        let second: f64 = self.outcomes.iter().map(|(k, p)| p * f(k).powi(2)).sum();
        (mean, second - mean * mean)
    }
}

/// Exact absorption law of the complete-graph chain with `l = 1`.
///
/// Self loops do not change where the chain is absorbed, so the jump chain
/// is propagated instead. Every jump lowers `2S + I1 + I2` by exactly one,
/// which gives a topological order over the lattice.
pub fn exact_absorption_distribution(
    n: usize,
    n1: usize,
    n2: usize,
) -> Result<AbsorptionDistribution> {
    if n > ORACLE_MAX_N {
        return Err(Error::OracleScale {
            n,
            max: ORACLE_MAX_N,
        });
    }
    if n < 2 {
        return Err(Error::InvalidSize(n));
    }
    if n1 + n2 > n {
        return Err(Error::InvalidInput(format!(
            "{n1} + {n2} seeds exceed {n} nodes"
        )));
    }
    let start = Counts::new(n1, n2, n - n1 - n2, 0, 0);
    let level = |c: &Counts| 2 * c.s + c.i1 + c.i2;
    let top = level(&start);
    let mut levels: Vec<HashMap<Counts, f64>> = vec![HashMap::new(); top + 1];
    levels[top].insert(start, 1.0);
    let mut outcomes = BTreeMap::new();
    for lv in (0..=top).rev() {
        let mut frontier: Vec<(Counts, f64)> = levels[lv].drain().collect();
        // deterministic accumulation order
        frontier.sort_by_key(|(c, _)| (c.i1, c.i2, c.s, c.r1));
        for (c, p) in frontier {
            if c.infective() == 0 {
                *outcomes
                    .entry(FinalCounts {
                        s: c.s,
                        r1: c.r1,
                        r2: c.r2,
                    })
                    .or_insert(0.0) += p;
                continue;
            }
            let t = transition_probabilities(c, n)?;
            let moving = 1.0 - t.p0;
            let moves = [
                (
                    t.p1_plus,
                    Counts {
                        i1: c.i1 + 1,
                        s: c.s.wrapping_sub(1),
                        ..c
                    },
                ),
                (
                    t.p1_minus,
                    Counts {
                        i1: c.i1.wrapping_sub(1),
                        r1: c.r1 + 1,
                        ..c
                    },
                ),
                (
                    t.p2_plus,
                    Counts {
                        i2: c.i2 + 1,
                        s: c.s.wrapping_sub(1),
                        ..c
                    },
                ),
                (
                    t.p2_minus,
                    Counts {
                        i2: c.i2.wrapping_sub(1),
                        r2: c.r2 + 1,
                        ..c
                    },
                ),
            ];
            for (q, next) in moves {
                if q > 0.0 {
                    *levels[lv - 1].entry(next).or_insert(0.0) += p * q / moving;
                }
            }
        }
    }
    Ok(AbsorptionDistribution { n, outcomes })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadSummary {
    pub trials: usize,
    pub truncated: usize,
    pub mean_s: f64,
    pub var_s: f64,
    pub mean_r1: f64,
    pub var_r1: f64,
    pub mean_r2: f64,
    pub var_r2: f64,
    pub mean_abs_diff: f64,
    pub var_abs_diff: f64,
    #[serde(skip)]
    pub finals: Vec<Counts>,
}

impl SpreadSummary {
    pub fn from_finals(finals: Vec<Counts>, truncated: usize) -> Self {
        let col = |f: &dyn Fn(&Counts) -> f64| finals.iter().map(f).collect::<Vec<_>>();
        let (mean_s, var_s) = mean_var(&col(&|c| c.s as f64));
        let (mean_r1, var_r1) = mean_var(&col(&|c| c.r1 as f64));
        let (mean_r2, var_r2) = mean_var(&col(&|c| c.r2 as f64));
        let (mean_abs_diff, var_abs_diff) = mean_var(&col(&|c| (c.r1 as f64 - c.r2 as f64).abs()));
        Self {
            trials: finals.len(),
            truncated,
            mean_s,
            var_s,
            mean_r1,
            var_r1,
            mean_r2,
            var_r2,
            mean_abs_diff,
            var_abs_diff,
            finals,
        }
    }
}

/// Independent runs from the same seeding; trial `t` draws from substream
/// `(master_seed, SPREAD_STREAM, t)`.
pub fn monte_carlo_spread(
    g: &Graph,
    seeds1: &[usize],
    seeds2: &[usize],
    l: u32,
    trials: usize,
    master_seed: u64,
) -> Result<SpreadSummary> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let init = SpreadState::new(g, seeds1, seeds2, l)?;
    let max_steps = default_max_steps(g.node_count());
    let runs = run_trials(trials, |t| {
        let mut rng = substream(master_seed, SPREAD_STREAM, t as u64);
        let mut st = init.clone();
        run_to_absorption(&mut st, g, &mut rng, max_steps)
    });
    let truncated = runs.iter().filter(|r| !r.absorbed).count();
    Ok(SpreadSummary::from_finals(
        runs.into_iter().map(|r| r.counts).collect(),
        truncated,
    ))
}
