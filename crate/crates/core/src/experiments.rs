//! Figure and headline-number drivers.
//!
//! Every driver takes a master seed and derives one substream per trial via
//! [`crate::rng::substream`], so outputs are identical across runs and across
//! thread counts. Row types serialise directly to the CSV schemas used by the
//! command line tool.

use serde::Serialize;

use crate::apps::{simulate_voting_game, simulate_wom, VotingOutcome, WomConfig, WomOutcome};
use crate::consensus::{
    default_round_budget, expected_matrix, run_consensus, second_eigenvalue, sign_consensus_bounds,
    ConsensusRun, CounterVector, Opinion, SpectralReport, StopRule,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ode::{final_s, i_of_s, integrate_two_message, OdeState};
use crate::rng::{run_trials, substream, substream_seed};
use crate::rumor::{
    default_max_steps, monte_carlo_spread, run_recorded, Counts, SpreadResult, SpreadState,
    SpreadSummary, StepEvent,
};
use crate::stats::{linear_fit, mean_var, median, LinearFit};

pub mod stream {
    pub const FIG1: u64 = 1;
    pub const FIG2: u64 = 2;
    pub const FIG3: u64 = 3;
    pub const FIG4: u64 = 4;
    pub const FIG5: u64 = 5;
    pub const SPREAD: u64 = 6;
    pub const CONSENSUS: u64 = 7;
    pub const VOTING: u64 = 8;
    pub const MEAN_TRAJECTORY: u64 = 9;
    pub const FIG4_MEDIANS: u64 = 10;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadRow {
    pub step: u64,
    pub k_over_n: f64,
    pub i1: f64,
    pub i2: f64,
    pub s: f64,
    pub r1: f64,
    pub r2: f64,
}

impl SpreadRow {
    pub fn new(step: u64, c: Counts, n: usize) -> Self {
        let f = |x: usize| x as f64 / n as f64;
        Self {
            step,
            k_over_n: step as f64 / n as f64,
            i1: f(c.i1),
            i2: f(c.i2),
            s: f(c.s),
            r1: f(c.r1),
            r2: f(c.r2),
        }
    }
}

/// One recorded spreading run (trial 0 of the `spread` stream).
pub fn spread_run(
    g: &Graph,
    n1: usize,
    n2: usize,
    l: u32,
    seed: u64,
) -> Result<(SpreadResult, Vec<SpreadRow>)> {
    let mut st = SpreadState::with_seed_counts(g, n1, n2, l)?;
    let mut rng = substream(seed, stream::SPREAD, 0);
    let res = run_recorded(&mut st, g, &mut rng, default_max_steps(g.node_count()));
    let n = g.node_count();
    let rows = res
        .trajectory
        .as_deref()
        .unwrap_or_default()
        .iter()
        .map(|s| SpreadRow::new(s.step, s.counts, n))
        .collect();
    Ok((res, rows))
}

pub fn spread_summary(
    g: &Graph,
    n1: usize,
    n2: usize,
    l: u32,
    trials: usize,
    seed: u64,
) -> Result<SpreadSummary> {
    let seeds1: Vec<usize> = (0..n1).collect();
    let seeds2: Vec<usize> = (n1..n1 + n2).collect();
    monte_carlo_spread(g, &seeds1, &seeds2, l, trials, seed)
}

/// Mean fractions over `trials` runs at `t = k/n` for `k = 0, n, 2n, ...`.
/// Absorbed runs hold their final state.
pub fn mean_spread_trajectory(
    g: &Graph,
    n1: usize,
    n2: usize,
    l: u32,
    trials: usize,
    seed: u64,
) -> Result<Vec<(f64, OdeState)>> {
    let n = g.node_count();
    let init = SpreadState::with_seed_counts(g, n1, n2, l)?;
    let runs = run_trials(trials, |t| {
        let mut st = init.clone();
        let mut rng = substream(seed, stream::MEAN_TRAJECTORY, t as u64);
        run_recorded(&mut st, g, &mut rng, default_max_steps(n))
    });
    let len = runs
        .iter()
        .map(|r| r.steps.div_ceil(n as u64) as usize + 1)
        .max()
        .unwrap_or(1);
    let mut acc = vec![[0.0f64; 5]; len];
    for r in &runs {
        let tr = r.trajectory.as_ref().expect("recorded run");
        for (m, slot) in acc.iter_mut().enumerate() {
            let k = m as u64 * n as u64;
            let c = tr
                .iter()
                .take_while(|s| s.step <= k)
                .last()
                .map(|s| s.counts)
                .unwrap_or(r.counts);
            for (a, v) in slot.iter_mut().zip([c.i1, c.i2, c.s, c.r1, c.r2]) {
                *a += v as f64 / (n * trials) as f64;
            }
        }
    }
    Ok(acc
        .into_iter()
        .enumerate()
        .map(|(m, a)| (m as f64, OdeState::new(a[0], a[1], a[2], a[3], a[4])))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Params {
    pub n: usize,
    pub ls: Vec<u32>,
    pub n1: usize,
    pub n2: usize,
    pub trials: usize,
    /// Spacing of the susceptible-fraction grid.
    pub grid_step: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig1Row {
    pub l: u32,
    pub s: f64,
    pub i_simulated: f64,
    pub i_theoretical: f64,
}

/// Mean infective fraction at fixed susceptible fractions, against the
/// closed-form curve. A grid point is kept while at least half of the trials
/// reach it.
pub fn fig1(p: &Fig1Params) -> Result<Vec<Fig1Row>> {
    if p.n < 100 {
        return Err(Error::InvalidInput(format!(
            "fig1 needs n >= 100, got {}",
            p.n
        )));
    }
    if p.trials == 0 || p.n1 + p.n2 == 0 || !(p.grid_step > 0.0) {
        return Err(Error::InvalidInput(
            "fig1 needs trials >= 1, seeds and a positive grid step".into(),
        ));
    }
    let g = Graph::complete(p.n)?;
    let s0 = p.n - p.n1 - p.n2;
    let stride = ((p.grid_step * p.n as f64).round() as usize).max(1);
    let targets: Vec<usize> = (0..=s0 / stride).map(|j| s0 - j * stride).collect();
    let mut rows = Vec::new();
    for (li, &l) in p.ls.iter().enumerate() {
        let init = SpreadState::with_seed_counts(&g, p.n1, p.n2, l)?;
        let per_trial: Vec<Vec<usize>> = run_trials(p.trials, |t| {
            let mut rng = substream(p.seed, stream::FIG1 ^ ((li as u64) << 32), t as u64);
            let mut st = init.clone();
            let mut seen = vec![st.counts().infective()];
            let max_steps = default_max_steps(p.n);
            while !st.is_absorbed() && st.step_count() < max_steps && seen.len() < targets.len() {
                if let StepEvent::Informed { .. } = st.step(&g, &mut rng) {
                    if st.counts().s == targets[seen.len()] {
                        seen.push(st.counts().infective());
                    }
                }
            }
            seen
        });
        for (j, &target) in targets.iter().enumerate() {
            let hits: Vec<f64> = per_trial
                .iter()
                .filter_map(|v| v.get(j).map(|&i| i as f64 / p.n as f64))
                .collect();
            if 2 * hits.len() < p.trials {
                break;
            }
            let s = target as f64 / p.n as f64;
            if s <= 0.0 {
                break;
            }
            rows.push(Fig1Row {
                l,
                s,
                i_simulated: hits.iter().sum::<f64>() / hits.len() as f64,
                i_theoretical: i_of_s(s, l)?,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Params {
    pub n: usize,
    pub total_seeds: usize,
    pub diff_step: usize,
    pub l: u32,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig2Row {
    pub initial_difference: usize,
    pub mean_final_difference: f64,
    pub theoretical_line: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Output {
    pub rows: Vec<Fig2Row>,
    /// Standard error of each row's mean.
    pub std_errors: Vec<f64>,
    pub fit: LinearFit,
    /// `(1 - final_s(l)) n / (n1 + n2)`.
    pub predicted_slope: f64,
}

/// Sweeps `n1 - n2` over `0, step, ..., total` with `n1 + n2 = total`.
pub fn fig2(p: &Fig2Params) -> Result<Fig2Output> {
    if p.total_seeds == 0 || p.total_seeds > p.n || p.diff_step == 0 || p.trials == 0 {
        return Err(Error::InvalidInput(
            "fig2 needs 0 < seeds <= n, a positive step and trials".into(),
        ));
    }
    let g = Graph::complete(p.n)?;
    let informed = (1.0 - final_s(p.l)?) * p.n as f64;
    let predicted_slope = informed / p.total_seeds as f64;
    let mut rows = Vec::new();
    let mut std_errors = Vec::new();
    for d in (0..=p.total_seeds).step_by(p.diff_step) {
        if !(p.total_seeds - d).is_multiple_of(2) {
            continue;
        }
        let n2 = (p.total_seeds - d) / 2;
        let n1 = n2 + d;
        let point_seed = substream_seed(p.seed, stream::FIG2, d as u64);
        let summary = spread_summary(&g, n1, n2, p.l, p.trials, point_seed)?;
        let diffs: Vec<f64> = summary
            .finals
            .iter()
            .map(|c| c.r1 as f64 - c.r2 as f64)
            .collect();
        let (mean, var) = mean_var(&diffs);
        rows.push(Fig2Row {
            initial_difference: d,
            mean_final_difference: mean,
            theoretical_line: d as f64 * predicted_slope,
        });
        std_errors.push((var / p.trials as f64).sqrt());
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.initial_difference as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_final_difference).collect();
    Ok(Fig2Output {
        fit: linear_fit(&xs, &ys),
        rows,
        std_errors,
        predicted_slope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig3Row {
    pub k: u64,
    pub holders_g1: usize,
    pub holders_g2: usize,
    pub undecided: usize,
}

pub fn consensus_run(
    g: &Graph,
    n1: usize,
    n2: usize,
    stop: StopRule,
    seed: u64,
    experiment: u64,
    trial: u64,
) -> Result<ConsensusRun> {
    if n1 + n2 != g.node_count() {
        return Err(Error::InvalidInput(format!(
            "n1 + n2 = {} must equal the node count {}",
            n1 + n2,
            g.node_count()
        )));
    }
    let mut rng = substream(seed, experiment, trial);
    run_consensus(g, CounterVector::binary_split(n1, n2), &mut rng, stop)
}

/// Holders of each message every `n` rounds until sign consensus.
pub fn fig3(
    n: usize,
    n1: usize,
    n2: usize,
    max_rounds: u64,
    seed: u64,
) -> Result<(ConsensusRun, Vec<Fig3Row>)> {
    let g = Graph::complete(n)?;
    let run = consensus_run(
        &g,
        n1,
        n2,
        StopRule::SignConsensus { max_rounds },
        seed,
        stream::FIG3,
        0,
    )?;
    let rows = run
        .trace
        .iter()
        .map(|r| Fig3Row {
            k: r.k,
            holders_g1: r.positive_count,
            holders_g2: r.negative_count,
            undecided: n - r.positive_count - r.negative_count,
        })
        .collect();
    Ok((run, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig4Row {
    pub setting: String,
    pub k: u64,
    pub distance: f64,
}

pub fn setting_label(n1: usize, n2: usize) -> String {
    format!("{n1}:{n2}")
}

/// One distance trace per `(n1, n2)` setting, each stopped at sign consensus.
pub fn fig4(
    n: usize,
    settings: &[(usize, usize)],
    max_rounds: u64,
    seed: u64,
) -> Result<Vec<Fig4Row>> {
    let g = Graph::complete(n)?;
    let mut rows = Vec::new();
    for (idx, &(n1, n2)) in settings.iter().enumerate() {
        let run = consensus_run(
            &g,
            n1,
            n2,
            StopRule::SignConsensus { max_rounds },
            seed,
            stream::FIG4,
            idx as u64,
        )?;
        rows.extend(run.trace.iter().map(|r| Fig4Row {
            setting: setting_label(n1, n2),
            k: r.k,
            distance: r.distance,
        }));
    }
    Ok(rows)
}

/// Median rounds to sign consensus per setting over `runs` seeded runs.
/// Truncated runs count as the budget.
pub fn fig4_convergence_medians(
    n: usize,
    settings: &[(usize, usize)],
    runs: usize,
    max_rounds: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let g = Graph::complete(n)?;
    settings
        .iter()
        .enumerate()
        .map(|(idx, &(n1, n2))| {
            let experiment = stream::FIG4_MEDIANS ^ ((idx as u64) << 32);
            let rounds = run_trials(runs, |t| {
                consensus_run(
                    &g,
                    n1,
                    n2,
                    StopRule::SignConsensus { max_rounds },
                    seed,
                    experiment,
                    t as u64,
                )
                .map(|r| r.rounds as f64)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            Ok(median(&rounds))
        })
        .collect()
}

pub fn fig5(n: usize, config: &WomConfig, rounds: u64, seed: u64) -> Result<WomOutcome> {
    if !(config.sigma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "fig5 needs sigma > 0, got {}",
            config.sigma
        )));
    }
    let g = Graph::complete(n)?;
    simulate_wom(&g, config, rounds, &mut substream(seed, stream::FIG5, 0))
}

/// Round budget used by the word-of-mouth runs: `20 n ln n`.
pub fn wom_round_budget(n: usize) -> u64 {
    let nf = n as f64;
    (20.0 * nf * nf.ln()).ceil() as u64
}

pub fn bounds(g: &Graph, n1: usize, n2: usize) -> Result<SpectralReport> {
    let n = g.node_count();
    if n1 == n2 {
        return Err(Error::DegenerateTie(n1));
    }
    let lambda2 = second_eigenvalue(&expected_matrix(g)?)?;
    sign_consensus_bounds(n, n1, n2, lambda2)
}

pub fn voting(g: &Graph, n1: usize, n2: usize, rounds: u64, seed: u64) -> Result<VotingOutcome> {
    if n1 + n2 != g.node_count() {
        return Err(Error::InvalidInput(
            "n1 + n2 must equal the node count".into(),
        ));
    }
    let prefs: Vec<Opinion> = std::iter::repeat_n(Opinion::G1, n1)
        .chain(std::iter::repeat_n(Opinion::G2, n2))
        .collect();
    simulate_voting_game(g, &prefs, rounds, &mut substream(seed, stream::VOTING, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeRow {
    pub t: f64,
    pub i1: f64,
    pub i2: f64,
    pub s: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Two-message trajectory, keeping every `every`-th sample.
pub fn ode_rows(init: OdeState, l: u32, t_end: f64, dt: f64, every: usize) -> Result<Vec<OdeRow>> {
    let tr = integrate_two_message(init, l, t_end, dt)?;
    let every = every.max(1);
    let last = tr.samples.len() - 1;
    Ok(tr
        .samples
        .iter()
        .enumerate()
        .filter(|(k, _)| k % every == 0 || *k == last)
        .map(|(_, (t, s))| OdeRow {
            t: *t,
            i1: s.i1,
            i2: s.i2,
            s: s.s,
            r1: s.r1,
            r2: s.r2,
        })
        .collect())
}

pub fn default_consensus_budget(n: usize) -> u64 {
    default_round_budget(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig3_first_row_is_the_initial_split() {
        let (run, rows) = fig3(1000, 400, 600, default_round_budget(1000), 1).unwrap();
        assert_eq!(
            (rows[0].k, rows[0].holders_g1, rows[0].holders_g2),
            (0, 400, 600)
        );
        assert!(rows
            .iter()
            .all(|r| r.holders_g1 + r.holders_g2 + r.undecided == 1000));
        assert!(run.stopped);
        let last = rows.last().unwrap();
        assert_eq!((last.holders_g1, last.holders_g2), (0, 1000));
    }

    #[test]
    fn fig4_traces_contract_and_start_at_closed_form() {
        let n = 500;
        let settings = [(200, 300), (150, 350), (50, 450)];
        let rows = fig4(n, &settings, default_round_budget(n), 3).unwrap();
        for &(n1, n2) in &settings {
            let label = setting_label(n1, n2);
            let trace: Vec<_> = rows.iter().filter(|r| r.setting == label).collect();
            let d = n1 as f64 - n2 as f64;
            let want = (n as f64 - d * d / n as f64).sqrt();
            assert!((trace[0].distance - want).abs() < 1e-9);
            for w in trace.windows(2) {
                assert!(w[1].distance <= w[0].distance + 1e-12);
            }
        }
    }

    #[test]
    fn wider_splits_converge_faster() {
        let n = 300;
        let settings = [(130, 170), (100, 200), (40, 260)];
        let med = fig4_convergence_medians(n, &settings, 50, default_round_budget(n), 4).unwrap();
        assert!(med[0] > med[1] && med[1] > med[2], "{med:?}");
    }

    #[test]
    fn fig2_single_message_point_is_the_reach() {
        let out = fig2(&Fig2Params {
            n: 400,
            total_seeds: 20,
            diff_step: 20,
            l: 1,
            trials: 5,
            seed: 2,
        })
        .unwrap();
        let last = out.rows.last().unwrap();
        assert_eq!(last.initial_difference, 20);
        let g = Graph::complete(400).unwrap();
        let summary = spread_summary(&g, 20, 0, 1, 5, substream_seed(2, stream::FIG2, 20)).unwrap();
        assert_eq!(last.mean_final_difference, 400.0 - summary.mean_s);
    }

    #[test]
    fn fig1_s_column_starts_at_seeded_fraction() {
        let p = Fig1Params {
            n: 500,
            ls: vec![1, 2],
            n1: 5,
            n2: 5,
            trials: 8,
            grid_step: 0.01,
            seed: 1,
        };
        let rows = fig1(&p).unwrap();
        for l in [1, 2] {
            let col: Vec<_> = rows.iter().filter(|r| r.l == l).collect();
            assert_eq!(col[0].s, 490.0 / 500.0);
            assert!(col.windows(2).all(|w| w[1].s < w[0].s));
        }
        assert!(fig1(&Fig1Params { n: 50, ..p }).is_err());
    }

    #[test]
    fn bounds_on_complete_ten() {
        let r = bounds(&Graph::complete(10).unwrap(), 3, 7).unwrap();
        assert!((r.lambda2 - 8.0 / 9.0).abs() < 1e-9);
        assert!((r.k_upper / r.k_lower - 6.0).abs() < 1e-12);
        assert_eq!(
            bounds(&Graph::complete(10).unwrap(), 5, 5),
            Err(Error::DegenerateTie(5))
        );
    }

    #[test]
    fn ode_rows_downsample() {
        let rows = ode_rows(OdeState::seeded(0.01, 0.01), 1, 1.0, 0.01, 10).unwrap();
        assert_eq!(rows.len(), 11);
        assert!((rows.last().unwrap().t - 1.0).abs() < 1e-12);
    }
}
