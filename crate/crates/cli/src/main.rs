//! Figure-data generator for the rumor spreading and consensus experiments.
//!
//! Each subcommand prints a `key=value` summary on stdout and, with `--out`,
//! writes its data as CSV (JSON for `bounds`).

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rumor_consensus::apps::{Weighting, WomConfig};
use rumor_consensus::consensus::{default_round_budget, StopRule};
use rumor_consensus::experiments::{self as exp, Fig1Params, Fig2Params};
use rumor_consensus::ode::{OdeState, DEFAULT_DT};
use rumor_consensus::Graph;

#[derive(Parser)]
#[command(
    name = "rumor-consensus",
    version,
    about = "Competing rumors and sign consensus experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; fixes every output bit-for-bit.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Where to write the data file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GraphArg {
    /// Edge-list file ("u v" per line, '#' comments). Default: complete graph.
    #[arg(long)]
    graph: Option<PathBuf>,
}

impl GraphArg {
    fn load(&self, nodes: Option<usize>) -> Result<Graph> {
        match &self.graph {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(Graph::parse_edge_list(&text, nodes)?)
            }
            None => Ok(Graph::complete(
                nodes.context("--nodes is required without --graph")?,
            )?),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StopArg {
    Sign,
    Distance,
    Budget,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    None,
    Betweenness,
}

#[derive(Subcommand)]
enum Command {
    /// Infective vs susceptible fraction, simulated and closed form.
    Fig1 {
        #[arg(long, default_value_t = 5000)]
        nodes: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 4, 5])]
        l: Vec<u32>,
        #[arg(long, default_value_t = 10)]
        seeds1: usize,
        #[arg(long, default_value_t = 10)]
        seeds2: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Mean final difference between message holders vs initial difference.
    Fig2 {
        #[arg(long, default_value_t = 5000)]
        nodes: usize,
        /// Total initial holders n1 + n2.
        #[arg(long, default_value_t = 200)]
        total_seeds: usize,
        #[arg(long, default_value_t = 20)]
        step: usize,
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Holders of each message per n rounds of averaging consensus.
    Fig3 {
        #[arg(long, default_value_t = 1000)]
        nodes: usize,
        #[arg(long, default_value_t = 400)]
        seeds1: usize,
        #[arg(long, default_value_t = 600)]
        seeds2: usize,
        #[arg(long)]
        rounds: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Distance to the average for several initial splits.
    Fig4 {
        #[arg(long, default_value_t = 1000)]
        nodes: usize,
        /// Comma-separated n1:n2 settings.
        #[arg(long, value_delimiter = ',', default_values_t = ["400:600".to_string(), "300:700".to_string(), "100:900".to_string()])]
        settings: Vec<String>,
        #[arg(long)]
        rounds: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Word-of-mouth: histogram of final counters from Gaussian starts.
    Fig5 {
        #[arg(long, default_value_t = 1000)]
        nodes: usize,
        #[arg(long, default_value_t = -0.01, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long)]
        rounds: Option<u64>,
        #[arg(long, value_enum, default_value_t = WeightingArg::None)]
        weighting: WeightingArg,
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        common: Common,
    },
    /// One recorded spreading run plus Monte Carlo final-state statistics.
    Spread {
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 1)]
        seeds1: usize,
        #[arg(long, default_value_t = 1)]
        seeds2: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        common: Common,
    },
    /// One averaging-consensus trace.
    Consensus {
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        seeds1: usize,
        #[arg(long)]
        seeds2: usize,
        #[arg(long)]
        rounds: Option<u64>,
        #[arg(long, value_enum, default_value_t = StopArg::Sign)]
        stop: StopArg,
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        common: Common,
    },
    /// Spectral quantities and sign-consensus round bounds.
    Bounds {
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        seeds1: usize,
        #[arg(long)]
        seeds2: usize,
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        common: Common,
    },
    /// Repeated voting game: camp sizes and total payoff per round.
    Voting {
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        seeds1: usize,
        #[arg(long)]
        seeds2: usize,
        #[arg(long)]
        rounds: Option<u64>,
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        common: Common,
    },
    /// Deterministic two-message trajectory.
    Ode {
        #[arg(long, default_value_t = 0.01)]
        i1: f64,
        #[arg(long, default_value_t = 0.01)]
        i2: f64,
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 30.0)]
        t_end: f64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        /// Keep every n-th integration step.
        #[arg(long, default_value_t = 100)]
        every: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

struct Summary(Vec<(String, String)>);

impl Summary {
    fn new(experiment: &str) -> Self {
        Self(vec![("experiment".into(), experiment.into())])
    }

    fn kv(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.0.push((k.into(), v.to_string()));
        self
    }

    fn print(&self) -> Result<()> {
        let mut out = io::stdout().lock();
        for (k, v) in &self.0 {
            writeln!(out, "{k}={v}")?;
        }
        Ok(())
    }
}

fn parse_settings(raw: &[String]) -> Result<Vec<(usize, usize)>> {
    raw.iter()
        .map(|s| {
            let (a, b) = s
                .split_once(':')
                .with_context(|| format!("setting {s:?} is not n1:n2"))?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fig1 {
            nodes,
            l,
            seeds1,
            seeds2,
            trials,
            grid_step,
            common,
        } => {
            let rows = exp::fig1(&Fig1Params {
                n: nodes,
                ls: l.clone(),
                n1: seeds1,
                n2: seeds2,
                trials,
                grid_step,
                seed: common.seed,
            })?;
            write_csv(common.out.as_deref(), &rows)?;
            let mut s = Summary::new("fig1");
            s.kv("n", nodes)
                .kv("trials", trials)
                .kv("seed", common.seed);
            for l in l {
                let dev = rows
                    .iter()
                    .filter(|r| r.l == l)
                    .map(|r| (r.i_simulated - r.i_theoretical).abs())
                    .fold(0.0, f64::max);
                s.kv(&format!("max_deviation_l{l}"), dev);
            }
            s.print()
        }
        Command::Fig2 {
            nodes,
            total_seeds,
            step,
            l,
            trials,
            common,
        } => {
            let out = exp::fig2(&Fig2Params {
                n: nodes,
                total_seeds,
                diff_step: step,
                l,
                trials,
                seed: common.seed,
            })?;
            write_csv(common.out.as_deref(), &out.rows)?;
            Summary::new("fig2")
                .kv("n", nodes)
                .kv("total_seeds", total_seeds)
                .kv("trials", trials)
                .kv("seed", common.seed)
                .kv("slope", out.fit.slope)
                .kv("intercept", out.fit.intercept)
                .kv("r_squared", out.fit.r_squared)
                .kv("predicted_slope", out.predicted_slope)
                .print()
        }
        Command::Fig3 {
            nodes,
            seeds1,
            seeds2,
            rounds,
            common,
        } => {
            let budget = rounds.unwrap_or_else(|| default_round_budget(nodes));
            let (run, rows) = exp::fig3(nodes, seeds1, seeds2, budget, common.seed)?;
            write_csv(common.out.as_deref(), &rows)?;
            let last = rows.last().expect("trace has a row");
            Summary::new("fig3")
                .kv("n", nodes)
                .kv("seed", common.seed)
                .kv("rounds", run.rounds)
                .kv("sign_consensus", run.stopped)
                .kv("final_holders_g1", last.holders_g1)
                .kv("final_holders_g2", last.holders_g2)
                .print()
        }
        Command::Fig4 {
            nodes,
            settings,
            rounds,
            common,
        } => {
            let settings = parse_settings(&settings)?;
            if settings.len() < 3 {
                bail!("fig4 needs at least three settings");
            }
            let budget = rounds.unwrap_or_else(|| default_round_budget(nodes));
            let rows = exp::fig4(nodes, &settings, budget, common.seed)?;
            write_csv(common.out.as_deref(), &rows)?;
            let mut s = Summary::new("fig4");
            s.kv("n", nodes).kv("seed", common.seed);
            for &(n1, n2) in &settings {
                let label = exp::setting_label(n1, n2);
                let k = rows
                    .iter()
                    .filter(|r| r.setting == label)
                    .map(|r| r.k)
                    .max()
                    .unwrap_or(0);
                s.kv(&format!("rounds_{n1}_{n2}"), k);
            }
            s.print()
        }
        Command::Fig5 {
            nodes,
            mu,
            sigma,
            rounds,
            weighting,
            graph,
            common,
        } => {
            let weighting = match weighting {
                WeightingArg::None => Weighting::None,
                WeightingArg::Betweenness => Weighting::Betweenness,
            };
            let cfg = WomConfig {
                mu,
                sigma,
                weighting,
            };
            let budget = rounds.unwrap_or_else(|| exp::wom_round_budget(nodes));
            let out = if graph.graph.is_some() {
                if !(sigma > 0.0) {
                    bail!("fig5 needs sigma > 0");
                }
                let g = graph.load(Some(nodes))?;
                rumor_consensus::apps::simulate_wom(
                    &g,
                    &cfg,
                    budget,
                    &mut rumor_consensus::rng::substream(common.seed, exp::stream::FIG5, 0),
                )?
            } else {
                exp::fig5(nodes, &cfg, budget, common.seed)?
            };
            write_csv(common.out.as_deref(), &out.histogram)?;
            let fin = out.final_counters();
            let near = fin
                .values()
                .iter()
                .filter(|x| (*x - out.consensus_value).abs() <= 0.01)
                .count();
            Summary::new("fig5")
                .kv("n", nodes)
                .kv("seed", common.seed)
                .kv("rounds", out.run.rounds)
                .kv("initial_mean", out.initial_mean)
                .kv("final_common_value", out.consensus_value)
                .kv("sign_consensus", fin.has_sign_consensus())
                .kv("fraction_within_0.01", near as f64 / nodes as f64)
                .print()
        }
        Command::Spread {
            nodes,
            l,
            seeds1,
            seeds2,
            trials,
            graph,
            common,
        } => {
            let g = graph.load(nodes)?;
            let (res, rows) = exp::spread_run(&g, seeds1, seeds2, l, common.seed)?;
            write_csv(common.out.as_deref(), &rows)?;
            let sum = exp::spread_summary(&g, seeds1, seeds2, l, trials, common.seed)?;
            let n = g.node_count() as f64;
            Summary::new("spread")
                .kv("n", g.node_count())
                .kv("l", l)
                .kv("seed", common.seed)
                .kv("run_steps", res.steps)
                .kv("run_absorbed", res.absorbed)
                .kv("trials", sum.trials)
                .kv("truncated", sum.truncated)
                .kv("mean_final_s_fraction", sum.mean_s / n)
                .kv("var_final_s", sum.var_s)
                .kv("mean_r1", sum.mean_r1)
                .kv("var_r1", sum.var_r1)
                .kv("mean_r2", sum.mean_r2)
                .kv("var_r2", sum.var_r2)
                .kv("mean_abs_diff", sum.mean_abs_diff)
                .kv("var_abs_diff", sum.var_abs_diff)
                .print()
        }
        Command::Consensus {
            nodes,
            seeds1,
            seeds2,
            rounds,
            stop,
            graph,
            common,
        } => {
            let g = graph.load(nodes)?;
            let budget = rounds.unwrap_or_else(|| default_round_budget(g.node_count()));
            let stop = match stop {
                StopArg::Sign => StopRule::SignConsensus { max_rounds: budget },
                StopArg::Distance => StopRule::Distance { max_rounds: budget },
                StopArg::Budget => StopRule::Budget(budget),
            };
            let run = exp::consensus_run(
                &g,
                seeds1,
                seeds2,
                stop,
                common.seed,
                exp::stream::CONSENSUS,
                0,
            )?;
            write_csv(common.out.as_deref(), &run.trace)?;
            Summary::new("consensus")
                .kv("n", g.node_count())
                .kv("seed", common.seed)
                .kv("rounds", run.rounds)
                .kv("stopped", run.stopped)
                .kv("c_ave", run.counters.c_ave())
                .kv("final_distance", run.counters.distance())
                .kv("sign_consensus", run.counters.has_sign_consensus())
                .print()
        }
        Command::Bounds {
            nodes,
            seeds1,
            seeds2,
            graph,
            common,
        } => {
            let g = graph.load(nodes.or(Some(seeds1 + seeds2)))?;
            let r = exp::bounds(&g, seeds1, seeds2)?;
            if let Some(path) = common.out.as_deref() {
                let mut f =
                    File::create(path).with_context(|| format!("creating {}", path.display()))?;
                serde_json::to_writer(&mut f, &r)?;
                writeln!(f)?;
            }
            Summary::new("bounds")
                .kv("n", r.n)
                .kv("n1", r.n1)
                .kv("n2", r.n2)
                .kv("lambda2", r.lambda2)
                .kv("epsilon", r.epsilon)
                .kv("k_star", r.k_star)
                .kv("k_lower", r.k_lower)
                .kv("k_upper", r.k_upper)
                .kv("probability_floor", r.probability_floor)
                .print()
        }
        Command::Voting {
            nodes,
            seeds1,
            seeds2,
            rounds,
            graph,
            common,
        } => {
            let g = graph.load(nodes.or(Some(seeds1 + seeds2)))?;
            let budget = rounds.unwrap_or_else(|| default_round_budget(g.node_count()));
            let out = exp::voting(&g, seeds1, seeds2, budget, common.seed)?;
            write_csv(common.out.as_deref(), &out.history)?;
            let last = out.history.last().expect("history has a row");
            Summary::new("voting")
                .kv("n", g.node_count())
                .kv("seed", common.seed)
                .kv("rounds", budget)
                .kv("final_camp1", last.camp1)
                .kv("final_camp2", last.camp2)
                .kv("final_total_payoff", last.total_payoff)
                .print()
        }
        Command::Ode {
            i1,
            i2,
            l,
            t_end,
            dt,
            every,
            common,
        } => {
            let rows = exp::ode_rows(OdeState::seeded(i1, i2), l, t_end, dt, every)?;
            write_csv(common.out.as_deref(), &rows)?;
            let last = rows.last().expect("trajectory has a row");
            Summary::new("ode")
                .kv("l", l)
                .kv("t_end", last.t)
                .kv("final_s", last.s)
                .kv("final_r1", last.r1)
                .kv("final_r2", last.r2)
                .print()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
