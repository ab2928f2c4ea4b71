//! Randomized pairwise averaging of signed counters.
//!
//! Each round a uniform node `i` wakes up, picks a uniform neighbor `j`, and
//! both replace their counters with the pair mean. The realised round is the
//! projection `W = I - (e_i - e_j)(e_i - e_j)^T / 2`, drawn with probability
//! `1 / (n * n_i)`; [`expected_matrix`] averages it and [`second_eigenvalue`]
//! gives the rate that feeds [`averaging_time`] and [`sign_consensus_bounds`].

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Opinion {
    G1,
    G2,
}

impl Opinion {
    pub fn other(self) -> Self {
        match self {
            Self::G1 => Self::G2,
            Self::G2 => Self::G1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Choice {
    G1,
    G2,
    Undecided,
}

impl Choice {
    pub fn of_counter(c: f64) -> Self {
        if c > 0.0 {
            Self::G1
        } else if c < 0.0 {
            Self::G2
        } else {
            Self::Undecided
        }
    }
}

impl From<Opinion> for Choice {
    fn from(o: Opinion) -> Self {
        match o {
            Opinion::G1 => Self::G1,
            Opinion::G2 => Self::G2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterVector {
    c: Vec<f64>,
    k: u64,
    c_ave: f64,
    initial_sum: f64,
    positive: usize,
    negative: usize,
}

impl CounterVector {
    pub fn from_values(c: Vec<f64>) -> Self {
        assert!(!c.is_empty(), "counter vector needs at least one node");
        let initial_sum: f64 = c.iter().sum();
        let c_ave = initial_sum / c.len() as f64;
        let positive = c.iter().filter(|&&x| x > 0.0).count();
        let negative = c.iter().filter(|&&x| x < 0.0).count();
        Self {
            c,
            k: 0,
            c_ave,
            initial_sum,
            positive,
            negative,
        }
    }

    /// `+1` for g1 holders, `-1` for g2 holders.
    pub fn binary(assignments: &[Opinion]) -> Self {
        Self::from_values(
            assignments
                .iter()
                .map(|o| match o {
                    Opinion::G1 => 1.0,
                    Opinion::G2 => -1.0,
                })
                .collect(),
        )
    }

    /// First `n1` nodes hold g1, the remaining `n2` hold g2.
    pub fn binary_split(n1: usize, n2: usize) -> Self {
        let tags: Vec<Opinion> = std::iter::repeat_n(Opinion::G1, n1)
            .chain(std::iter::repeat_n(Opinion::G2, n2))
            .collect();
        Self::binary(&tags)
    }

    pub fn values(&self) -> &[f64] {
        &self.c
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn rounds(&self) -> u64 {
        self.k
    }

    pub fn c_ave(&self) -> f64 {
        self.c_ave
    }

    pub fn initial_sum(&self) -> f64 {
        self.initial_sum
    }

    pub fn sum(&self) -> f64 {
        self.c.iter().sum()
    }

    pub fn positive_count(&self) -> usize {
        self.positive
    }

    pub fn negative_count(&self) -> usize {
        self.negative
    }

    pub fn undecided_count(&self) -> usize {
        self.len() - self.positive - self.negative
    }

    /// `||C(k) - c_ave 1||_2`.
    pub fn distance(&self) -> f64 {
        self.c
            .iter()
            .map(|x| (x - self.c_ave).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn decision(&self) -> Vec<Choice> {
        self.c.iter().map(|&x| Choice::of_counter(x)).collect()
    }

    /// Every counter nonzero and of one sign.
    pub fn has_sign_consensus(&self) -> bool {
        self.positive == self.len() || self.negative == self.len()
    }

    /// Averages the counters of `i` and `j` and advances the round counter.
    pub fn apply_pair(&mut self, i: usize, j: usize) {
        let (a, b) = (self.c[i], self.c[j]);
        let m = 0.5 * (a + b);
        self.retally(a, -1);
        self.retally(b, -1);
        self.retally(m, 2);
        self.c[i] = m;
        self.c[j] = m;
        self.k += 1;
    }

    fn retally(&mut self, x: f64, delta: isize) {
        let slot = if x > 0.0 {
            &mut self.positive
        } else if x < 0.0 {
            &mut self.negative
        } else {
            return;
        };
        *slot = slot
            .checked_add_signed(delta)
            .expect("sign tally underflow");
    }

    /// One asynchronous averaging round; returns the activated pair.
    pub fn gossip_round<R: Rng + ?Sized>(
        &mut self,
        g: &Graph,
        rng: &mut R,
    ) -> Result<(usize, usize)> {
        let i = rng.random_range(0..self.len());
        let j = g.sample_neighbor(i, rng)?;
        self.apply_pair(i, j);
        Ok((i, j))
    }
}

/// Per node: held message, counter for the held message and counter for the
/// other one.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoCounterState {
    pub tags: Vec<Opinion>,
    pub own: Vec<f64>,
    pub other: Vec<f64>,
    pub k: u64,
}

impl TwoCounterState {
    /// Each node starts having counted its own message once.
    pub fn new(tags: Vec<Opinion>) -> Self {
        let n = tags.len();
        Self {
            tags,
            own: vec![1.0; n],
            other: vec![0.0; n],
            k: 0,
        }
    }

    pub fn from_counters(tags: Vec<Opinion>, own: Vec<f64>, other: Vec<f64>) -> Self {
        assert!(tags.len() == own.len() && own.len() == other.len());
        Self {
            tags,
            own,
            other,
            k: 0,
        }
    }

    /// Exchange between `i` and `j` using pre-round values. Matching tags add
    /// each other's own counter; differing tags both set their other-message
    /// counter to `other_i + own_j`. Tags never change.
    pub fn apply_pair(&mut self, i: usize, j: usize) {
        if self.tags[i] == self.tags[j] {
            let total = self.own[i] + self.own[j];
            self.own[i] = total;
            self.own[j] = total;
        } else {
            let v = self.other[i] + self.own[j];
            self.other[i] = v;
            self.other[j] = v;
        }
        self.k += 1;
    }

    pub fn round<R: Rng + ?Sized>(&mut self, g: &Graph, rng: &mut R) -> Result<(usize, usize)> {
        let i = rng.random_range(0..self.tags.len());
        let j = g.sample_neighbor(i, rng)?;
        self.apply_pair(i, j);
        Ok((i, j))
    }

    /// Own message when `own >= other`, the other message otherwise.
    pub fn decision(&self) -> Vec<Opinion> {
        self.tags
            .iter()
            .zip(self.own.iter().zip(&self.other))
            .map(|(t, (o, x))| if o >= x { *t } else { t.other() })
            .collect()
    }

    /// Majority of per-node decisions; `None` on a tie.
    pub fn majority(&self) -> Option<Opinion> {
        let g1 = self
            .decision()
            .iter()
            .filter(|&&d| d == Opinion::G1)
            .count();
        let g2 = self.tags.len() - g1;
        match g1.cmp(&g2) {
            std::cmp::Ordering::Greater => Some(Opinion::G1),
            std::cmp::Ordering::Less => Some(Opinion::G2),
            std::cmp::Ordering::Equal => None,
        }
    }
}

/// `I - (e_i - e_j)(e_i - e_j)^T / 2`.
pub fn realized_update_matrix(n: usize, i: usize, j: usize) -> Result<DMatrix<f64>> {
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidPair(i, j));
    }
    let mut w = DMatrix::identity(n, n);
    w[(i, i)] = 0.5;
    w[(j, j)] = 0.5;
    w[(i, j)] = 0.5;
    w[(j, i)] = 0.5;
    Ok(w)
}

/// Expected update matrix: each ordered pair `(i, j in N_i)` weighted by
/// `1 / (n * n_i)`.
pub fn expected_matrix(g: &Graph) -> Result<DMatrix<f64>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.node_count();
    let mut w = DMatrix::identity(n, n);
    for i in 0..n {
        let half = 0.5 / (n as f64 * g.degree(i) as f64);
        for j in g.neighbors(i) {
            w[(i, i)] -= half;
            w[(j, j)] -= half;
            w[(i, j)] += half;
            w[(j, i)] += half;
        }
    }
    Ok(w)
}

fn center(v: &mut DVector<f64>) {
    let mean = v.mean();
    v.add_scalar_mut(-mean);
}

/// Largest eigenvalue magnitude of `W - J/n` by power iteration restricted to
/// the complement of the all-ones vector.
pub fn second_eigenvalue(w: &DMatrix<f64>) -> Result<f64> {
    let n = w.nrows();
    if n != w.ncols() || n == 0 {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            n,
            w.ncols()
        )));
    }
    if n == 1 {
        return Ok(0.0);
    }
    // irregular deterministic start so no eigenvector is missed by symmetry
    let mut x = DVector::from_fn(n, |i, _| {
        ((i as f64 + 1.0) * 0.618_033_988_75).fract() + 1e-3 * i as f64
    });
    center(&mut x);
    x /= x.norm();
    let mut lambda = f64::NAN;
    for iter in 0..POWER_MAX_ITER {
        let mut y = w * &x;
        center(&mut y);
        let rayleigh = x.dot(&y);
        let norm = y.norm();
        if norm < 1e-300 {
            return Ok(0.0);
        }
        let converged =
            iter > 0 && (rayleigh - lambda).abs() <= POWER_TOL * rayleigh.abs().max(1.0);
        lambda = rayleigh;
        if converged {
            return Ok(lambda.abs());
        }
        x = y / norm;
    }
    Err(Error::IterationLimit(POWER_MAX_ITER))
}

/// `ln(1/eps) / (2 ln(1/lambda2))`, with `0` when `lambda2 = 0`.
pub fn averaging_time(epsilon: f64, lambda2: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    if !(0.0..1.0).contains(&lambda2) {
        return Err(Error::Domain(format!(
            "lambda2 must lie in [0, 1), got {lambda2}"
        )));
    }
    if lambda2 == 0.0 || epsilon == 1.0 {
        return Ok(0.0);
    }
    Ok(epsilon.recip().ln() / (2.0 * lambda2.recip().ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub lambda2: f64,
    /// `|n1 - n2| / (n sqrt(n))`.
    pub epsilon: f64,
    pub k_star: f64,
    /// Below this many rounds sign agreement holds with probability < 1 - epsilon.
    pub k_lower: f64,
    /// From this many rounds on it holds with probability >= 1 - epsilon.
    pub k_upper: f64,
    pub probability_floor: f64,
}

pub fn sign_consensus_bounds(
    n: usize,
    n1: usize,
    n2: usize,
    lambda2: f64,
) -> Result<SpectralReport> {
    if n1 + n2 != n {
        return Err(Error::InvalidInput(format!(
            "n1 + n2 = {} must equal n = {n}",
            n1 + n2
        )));
    }
    if n1 == n2 {
        return Err(Error::DegenerateTie(n1));
    }
    if !(lambda2 > 0.0 && lambda2 < 1.0) {
        return Err(Error::Domain(format!(
            "lambda2 must lie in (0, 1), got {lambda2}"
        )));
    }
    let nf = n as f64;
    let diff = n1.abs_diff(n2) as f64;
    let epsilon = diff / (nf * nf.sqrt());
    let log_inv_eps = epsilon.recip().ln();
    let log_inv_l2 = lambda2.recip().ln();
    let k_star = averaging_time(epsilon, lambda2)?;
    Ok(SpectralReport {
        n,
        n1,
        n2,
        lambda2,
        epsilon,
        k_star,
        k_lower: log_inv_eps / (2.0 * log_inv_l2),
        k_upper: 3.0 * log_inv_eps / log_inv_l2,
        probability_floor: 1.0 - epsilon,
    })
}

pub fn default_round_budget(n: usize) -> u64 {
    let nf = n as f64;
    (50.0 * nf * nf.ln()).ceil().max(1.0) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Run exactly this many rounds.
    Budget(u64),
    /// Stop once every counter has the same nonzero sign.
    SignConsensus { max_rounds: u64 },
    /// Stop once `||C - c_ave 1|| < |c_ave|`.
    Distance { max_rounds: u64 },
}

impl StopRule {
    fn max_rounds(self) -> u64 {
        match self {
            Self::Budget(m)
            | Self::SignConsensus { max_rounds: m }
            | Self::Distance { max_rounds: m } => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub k: u64,
    pub distance: f64,
    pub sign_consensus: bool,
    pub positive_count: usize,
    pub negative_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusRun {
    pub trace: Vec<TraceRow>,
    pub counters: CounterVector,
    /// The stop condition was met (always true for a plain budget).
    pub stopped: bool,
    /// Rounds executed by this run.
    pub rounds: u64,
}

impl ConsensusRun {
    pub fn truncated(&self) -> bool {
        !self.stopped
    }
}

fn trace_row(cv: &CounterVector) -> TraceRow {
    TraceRow {
        k: cv.rounds(),
        distance: cv.distance(),
        sign_consensus: cv.has_sign_consensus(),
        positive_count: cv.positive_count(),
        negative_count: cv.negative_count(),
    }
}

/// Runs averaging rounds until `stop` fires, sampling the trace every `n`
/// rounds and at termination.
pub fn run_consensus<R: Rng + ?Sized>(
    g: &Graph,
    mut cv: CounterVector,
    rng: &mut R,
    stop: StopRule,
) -> Result<ConsensusRun> {
    if cv.len() != g.node_count() {
        return Err(Error::InvalidInput(format!(
            "{} counters for a graph with {} nodes",
            cv.len(),
            g.node_count()
        )));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = cv.len() as u64;
    let ave = cv.c_ave();
    let mut sq_dev = cv.distance().powi(2);
    let done = |cv: &CounterVector, sq_dev: f64| match stop {
        StopRule::Budget(_) => false,
        StopRule::SignConsensus { .. } => cv.has_sign_consensus(),
        StopRule::Distance { .. } => sq_dev.max(0.0).sqrt() < ave.abs(),
    };
    let start = cv.rounds();
    let mut trace = vec![trace_row(&cv)];
    let mut stopped = done(&cv, sq_dev);
    while !stopped && cv.rounds() - start < stop.max_rounds() {
        let i = rng.random_range(0..cv.len());
        let j = g.sample_neighbor(i, rng)?;
        let (a, b) = (cv.c[i], cv.c[j]);
        cv.apply_pair(i, j);
        let m = cv.c[i];
        sq_dev += 2.0 * (m - ave).powi(2) - (a - ave).powi(2) - (b - ave).powi(2);
        if cv.rounds().is_multiple_of(n) {
            let row = trace_row(&cv);
            sq_dev = row.distance.powi(2);
            trace.push(row);
        }
        stopped = done(&cv, sq_dev);
    }
    if let StopRule::Budget(_) = stop {
        stopped = true;
    }
    if trace.last().map(|r| r.k) != Some(cv.rounds()) {
        trace.push(trace_row(&cv));
    }
    Ok(ConsensusRun {
        trace,
        rounds: cv.rounds() - start,
        counters: cv,
        stopped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, substream};
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).abs().max() <= tol
    }

    #[test]
    fn binary_init() {
        let cv = CounterVector::binary(&[Opinion::G1; 5]);
        assert!(cv.values().iter().all(|&x| x == 1.0));
        assert_eq!(cv.c_ave(), 1.0);
        let cv = CounterVector::binary(&[Opinion::G1, Opinion::G2]);
        assert_eq!(cv.values(), &[1.0, -1.0]);
        assert_eq!(cv.c_ave(), 0.0);
        let cv = CounterVector::binary_split(400, 600);
        assert_eq!(cv.initial_sum(), -200.0);
        assert_eq!(cv.len(), 1000);
    }

    #[test]
    fn forced_averaging() {
        let mut cv = CounterVector::from_values(vec![1.0, -1.0]);
        cv.apply_pair(0, 1);
        assert_eq!(cv.values(), &[0.0, 0.0]);
        assert_eq!(cv.undecided_count(), 2);
        let mut cv = CounterVector::from_values(vec![1.0, 1.0, -1.0]);
        cv.apply_pair(0, 2);
        assert_eq!(cv.values(), &[0.0, 1.0, 0.0]);
        assert_eq!(cv.sum(), 1.0);
        assert_eq!(cv.rounds(), 1);
    }

    #[test]
    fn decisions_and_sign_consensus() {
        let cv = CounterVector::from_values(vec![0.5, 0.3, -0.1]);
        assert_eq!(cv.decision(), vec![Choice::G1, Choice::G1, Choice::G2]);
        let cv = CounterVector::from_values(vec![0.0; 3]);
        assert!(cv.decision().iter().all(|&c| c == Choice::Undecided));
        assert!(CounterVector::from_values(vec![1.0, 2.0, 0.1]).has_sign_consensus());
        assert!(!CounterVector::from_values(vec![1.0, -0.001]).has_sign_consensus());
        assert!(!CounterVector::from_values(vec![0.0, 1.0]).has_sign_consensus());
    }

    #[test]
    fn contraction_every_round() {
        let g = Graph::complete(40).unwrap();
        let mut rng = seeded(8);
        let mut cv = CounterVector::binary_split(15, 25);
        let mut prev = cv.distance();
        for _ in 0..20_000 {
            cv.gossip_round(&g, &mut rng).unwrap();
            let d = cv.distance();
            assert!(d <= prev + 1e-12);
            prev = d;
        }
    }

    #[test]
    fn tallies_track_values() {
        let g = Graph::complete(30).unwrap();
        let mut rng = seeded(4);
        let mut cv = CounterVector::binary_split(14, 16);
        for _ in 0..5_000 {
            cv.gossip_round(&g, &mut rng).unwrap();
            let fresh = CounterVector::from_values(cv.values().to_vec());
            assert_eq!(cv.positive_count(), fresh.positive_count());
            assert_eq!(cv.negative_count(), fresh.negative_count());
        }
    }

    #[test]
    fn sum_conserved_over_a_million_rounds() {
        let g = Graph::complete(100).unwrap();
        let mut rng = seeded(12);
        let mut cv = CounterVector::binary_split(37, 63);
        for _ in 0..1_000_000 {
            cv.gossip_round(&g, &mut rng).unwrap();
        }
        assert!((cv.sum() - cv.initial_sum()).abs() <= 1e-9);
    }

    #[test]
    fn two_counter_rules() {
        let mut st = TwoCounterState::new(vec![Opinion::G1, Opinion::G1]);
        st.apply_pair(0, 1);
        assert_eq!(st.own, vec![2.0, 2.0]);
        let mut st = TwoCounterState::new(vec![Opinion::G1, Opinion::G2]);
        st.apply_pair(0, 1);
        assert_eq!(st.other, vec![1.0, 1.0]);
        assert_eq!(st.own, vec![1.0, 1.0]);
        assert_eq!(st.tags, vec![Opinion::G1, Opinion::G2]);
        // ties keep the held message
        assert_eq!(st.decision(), vec![Opinion::G1, Opinion::G2]);
        let st = TwoCounterState::from_counters(vec![Opinion::G1], vec![1.0], vec![3.0]);
        assert_eq!(st.decision(), vec![Opinion::G2]);
    }

    #[test]
    fn two_counter_majority_tracks_single_counter_outcome() {
        let n = 100;
        let g = Graph::complete(n).unwrap();
        let runs = 200;
        let mut agree = 0;
        for t in 0..runs {
            let tags: Vec<Opinion> = (0..n)
                .map(|i| if i < 70 { Opinion::G1 } else { Opinion::G2 })
                .collect();
            let mut two = TwoCounterState::new(tags.clone());
            let mut rng = substream(99, 1, t);
            for _ in 0..1_000 {
                two.round(&g, &mut rng).unwrap();
            }
            let mut rng = substream(99, 2, t);
            let run = run_consensus(
                &g,
                CounterVector::binary(&tags),
                &mut rng,
                StopRule::SignConsensus {
                    max_rounds: default_round_budget(n),
                },
            )
            .unwrap();
            let single = match run.counters.decision()[0] {
                Choice::G1 => Some(Opinion::G1),
                Choice::G2 => Some(Opinion::G2),
                Choice::Undecided => None,
            };
            if run.stopped && two.majority() == single {
                agree += 1;
            }
        }
        assert!(
            agree as f64 / runs as f64 >= 0.9,
            "agreement {agree}/{runs}"
        );
    }

    #[test]
    fn realized_matrix_shape() {
        let w = realized_update_matrix(2, 0, 1).unwrap();
        assert!(close(&w, &DMatrix::from_element(2, 2, 0.5), 0.0));
        assert_eq!(
            realized_update_matrix(3, 1, 1),
            Err(Error::InvalidPair(1, 1))
        );
    }

    proptest! {
        #[test]
        fn realized_matrix_laws(n in 2usize..12, a in 0usize..100, b in 0usize..100) {
            let i = a % n;
            let j = (i + 1 + b % (n - 1)) % n;
            let w = realized_update_matrix(n, i, j).unwrap();
            let ones = DVector::from_element(n, 1.0);
            prop_assert!((&w * &ones - &ones).abs().max() <= 1e-12);
            prop_assert!((ones.transpose() * &w - ones.transpose()).abs().max() <= 1e-12);
            prop_assert!(close(&(&w * &w), &w, 1e-12));
            prop_assert!(close(&w.transpose(), &w, 0.0));
        }
    }

    #[test]
    fn expected_matrix_small_complete() {
        let w = expected_matrix(&Graph::complete(2).unwrap()).unwrap();
        assert!(close(&w, &DMatrix::from_element(2, 2, 0.5), 1e-15));
        let w = expected_matrix(&Graph::complete(3).unwrap()).unwrap();
        let want = DMatrix::identity(3, 3) * 0.5 + DMatrix::from_element(3, 3, 1.0 / 6.0);
        assert!(close(&w, &want, 1e-15));
        let disconnected = Graph::from_edge_list(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(expected_matrix(&disconnected), Err(Error::Disconnected));
    }

    #[test]
    fn expected_matrix_is_doubly_stochastic() {
        let g = Graph::from_edge_list(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4), (0, 5)])
            .unwrap();
        let w = expected_matrix(&g).unwrap();
        for k in 0..6 {
            assert!((w.row(k).sum() - 1.0).abs() < 1e-12);
            assert!((w.column(k).sum() - 1.0).abs() < 1e-12);
        }
        assert!(close(&w.transpose(), &w, 1e-15));
    }

    /// Brute-force oracle: full symmetric eigendecomposition, dropping the
    /// eigenvalue whose eigenvector is closest to the all-ones direction.
    fn lambda2_dense(w: &DMatrix<f64>) -> f64 {
        let n = w.nrows();
        let eig = SymmetricEigen::new(w.clone());
        let ones = DVector::from_element(n, 1.0 / (n as f64).sqrt());
        let skip = (0..n)
            .max_by(|&a, &b| {
                let da = eig.eigenvectors.column(a).dot(&ones).abs();
                let db = eig.eigenvectors.column(b).dot(&ones).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        (0..n)
            .filter(|&k| k != skip)
            .map(|k| eig.eigenvalues[k].abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn spectral_closed_form_on_complete_graphs() {
        let w = expected_matrix(&Graph::complete(2).unwrap()).unwrap();
        assert_eq!(second_eigenvalue(&w).unwrap(), 0.0);
        for n in 3..=20 {
            let w = expected_matrix(&Graph::complete(n).unwrap()).unwrap();
            let l2 = second_eigenvalue(&w).unwrap();
            assert!(
                (l2 - (1.0 - 1.0 / (n as f64 - 1.0))).abs() < 1e-9,
                "n={n}: {l2}"
            );
            assert!((lambda2_dense(&w) - l2).abs() < 1e-9);
        }
    }

    #[test]
    fn power_iteration_matches_dense_on_sparse_graphs() {
        let ring: Vec<_> = (0..12).map(|i| (i, (i + 1) % 12)).collect();
        let star: Vec<_> = (1..9).map(|i| (0, i)).collect();
        let mut lollipop: Vec<_> = (0..5)
            .flat_map(|i| (i + 1..5).map(move |j| (i, j)))
            .collect();
        lollipop.extend([(4, 5), (5, 6), (6, 7)]);
        for (n, edges) in [(12, ring), (9, star), (8, lollipop)] {
            let w = expected_matrix(&Graph::from_edge_list(n, &edges).unwrap()).unwrap();
            let l2 = second_eigenvalue(&w).unwrap();
            assert!(
                (l2 - lambda2_dense(&w)).abs() < 1e-8,
                "{l2} vs {}",
                lambda2_dense(&w)
            );
            assert!((0.0..1.0).contains(&l2));
        }
    }

    #[test]
    fn averaging_time_values() {
        assert_eq!(averaging_time(1.0, 0.5).unwrap(), 0.0);
        assert_eq!(averaging_time(0.1, 0.0).unwrap(), 0.0);
        let expected = 100f64.ln() / (2.0 * 2f64.ln());
        assert!((averaging_time(0.01, 0.5).unwrap() - expected).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for k in 1..=100 {
            let t = averaging_time(k as f64 / 100.0, 0.9).unwrap();
            assert!(t < prev);
            prev = t;
        }
        assert!(averaging_time(0.0, 0.5).is_err());
        assert!(averaging_time(0.5, 1.0).is_err());
    }

    #[test]
    fn bounds_values() {
        let r = sign_consensus_bounds(1000, 400, 600, 1.0 - 1.0 / 999.0).unwrap();
        assert!((r.epsilon - 6.3246e-3).abs() < 1e-7);
        assert!((r.k_upper / r.k_lower - 6.0).abs() < 1e-12);
        assert!((r.k_upper - 6.0 * r.k_star).abs() < 1e-9);
        let r2 = sign_consensus_bounds(1000, 300, 700, 0.9).unwrap();
        let r1 = sign_consensus_bounds(1000, 400, 600, 0.9).unwrap();
        assert!((r2.epsilon / r1.epsilon - 2.0).abs() < 1e-12);
        assert_eq!(
            sign_consensus_bounds(10, 5, 5, 0.5),
            Err(Error::DegenerateTie(5))
        );
    }

    #[test]
    fn run_consensus_edge_cases() {
        let g = Graph::complete(4).unwrap();
        let run = run_consensus(
            &g,
            CounterVector::binary(&[Opinion::G1; 4]),
            &mut seeded(0),
            StopRule::SignConsensus { max_rounds: 100 },
        )
        .unwrap();
        assert_eq!(run.rounds, 0);
        assert!(run.stopped);

        let g = Graph::complete(2).unwrap();
        let run = run_consensus(
            &g,
            CounterVector::from_values(vec![1.0, -1.0]),
            &mut seeded(0),
            StopRule::SignConsensus { max_rounds: 50 },
        )
        .unwrap();
        assert_eq!(run.rounds, 50);
        assert!(run.truncated());
        assert_eq!(run.counters.undecided_count(), 2);

        let disconnected = Graph::from_edge_list(4, &[(0, 1), (2, 3)]).unwrap();
        let err = run_consensus(
            &disconnected,
            CounterVector::binary_split(2, 2),
            &mut seeded(0),
            StopRule::Budget(10),
        );
        assert_eq!(err, Err(Error::Disconnected));
    }

    #[test]
    fn distance_rule_implies_sign_consensus() {
        let g = Graph::complete(50).unwrap();
        for t in 0..20 {
            let run = run_consensus(
                &g,
                CounterVector::binary_split(32, 18),
                &mut substream(5, 0, t),
                StopRule::Distance {
                    max_rounds: 1_000_000,
                },
            )
            .unwrap();
            assert!(run.stopped);
            assert!(run.counters.distance() < run.counters.c_ave().abs());
            assert!(run.counters.has_sign_consensus());
        }
    }

    #[test]
    fn trace_is_strided_and_contracting() {
        let g = Graph::complete(100).unwrap();
        let run = run_consensus(
            &g,
            CounterVector::binary_split(40, 60),
            &mut seeded(3),
            StopRule::Budget(5_050),
        )
        .unwrap();
        assert_eq!(run.trace.len(), 52);
        assert_eq!(run.trace.last().unwrap().k, 5_050);
        for w in run.trace.windows(2) {
            assert!(w[1].distance <= w[0].distance + 1e-12);
        }
    }

    #[test]
    fn majority_wins_on_thousand_nodes() {
        let g = Graph::complete(1000).unwrap();
        let runs = 40;
        let wins = (0..runs)
            .filter(|&t| {
                let run = run_consensus(
                    &g,
                    CounterVector::binary_split(600, 400),
                    &mut substream(1, 7, t),
                    StopRule::SignConsensus {
                        max_rounds: default_round_budget(1000),
                    },
                )
                .unwrap();
                run.stopped && run.counters.decision().iter().all(|&c| c == Choice::G1)
            })
            .count();
        assert!(wins as f64 >= 0.95 * runs as f64);
    }

    #[test]
    fn counters_are_convex_combinations_of_the_start() {
        let n = 24;
        let g = Graph::complete(n).unwrap();
        let mut rng = seeded(17);
        let start: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let mut cv = CounterVector::from_values(start.clone());
        let pairs: Vec<_> = (0..10_000)
            .map(|_| cv.gossip_round(&g, &mut rng).unwrap())
            .collect();
        let mut combo = DMatrix::<f64>::zeros(n, n);
        for m in 0..n {
            let mut basis = CounterVector::from_values((0..n).map(|i| f64::from(i == m)).collect());
            for &(i, j) in &pairs {
                basis.apply_pair(i, j);
            }
            combo.set_column(m, &DVector::from_column_slice(basis.values()));
        }
        let rebuilt = &combo * DVector::from_vec(start);
        for i in 0..n {
            assert!((rebuilt[i] - cv.values()[i]).abs() < 1e-9);
            assert!((combo.row(i).sum() - 1.0).abs() < 1e-9);
            assert!(combo.row(i).iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn second_moment_decays_at_lambda2_per_round() {
        // E[W^T W] = E[W] for projections, so E||N(k)||^2 <= lambda2^k ||N(0)||^2
        let n = 50;
        let g = Graph::complete(n).unwrap();
        let l2 = second_eigenvalue(&expected_matrix(&g).unwrap()).unwrap();
        let runs = 500;
        let checkpoints = [n as u64, 5 * n as u64, 10 * n as u64];
        let mut acc = [0.0; 3];
        let mut acc_sq = [0.0; 3];
        let n0 = CounterVector::binary_split(30, 20).distance().powi(2);
        for t in 0..runs {
            let mut rng = substream(21, 0, t);
            let mut cv = CounterVector::binary_split(30, 20);
            for (c, &k) in checkpoints.iter().enumerate() {
                while cv.rounds() < k {
                    cv.gossip_round(&g, &mut rng).unwrap();
                }
                let e = cv.distance().powi(2);
                acc[c] += e;
                acc_sq[c] += e * e;
            }
        }
        for (c, &k) in checkpoints.iter().enumerate() {
            let mean = acc[c] / runs as f64;
            let var = acc_sq[c] / runs as f64 - mean * mean;
            let bound = l2.powi(k as i32) * n0;
            let se = (var / runs as f64).sqrt();
            assert!(mean <= bound + 3.0 * se, "k={k}: {mean} > {bound}");
            // on the complete graph the bound is attained in expectation
            assert!(mean >= bound - 3.0 * se, "k={k}: {mean} << {bound}");
        }
    }
}
