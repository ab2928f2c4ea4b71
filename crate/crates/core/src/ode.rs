//! Mean-field model of the spreading process.
//!
//! The two-message field is
//!
//! ```text
//! di1/dt = i1 s - (1/l) i1 (1 - s)      dr1/dt = (1/l) i1 (1 - s)
//! di2/dt = i2 s - (1/l) i2 (1 - s)      dr2/dt = (1/l) i2 (1 - s)
//! ds/dt  = -s (i1 + i2)
//! ```
//!
//! and summing the message pairs gives the reduced `(s, i)` system whose
//! first integral is [`i_of_s`]. One unit of model time corresponds to `n`
//! steps of the stochastic engine.

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_DT: f64 = 1e-3;

const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct OdeState {
    pub i1: f64,
    pub i2: f64,
    pub s: f64,
    pub r1: f64,
    pub r2: f64,
}

impl OdeState {
    pub fn new(i1: f64, i2: f64, s: f64, r1: f64, r2: f64) -> Self {
        Self { i1, i2, s, r1, r2 }
    }

    /// Seeded start with nothing removed: `s = 1 - i1 - i2`.
    pub fn seeded(i1: f64, i2: f64) -> Self {
        Self::new(i1, i2, 1.0 - i1 - i2, 0.0, 0.0)
    }

    pub fn sum(&self) -> f64 {
        self.i1 + self.i2 + self.s + self.r1 + self.r2
    }

    pub fn infective(&self) -> f64 {
        self.i1 + self.i2
    }

    pub fn removed(&self) -> f64 {
        self.r1 + self.r2
    }

    fn to_array(self) -> [f64; 5] {
        [self.i1, self.i2, self.s, self.r1, self.r2]
    }

    fn from_array(a: [f64; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }

    fn on_simplex(&self) -> bool {
        self.to_array()
            .iter()
            .all(|x| (-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(x))
            && (self.sum() - 1.0).abs() <= SIMPLEX_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<S> {
    pub dt: f64,
    pub samples: Vec<(f64, S)>,
}

impl<S: Copy> Trajectory<S> {
    pub fn last(&self) -> S {
        self.samples.last().expect("trajectory is never empty").1
    }

    /// Linear interpolation at time `t`, clamped to the sampled range.
    pub fn at(&self, t: f64, lerp: impl Fn(&S, &S, f64) -> S) -> S {
        let k = (t / self.dt).floor();
        if k < 0.0 {
            return self.samples[0].1;
        }
        let k = k as usize;
        if k + 1 >= self.samples.len() {
            return self.last();
        }
        let (t0, a) = self.samples[k];
        let (_, b) = self.samples[k + 1];
        lerp(&a, &b, (t - t0) / self.dt)
    }
}

/// Reduced single-message state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ReducedState {
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

fn rk4<const D: usize>(y: [f64; D], dt: f64, f: &impl Fn(&[f64; D]) -> [f64; D]) -> [f64; D] {
    let add = |a: &[f64; D], b: &[f64; D], h: f64| {
        let mut out = *a;
        out.iter_mut().zip(b).for_each(|(o, b)| *o += h * b);
        out
    };
    let k1 = f(&y);
    let k2 = f(&add(&y, &k1, dt / 2.0));
    let k3 = f(&add(&y, &k2, dt / 2.0));
    let k4 = f(&add(&y, &k3, dt));
    let mut out = y;
    for d in 0..D {
        out[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
    }
    out
}

fn check_common(l: u32, dt: f64) -> Result<()> {
    if l < 1 {
        return Err(Error::InvalidThreshold(l));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    Ok(())
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "t_end must be non-negative, got {t_end}"
        )));
    }
    Ok((t_end / dt).round() as usize)
}

pub fn two_message_field(y: &[f64; 5], l: u32) -> [f64; 5] {
    let [i1, i2, s, _, _] = *y;
    let inv_l = 1.0 / l as f64;
    let rem1 = inv_l * i1 * (1.0 - s);
    let rem2 = inv_l * i2 * (1.0 - s);
    [i1 * s - rem1, i2 * s - rem2, -s * (i1 + i2), rem1, rem2]
}

/// Classical RK4 on the two-message field from `init` to `t_end`.
pub fn integrate_two_message(
    init: OdeState,
    l: u32,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory<OdeState>> {
    check_common(l, dt)?;
    if !init.on_simplex() {
        return Err(Error::InvalidInput(format!(
            "initial state {init:?} is off the simplex"
        )));
    }
    let steps = step_count(t_end, dt)?;
    let field = |y: &[f64; 5]| two_message_field(y, l);
    let mut y = init.to_array();
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, init));
    for k in 1..=steps {
        y = rk4(y, dt, &field);
        samples.push((k as f64 * dt, OdeState::from_array(y)));
    }
    Ok(Trajectory { dt, samples })
}

/// Reduced system `ds/dt = -s i`, `di/dt = s i - (1/l)(1 - s) i`, integrated
/// until `i` falls below `i_floor` or `t_max` is reached.
pub fn integrate_reduced(
    s0: f64,
    i0: f64,
    l: u32,
    dt: f64,
    t_max: f64,
) -> Result<Trajectory<ReducedState>> {
    check_common(l, dt)?;
    if !(s0 >= 0.0 && i0 >= 0.0 && s0 + i0 <= 1.0 + SIMPLEX_TOL) {
        return Err(Error::InvalidInput(format!(
            "invalid start s0={s0}, i0={i0}"
        )));
    }
    let steps = step_count(t_max, dt)?;
    let inv_l = 1.0 / l as f64;
    let field = |y: &[f64; 3]| {
        let [s, i, _] = *y;
        let rem = inv_l * (1.0 - s) * i;
        [-s * i, s * i - rem, rem]
    };
    let mut y = [s0, i0, 1.0 - s0 - i0];
    let mut samples = vec![(
        0.0,
        ReducedState {
            s: s0,
            i: i0,
            r: y[2],
        },
    )];
    for k in 1..=steps {
        y = rk4(y, dt, &field);
        samples.push((
            k as f64 * dt,
            ReducedState {
                s: y[0],
                i: y[1],
                r: y[2],
            },
        ));
        if y[1] < 1e-12 {
            break;
        }
    }
    Ok(Trajectory { dt, samples })
}

/// Infective fraction as a function of the susceptible fraction along the
/// reduced trajectory started at `s = 1`: `((l+1)/l)(1-s) + ln(s)/l`.
pub fn i_of_s(s: f64, l: u32) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(format!("s must lie in (0, 1], got {s}")));
    }
    if l < 1 {
        return Err(Error::InvalidThreshold(l));
    }
    let l = l as f64;
    Ok((l + 1.0) / l * (1.0 - s) + s.ln() / l)
}

/// Non-trivial root of `s = exp(-(l+1)(1-s))`: the fraction never informed.
pub fn final_s(l: u32) -> Result<f64> {
    if l < 1 {
        return Err(Error::InvalidThreshold(l));
    }
    let a = (l + 1) as f64;
    let f = |s: f64| s - (-a * (1.0 - s)).exp();
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-6);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Splits `total` between two messages in proportion to their initial
/// holders.
pub fn proportional_split(n1_0: f64, n2_0: f64, total: f64) -> Result<(f64, f64)> {
    let denom = n1_0 + n2_0;
    if denom <= 0.0 || n1_0 < 0.0 || n2_0 < 0.0 {
        return Err(Error::DegenerateSplit);
    }
    if total < 0.0 {
        return Err(Error::InvalidInput(format!(
            "total must be non-negative, got {total}"
        )));
    }
    let part1 = total * (n1_0 / denom);
    Ok((part1, total - part1))
}
