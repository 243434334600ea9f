//! One-dimensional probability laws with their cdf and generalized-inverse
//! quantile function `x ↦ inf{z : F(z) ≥ x}` on the open unit interval.
//!
//! Discrete laws (including empirical samples) are kept in canonical form:
//! strictly increasing atoms with positive weights. Their quantile function
//! is piecewise constant and [`Distribution::quantile_breakpoints`] exposes
//! the pieces, which is what makes exact integration possible downstream.

mod normal;
mod spec;

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use normal::{standard_normal_cdf, standard_normal_quantile};

/// Weights of a discrete law must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Law {
    Discrete(Atoms),
    Uniform { lower: f64, upper: f64 },
    Exponential { rate: f64 },
    Normal { mean: f64, stddev: f64 },
}

#[derive(Debug, Clone, PartialEq)]
struct Atoms {
    values: Vec<f64>,
    weights: Vec<f64>,
    /// Cumulative weights; the last entry is pinned to exactly 1.
    cumulative: Vec<f64>,
}

/// A probability distribution on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    law: Law,
}

impl Distribution {
    /// Finitely many atoms. Input order is irrelevant; repeated values are merged.
    pub fn discrete(values: &[f64], weights: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameters("discrete law needs at least one atom".into()));
        }
        if values.len() != weights.len() {
            return Err(Error::InvalidParameters(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters(format!("atom value {v} is not finite")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameters(format!("atom weight {w} is not positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameters(format!("weights sum to {total}, not 1")));
        }

        let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
        // stable: ties keep their input order
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (v, w) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => merged.push((v, w)),
            }
        }
        let (values, weights): (Vec<f64>, Vec<f64>) = merged.into_iter().unzip();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        *cumulative.last_mut().expect("non-empty") = 1.0;

        Ok(Self { law: Law::Discrete(Atoms { values, weights, cumulative }) })
    }

    /// Equal-weight atoms, one per sample; duplicates are merged.
    pub fn empirical(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameters("empirical law needs at least one sample".into()));
        }
        let w = 1.0 / samples.len() as f64;
        let weights = vec![w; samples.len()];
        Self::discrete_unchecked_sum(samples, &weights)
    }

    // n·(1/n) can miss 1 by more than WEIGHT_SUM_TOL only for absurd n, but the
    // sum check is not meaningful for equal weights built here.
    fn discrete_unchecked_sum(values: &[f64], weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        let scaled: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Self::discrete(values, &scaled)
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidParameters(format!("uniform needs lower < upper, got [{lower}, {upper}]")));
        }
        Ok(Self { law: Law::Uniform { lower, upper } })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParameters(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Self { law: Law::Exponential { rate } })
    }

    pub fn normal(mean: f64, stddev: f64) -> Result<Self> {
        if !(mean.is_finite() && stddev.is_finite() && stddev > 0.0) {
            return Err(Error::InvalidParameters(format!("normal needs finite mean and stddev > 0, got ({mean}, {stddev})")));
        }
        Ok(Self { law: Law::Normal { mean, stddev } })
    }

    /// True for discrete and empirical laws.
    pub fn is_discrete(&self) -> bool {
        matches!(self.law, Law::Discrete(_))
    }

    /// Atom values and weights of a discrete law.
    pub fn atoms(&self) -> Option<(&[f64], &[f64])> {
        match &self.law {
            Law::Discrete(a) => Some((&a.values, &a.weights)),
            _ => None,
        }
    }

    /// Short human-readable description, e.g. `uniform(0, 2)`.
    pub fn describe(&self) -> String {
        match &self.law {
            Law::Discrete(a) => format!("discrete({} atoms)", a.values.len()),
            Law::Uniform { lower, upper } => format!("uniform({lower}, {upper})"),
            Law::Exponential { rate } => format!("exp({rate})"),
            Law::Normal { mean, stddev } => format!("normal({mean}, {stddev})"),
        }
    }

    pub fn support_lower_bound(&self) -> f64 {
        match &self.law {
            Law::Discrete(a) => a.values[0],
            Law::Uniform { lower, .. } => *lower,
            Law::Exponential { .. } => 0.0,
            Law::Normal { .. } => f64::NEG_INFINITY,
        }
    }

    pub fn support_upper_bound(&self) -> f64 {
        match &self.law {
            Law::Discrete(a) => *a.values.last().expect("non-empty"),
            Law::Uniform { upper, .. } => *upper,
            Law::Exponential { .. } | Law::Normal { .. } => f64::INFINITY,
        }
    }

    /// Whether the law is concentrated on `[0, ∞[`.
    pub fn is_nonnegative(&self) -> bool {
        self.support_lower_bound() >= 0.0
    }

    /// Right-continuous cumulative distribution function.
    pub fn cdf(&self, z: f64) -> f64 {
        match &self.law {
            Law::Discrete(a) => {
                let k = a.values.partition_point(|v| *v <= z);
                if k == 0 {
                    0.0
                } else {
                    a.cumulative[k - 1]
                }
            }
            Law::Uniform { lower, upper } => ((z - lower) / (upper - lower)).clamp(0.0, 1.0),
            Law::Exponential { rate } => {
                if z <= 0.0 {
                    0.0
                } else {
                    -(-rate * z).exp_m1()
                }
            }
            Law::Normal { mean, stddev } => 0.5 * libm::erfc(-(z - mean) / (stddev * SQRT_2)),
        }
    }

    /// Left limit `F(z−) = P(X < z)`.
    pub fn cdf_left(&self, z: f64) -> f64 {
        match &self.law {
            Law::Discrete(a) => {
                let k = a.values.partition_point(|v| *v < z);
                if k == 0 {
                    0.0
                } else {
                    a.cumulative[k - 1]
                }
            }
            _ => self.cdf(z),
        }
    }

    /// Lebesgue density, for the atomless families.
    pub fn density(&self, z: f64) -> Option<f64> {
        match &self.law {
            Law::Discrete(_) => None,
            Law::Uniform { lower, upper } => Some(if z >= *lower && z <= *upper { 1.0 / (upper - lower) } else { 0.0 }),
            Law::Exponential { rate } => Some(if z >= 0.0 { rate * (-rate * z).exp() } else { 0.0 }),
            Law::Normal { mean, stddev } => {
                let r = (z - mean) / stddev;
                Some((-0.5 * r * r).exp() / (stddev * (2.0 * std::f64::consts::PI).sqrt()))
            }
        }
    }

    /// Generalized inverse `inf{z : F(z) ≥ x}` for `x ∈ ]0,1[`.
    ///
    /// At a cumulative-weight breakpoint the left atom is returned.
    pub fn quantile(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("quantile level {x} is outside ]0,1[")));
        }
        Ok(self.quantile_unchecked(x))
    }

    pub(crate) fn quantile_unchecked(&self, x: f64) -> f64 {
        match &self.law {
            Law::Discrete(a) => {
                let k = a.cumulative.partition_point(|c| *c < x);
                a.values[k.min(a.values.len() - 1)]
            }
            Law::Uniform { lower, upper } => lower + x * (upper - lower),
            Law::Exponential { rate } => -(-x).ln_1p() / rate,
            Law::Normal { mean, stddev } => mean + stddev * standard_normal_quantile(x),
        }
    }

    /// Cumulative-weight breakpoints `(c_k, value_k)`: the quantile equals
    /// `value_k` on `]c_{k-1}, c_k]`, with `c_0 = 0` implicit and `c_n = 1`.
    pub fn quantile_breakpoints(&self) -> Result<Vec<(f64, f64)>> {
        match &self.law {
            Law::Discrete(a) => Ok(a.cumulative.iter().copied().zip(a.values.iter().copied()).collect()),
            _ => Err(Error::Unsupported(format!("quantile breakpoints of {}", self.describe()))),
        }
    }

    /// `n` i.i.d. draws by inversion, `quantile(U)` with `U` uniform on `]0,1[`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.quantile_unchecked(open_unit(&mut rng))).collect()
    }
}

/// A uniform draw from the open interval `]0,1[`.
pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Inverts a non-decreasing cdf by bisection: the smallest `z` (to `tol`)
/// with `cdf(z) ≥ x`. The bracket `[lo, hi]` is widened geometrically until
/// it contains the quantile.
pub fn invert_cdf_by_bisection<F: Fn(f64) -> f64>(cdf: F, x: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut width = (hi - lo).abs().max(1.0);
    while cdf(lo) >= x {
        lo -= width;
        width *= 2.0;
    }
    width = (hi - lo).abs().max(1.0);
    while cdf(hi) < x {
        hi += width;
        width *= 2.0;
    }
    while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) >= x {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Kolmogorov–Smirnov distance `sup_z |F_n(z) − F(z)|` between the empirical
/// cdf of `samples` and `law`. Left limits are compared as well, so laws with
/// atoms are handled exactly.
pub fn ks_statistic(samples: &[f64], law: &Distribution) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let z = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == z {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        worst = worst.max((at - law.cdf(z)).abs()).max((below - law.cdf_left(z)).abs());
        i = j;
    }
    worst
}
