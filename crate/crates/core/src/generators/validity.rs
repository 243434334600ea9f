//! Sampled checks of the conditions under which the quantile divergence is
//! reflexive: strict convexity at the pivot `t`, no affine stretch between
//! `s` and a differentiable pivot, the excluded subderivative weights at
//! kinks, and positivity of every boundary convention that can be reached.

use serde::Serialize;

use super::{Convention, Generator};
use crate::error::{Error, Result};

/// Second differences at `h = 1e-4` must exceed this to count as curvature.
pub const STRICT_CONVEXITY_TOL: f64 = 1e-10;
/// A stretch is affine when no sampled point deviates from the chord by more.
pub const AFFINE_TOL: f64 = 1e-12;
const GRID: usize = 33;
const CHORD_SAMPLES: usize = 17;

/// A closed interval `[lo, hi]`; a single point is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    #[serde(serialize_with = "crate::report::float")]
    pub lo: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub(crate) fn grid(&self, n: usize) -> Vec<f64> {
        if self.lo == self.hi || n < 2 {
            return vec![self.lo];
        }
        (0..n)
            .map(|k| if k == n - 1 { self.hi } else { self.lo + (self.hi - self.lo) * k as f64 / (n - 1) as f64 })
            .collect()
    }
}

/// The reflexivity condition a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// strict convexity at `t`
    A,
    /// no affine stretch between `s` and a differentiable `t`
    B,
    /// `c = 1` excluded at a kink with an affine stretch to the right
    C,
    /// `c = 0` excluded at a kink with an affine stretch to the left
    D,
    /// positivity of `ψ̄(a,t)`
    I,
    /// positivity of `ψ̄(b,t)`
    J,
    /// positivity of `ψ̄(s,a)`
    K,
    /// positivity of `ψ̄(s,b)`
    L,
    /// positivity of `ψ̄(a,b)`
    M,
    /// positivity of `ψ̄(b,a)`
    N,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub usable: bool,
    pub strictly_convex: bool,
    /// Sampled pivots where no curvature was detected.
    #[serde(serialize_with = "crate::report::float")]
    pub non_strict_points: Vec<f64>,
    /// `(s, t)` pairs whose connecting stretch is affine.
    #[serde(serialize_with = "crate::report::float")]
    pub affine_stretches: Vec<(f64, f64)>,
    /// Sampled pivots where the one-sided derivatives differ.
    #[serde(serialize_with = "crate::report::float")]
    pub kinks: Vec<f64>,
    /// Subderivative weights that must not be used at the kinks found.
    #[serde(serialize_with = "crate::report::float")]
    pub excluded_c: Vec<f64>,
    /// Boundary conventions reachable from the given ranges.
    pub conventions: Vec<Convention>,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    /// Conditions violated, deduplicated, in order of first appearance.
    pub fn violated_conditions(&self) -> Vec<Condition> {
        let mut out = Vec::new();
        for v in &self.violations {
            if !out.contains(&v.condition) {
                out.push(v.condition);
            }
        }
        out
    }
}

fn is_strictly_convex_at(g: &Generator, t: f64) -> bool {
    let (a, b) = g.domain();
    let room = (t - a).min(b - t);
    let mut h = 1e-4;
    // Flat second differences at 1e-4 are re-examined at coarser scales so
    // that isolated zeros of φ″ (t⁴ at 0) are not mistaken for affine patches.
    while h < room && h <= 0.1 {
        let second = g.raw_value(t + h) - 2.0 * g.raw_value(t) + g.raw_value(t - h);
        if second > STRICT_CONVEXITY_TOL {
            return true;
        }
        h *= 10.0;
    }
    false
}

fn is_kink(g: &Generator, t: f64) -> bool {
    let r = g.raw_right(t);
    let l = g.raw_left(t);
    (r - l).abs() > 1e-12 * (1.0 + r.abs().max(l.abs()))
}

fn is_affine_between(g: &Generator, x: f64, y: f64) -> bool {
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    let (Ok(f_lo), Ok(f_hi)) = (g.extended_value(lo), g.extended_value(hi)) else {
        return false;
    };
    if !(f_lo.is_finite() && f_hi.is_finite()) {
        return false;
    }
    let mut scale = 1.0 + f_lo.abs().max(f_hi.abs());
    let mut deviation = 0.0f64;
    for k in 1..CHORD_SAMPLES {
        let z = lo + (hi - lo) * k as f64 / CHORD_SAMPLES as f64;
        if !g.contains(z) {
            continue;
        }
        let chord = f_lo + (f_hi - f_lo) * (z - lo) / (hi - lo);
        let fz = g.raw_value(z);
        scale = scale.max(1.0 + fz.abs());
        deviation = deviation.max((fz - chord).abs());
    }
    deviation < AFFINE_TOL * scale
}

/// Checks the reflexivity conditions for `g` with weight `c` on sampled
/// `s ∈ s_range`, `t ∈ t_range`.
pub fn validate_generator(g: &Generator, c: f64, s_range: Interval, t_range: Interval) -> Result<ValidityReport> {
    if s_range.is_empty() || t_range.is_empty() {
        return Err(Error::Domain("empty range passed to generator validation".into()));
    }
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("subderivative weight c = {c} is outside [0,1]")));
    }
    let (a, b) = g.domain();
    for r in [s_range, t_range] {
        if r.lo < a || r.hi > b || !r.lo.is_finite() || !r.hi.is_finite() {
            return Err(Error::Domain(format!(
                "range [{}, {}] is not a finite part of [{a}, {b}] for {}",
                r.lo,
                r.hi,
                g.name()
            )));
        }
    }

    let s_grid = s_range.grid(GRID);
    let t_grid = t_range.grid(GRID);
    let mut report = ValidityReport {
        usable: true,
        strictly_convex: true,
        non_strict_points: Vec::new(),
        affine_stretches: Vec::new(),
        kinks: Vec::new(),
        excluded_c: Vec::new(),
        conventions: Vec::new(),
        violations: Vec::new(),
    };
    let violate = |report: &mut ValidityReport, condition: Condition, detail: String| {
        if report.violations.iter().filter(|v| v.condition == condition).count() < 4 {
            report.violations.push(Violation { condition, detail });
        }
    };

    for &t in t_grid.iter().filter(|t| g.contains(**t)) {
        if !is_strictly_convex_at(g, t) {
            report.strictly_convex = false;
            report.non_strict_points.push(t);
            violate(&mut report, Condition::A, format!("{} shows no curvature at t = {t}", g.name()));
        }
        let kink = is_kink(g, t);
        if kink {
            report.kinks.push(t);
        }
        for &s in s_grid.iter().filter(|s| **s != t) {
            if !is_affine_between(g, s, t) {
                continue;
            }
            report.affine_stretches.push((s, t));
            if !kink {
                violate(&mut report, Condition::B, format!("{} is affine between s = {s} and t = {t}", g.name()));
            } else if s > t {
                if !report.excluded_c.contains(&1.0) {
                    report.excluded_c.push(1.0);
                }
                if c == 1.0 {
                    violate(&mut report, Condition::C, format!("c = 1 with an affine stretch on [{t}, {s}] right of the kink"));
                }
            } else {
                if !report.excluded_c.contains(&0.0) {
                    report.excluded_c.push(0.0);
                }
                if c == 0.0 {
                    violate(&mut report, Condition::D, format!("c = 0 with an affine stretch on [{s}, {t}] left of the kink"));
                }
            }
        }
    }

    // Boundary conventions reachable from the ranges, with the positivity
    // each one must satisfy.
    let s_at_a = a.is_finite() && s_range.lo == a;
    let s_at_b = b.is_finite() && s_range.hi == b;
    let t_at_a = a.is_finite() && t_range.lo == a;
    let t_at_b = b.is_finite() && t_range.hi == b;
    let interior_t: Vec<f64> = t_grid.iter().copied().filter(|t| g.contains(*t)).collect();
    let interior_s: Vec<f64> = s_grid.iter().copied().filter(|s| g.contains(*s)).collect();

    let check = |report: &mut ValidityReport, convention: Convention, condition: Condition, pairs: Vec<(f64, f64)>| {
        if pairs.is_empty() {
            return Ok::<(), Error>(());
        }
        report.conventions.push(convention);
        for (s, t) in pairs {
            let (v, _) = g.kernel_traced(c, s, t)?;
            if !(v > 0.0) {
                violate(report, condition, format!("boundary kernel at ({s}, {t}) is {v}, not positive"));
            }
        }
        Ok(())
    };
    if s_at_a {
        check(&mut report, Convention::FirstAtLower, Condition::I, interior_t.iter().map(|t| (a, *t)).collect())?;
    }
    if s_at_b {
        check(&mut report, Convention::FirstAtUpper, Condition::J, interior_t.iter().map(|t| (b, *t)).collect())?;
    }
    if t_at_a {
        check(&mut report, Convention::SecondAtLower, Condition::K, interior_s.iter().map(|s| (*s, a)).collect())?;
    }
    if t_at_b {
        check(&mut report, Convention::SecondAtUpper, Condition::L, interior_s.iter().map(|s| (*s, b)).collect())?;
    }
    if s_at_a && t_at_b {
        check(&mut report, Convention::LowerUpper, Condition::M, vec![(a, b)])?;
    }
    if s_at_b && t_at_a {
        check(&mut report, Convention::UpperLower, Condition::N, vec![(b, a)])?;
    }
    if s_at_a && t_at_a {
        report.conventions.push(Convention::DiagonalLower);
    }
    if s_at_b && t_at_b {
        report.conventions.push(Convention::DiagonalUpper);
    }

    report.usable = report.violations.is_empty();
    Ok(report)
}
