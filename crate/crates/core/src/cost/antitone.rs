//! Evidence for quasi-antitonicity (the Monge/submodularity condition)
//! `Υ̅(u₁,v₁) + Υ̅(u₂,v₂) ≤ Υ̅(u₂,v₁) + Υ̅(u₁,v₂)` for `u₁ ≤ u₂`, `v₁ ≤ v₂`:
//! a sign scan of `∂²Υ/∂u∂v` for smooth costs and a direct quadruple scan
//! that works for any cost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::CostFunction;
use crate::error::{Error, Result};
use crate::generators::Interval;

/// Mixed partials at or below this count as nonpositive.
pub const MIXED_PARTIAL_TOL: f64 = 1e-8;
/// Largest grid whose quadruples (`grid⁴ ≤ 10⁶`) are enumerated.
pub const MAX_QUADRUPLE_GRID: usize = 31;
/// Relative slack for rounding in the quadruple inequality.
const QUADRUPLE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedPartialMethod {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignReport {
    pub verdict: Verdict,
    pub method: MixedPartialMethod,
    /// Largest mixed partial found, and where.
    #[serde(serialize_with = "crate::report::float")]
    pub max_value: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub argmax: (f64, f64),
    pub points: usize,
    /// Finite-difference step per axis.
    #[serde(serialize_with = "crate::report::float")]
    pub steps: (f64, f64),
    /// `max |fd − analytic| / |analytic|`, when a closed form exists.
    #[serde(serialize_with = "crate::report::float")]
    pub max_fd_relative_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadrupleReport {
    pub verdict: Verdict,
    /// Largest `LHS − RHS` seen; positive values beyond the tolerance are violations.
    #[serde(serialize_with = "crate::report::float")]
    pub worst_margin: f64,
    /// `[u₁, u₂, v₁, v₂]` attaining the worst margin, reported on failure.
    #[serde(serialize_with = "crate::report::float")]
    pub witness: Option<[f64; 4]>,
    pub quadruples: usize,
    pub grid_n: usize,
}

/// Cell midpoints of `range` split into `n` cells.
fn midpoints(range: Interval, n: usize) -> Vec<f64> {
    let w = range.hi - range.lo;
    (0..n).map(|k| range.lo + w * (k as f64 + 0.5) / n as f64).collect()
}

/// Scans `∂²Υ/∂u∂v` over the midpoint grid of `u_range × v_range`.
///
/// The closed form is used where known (CASM, classical Bregman); elsewhere a
/// central four-point stencil with step `1e-4 ×` range width. Non-smooth
/// generators are rejected; use [`quasi_antitone_quadruple_test`] for those.
pub fn mixed_partial_sign(cf: &CostFunction, u_range: Interval, v_range: Interval, grid_n: usize) -> Result<SignReport> {
    if !cf.is_smooth() {
        return Err(Error::Unsupported(format!(
            "mixed partials of the non-smooth cost {}; use the quadruple test",
            cf.name()
        )));
    }
    if grid_n == 0 || !(u_range.hi > u_range.lo) || !(v_range.hi > v_range.lo) {
        return Err(Error::Domain("mixed partial scan needs non-degenerate ranges and grid_n ≥ 1".into()));
    }
    let hu = 1e-4 * (u_range.hi - u_range.lo);
    let hv = 1e-4 * (v_range.hi - v_range.lo);
    let us = midpoints(u_range, grid_n);
    let vs = midpoints(v_range, grid_n);

    let mut method = MixedPartialMethod::Analytic;
    let mut max_value = f64::NEG_INFINITY;
    let mut argmax = (f64::NAN, f64::NAN);
    let mut max_dev: Option<f64> = None;
    for &u in &us {
        for &v in &vs {
            let fd = cf.mixed_partial_fd(u, v, hu, hv)?;
            let value = match cf.mixed_partial_analytic(u, v) {
                Some(exact) => {
                    let dev = (fd - exact).abs() / exact.abs();
                    max_dev = Some(max_dev.map_or(dev, |m| m.max(dev)));
                    exact
                }
                None => {
                    method = MixedPartialMethod::FiniteDifference;
                    fd
                }
            };
            if value > max_value {
                max_value = value;
                argmax = (u, v);
            }
        }
    }
    if method == MixedPartialMethod::FiniteDifference {
        max_dev = None;
    }
    Ok(SignReport {
        verdict: if max_value <= MIXED_PARTIAL_TOL { Verdict::Pass } else { Verdict::Fail },
        method,
        max_value,
        argmax,
        points: us.len() * vs.len(),
        steps: (hu, hv),
        max_fd_relative_deviation: max_dev,
    })
}

/// `Υ̅(u₁,v₁) + Υ̅(u₂,v₂) − Υ̅(u₂,v₁) − Υ̅(u₁,v₂)`; nonpositive for quasi-antitone costs.
pub fn quadruple_margin(cf: &CostFunction, u1: f64, u2: f64, v1: f64, v2: f64) -> Result<f64> {
    let terms = [cf.evaluate(u1, v1)?, cf.evaluate(u2, v2)?, cf.evaluate(u2, v1)?, cf.evaluate(u1, v2)?];
    Ok(margin_of(terms).0)
}

/// Margin and rounding tolerance from `[Υ(u₁,v₁), Υ(u₂,v₂), Υ(u₂,v₁), Υ(u₁,v₂)]`.
/// Quadruples where both sides are infinite carry no information (NaN margin).
fn margin_of(t: [f64; 4]) -> (f64, f64) {
    let lhs = t[0] + t[1];
    let rhs = t[2] + t[3];
    let scale = 1.0 + t.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if lhs.is_infinite() && rhs.is_infinite() {
        return (f64::NAN, 0.0);
    }
    (lhs - rhs, QUADRUPLE_REL_TOL * scale)
}

#[derive(Clone, Copy)]
struct Worst {
    margin: f64,
    violated: bool,
    quad: [f64; 4],
    order: usize,
}

impl Worst {
    fn none() -> Self {
        Self { margin: f64::NEG_INFINITY, violated: false, quad: [f64::NAN; 4], order: usize::MAX }
    }

    fn offer(&mut self, margin: f64, tol: f64, quad: [f64; 4], order: usize) {
        if margin.is_nan() {
            return;
        }
        if margin > self.margin || (margin == self.margin && order < self.order) {
            self.margin = margin;
            self.quad = quad;
            self.order = order;
        }
        if margin > tol {
            self.violated = true;
        }
    }

    fn merge(mut self, other: Self) -> Self {
        let violated = self.violated || other.violated;
        if other.margin > self.margin || (other.margin == self.margin && other.order < self.order) {
            self = other;
        }
        self.violated = violated;
        self
    }
}

/// Checks the quadruple inequality on every ordered quadruple of a
/// `grid_n`-point grid (capped at [`MAX_QUADRUPLE_GRID`]) plus `trials`
/// random ordered quadruples drawn with `seed`.
pub fn quasi_antitone_quadruple_test(
    cf: &CostFunction,
    u_range: Interval,
    v_range: Interval,
    grid_n: usize,
    seed: u64,
    trials: usize,
) -> Result<QuadrupleReport> {
    if u_range.is_empty() || v_range.is_empty() {
        return Err(Error::Domain("quadruple test needs non-empty ranges".into()));
    }
    let n = grid_n.min(MAX_QUADRUPLE_GRID);
    let us = u_range.grid(n);
    let vs = v_range.grid(n);
    let table: Vec<Vec<f64>> = us
        .iter()
        .map(|&u| vs.iter().map(|&v| cf.evaluate(u, v)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;

    let (nu, nv) = (us.len(), vs.len());
    let grid_worst = (0..nu)
        .into_par_iter()
        .map(|i1| {
            let mut worst = Worst::none();
            for i2 in i1 + 1..nu {
                for j1 in 0..nv {
                    for j2 in j1 + 1..nv {
                        let (m, tol) = margin_of([table[i1][j1], table[i2][j2], table[i2][j1], table[i1][j2]]);
                        let order = ((i1 * nu + i2) * nv + j1) * nv + j2;
                        worst.offer(m, tol, [us[i1], us[i2], vs[j1], vs[j2]], order);
                    }
                }
            }
            worst
        })
        .reduce(Worst::none, Worst::merge);
    let grid_count = nu * (nu - 1) / 2 * (nv * (nv - 1) / 2);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |r: Interval| {
        let a = if r.hi > r.lo { rng.random_range(r.lo..=r.hi) } else { r.lo };
        let b = if r.hi > r.lo { rng.random_range(r.lo..=r.hi) } else { r.lo };
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    };
    let mut random_worst = Worst::none();
    for k in 0..trials {
        let (u1, u2) = draw(u_range);
        let (v1, v2) = draw(v_range);
        let terms = [cf.evaluate(u1, v1)?, cf.evaluate(u2, v2)?, cf.evaluate(u2, v1)?, cf.evaluate(u1, v2)?];
        let (m, tol) = margin_of(terms);
        random_worst.offer(m, tol, [u1, u2, v1, v2], usize::MAX / 2 + k);
    }

    let worst = grid_worst.merge(random_worst);
    Ok(QuadrupleReport {
        verdict: if worst.violated { Verdict::Fail } else { Verdict::Pass },
        worst_margin: if worst.margin.is_finite() || worst.margin == f64::INFINITY { worst.margin } else { 0.0 },
        witness: worst.violated.then_some(worst.quad),
        quadruples: grid_count + trials,
        grid_n: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::ScalingPair;
    use crate::generators::Generator;

    fn cost(g: Generator, s: ScalingPair) -> CostFunction {
        CostFunction::new(g, 0.5, s).unwrap()
    }

    #[test]
    fn sign_scan_examples() {
        let r = mixed_partial_sign(
            &cost(Generator::quadratic(), ScalingPair::ClassicalBregman),
            Interval::new(-3.0, 3.0),
            Interval::new(-3.0, 3.0),
            10,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.method, MixedPartialMethod::Analytic);
        assert_eq!(r.max_value, -1.0);

        let r = mixed_partial_sign(
            &cost(Generator::power(2.0).unwrap(), ScalingPair::Casm),
            Interval::new(0.1, 5.0),
            Interval::new(0.1, 5.0),
            10,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.max_value < 0.0);
        // −u/v² at the argmax
        let (u, v) = r.argmax;
        assert!((r.max_value + u / (v * v)).abs() < 1e-12);

        let r = mixed_partial_sign(&CostFunction::sqrt_abs_difference(), Interval::new(0.0, 4.0), Interval::new(0.0, 4.0), 8)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.method, MixedPartialMethod::FiniteDifference);
    }

    #[test]
    fn sign_scan_rejects_kinks() {
        let tv = cost(Generator::total_variation(), ScalingPair::TvScaled);
        assert!(matches!(
            mixed_partial_sign(&tv, Interval::new(1.0, 2.0), Interval::new(1.0, 2.0), 4),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn quadruple_examples() {
        let tv = cost(Generator::total_variation(), ScalingPair::TvScaled);
        let r = quasi_antitone_quadruple_test(&tv, Interval::new(-2.0, 2.0), Interval::new(-2.0, 2.0), 20, 1, 10_000).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert!(r.witness.is_none());

        let sqrt = CostFunction::sqrt_abs_difference();
        let m = quadruple_margin(&sqrt, 0.0, 1.0, 2.0, 3.0).unwrap();
        let expected = 2.0 * 2f64.sqrt() - (1.0 + 3f64.sqrt());
        assert!((m - expected).abs() < 1e-15);
        assert!((m - 0.096).abs() < 1e-3);

        let r = quasi_antitone_quadruple_test(&sqrt, Interval::new(0.0, 1.0), Interval::new(2.0, 3.0), 11, 3, 1000).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.witness, Some([0.0, 1.0, 2.0, 3.0]));
        assert!((r.worst_margin - expected).abs() < 1e-15);
    }

    #[test]
    fn degenerate_quadruples_have_zero_margin() {
        for cf in [cost(Generator::kullback_leibler(), ScalingPair::Casm), CostFunction::sqrt_abs_difference()] {
            assert_eq!(quadruple_margin(&cf, 1.5, 1.5, 0.5, 4.0).unwrap(), 0.0);
            assert_eq!(quadruple_margin(&cf, 0.5, 4.0, 2.0, 2.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn analytic_and_quadruple_verdicts_agree() {
        let families = [
            cost(Generator::power(0.5).unwrap(), ScalingPair::Casm),
            cost(Generator::power(3.0).unwrap(), ScalingPair::Casm),
            cost(Generator::kullback_leibler(), ScalingPair::Casm),
            cost(Generator::quadratic(), ScalingPair::ClassicalBregman),
            cost(Generator::quartic(), ScalingPair::ClassicalBregman),
        ];
        for cf in &families {
            let (u, v) = cf.default_check_ranges();
            let sign = mixed_partial_sign(cf, u, v, 8).unwrap();
            let quad = quasi_antitone_quadruple_test(cf, u, v, 12, 9, 2000).unwrap();
            assert_eq!(sign.verdict, quad.verdict, "{}", cf.name());
        }
    }

    #[test]
    fn grid_is_capped() {
        let cf = cost(Generator::quadratic(), ScalingPair::ClassicalBregman);
        let r = quasi_antitone_quadruple_test(&cf, Interval::new(0.0, 1.0), Interval::new(0.0, 1.0), 100, 0, 0).unwrap();
        assert_eq!(r.grid_n, MAX_QUADRUPLE_GRID);
    }
}
