//! Pointwise transport costs `Υ̅(u,v) = W₃(u,v)·ψ̄(u/W(u,v), v/W(u,v))` built
//! from a generator, a subderivative weight `c` and a scaling pair `(W, W₃)`.
//!
//! The scaling pair selects the family: classical Bregman (`W ≡ W₃ ≡ 1`),
//! CASM f-divergences (`W = W₃ = v`), the scaled total-variation pair
//! (`W = v`, `W₃ = |v|`) and scaled Bregman distances (`W₃ = W`, a scale
//! connector). Costs outside this form (e.g. `√|u − v|`, which is not
//! quasi-antitone) can be supplied pointwise for negative controls.

mod antitone;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{Convention, Generator, Interval, KernelArg};

pub use antitone::{
    mixed_partial_sign, quadruple_margin, quasi_antitone_quadruple_test, MixedPartialMethod, QuadrupleReport,
    SignReport, Verdict, MAX_QUADRUPLE_GRID, MIXED_PARTIAL_TOL,
};

type PairFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Closed rectangle of admissible `(u, v)`; bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Domain {
    pub u: Interval,
    pub v: Interval,
}

impl Domain {
    pub fn plane() -> Self {
        let all = Interval::new(f64::NEG_INFINITY, f64::INFINITY);
        Self { u: all, v: all }
    }

    pub fn nonnegative_quadrant() -> Self {
        let half = Interval::new(0.0, f64::INFINITY);
        Self { u: half, v: half }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u.lo && u <= self.u.hi && v >= self.v.lo && v <= self.v.hi
    }
}

/// A named scale connector `W(u,v)` for scaled Bregman distances.
#[derive(Clone)]
pub struct Connector {
    name: String,
    f: PairFn,
}

impl Connector {
    pub fn new<F>(name: &str, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), f: Arc::new(f) }
    }

    /// Builtin connectors: `v`, `u`, `mean` (arithmetic) and `geomean`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "v" => Ok(Self::new("v", |_, v| v)),
            "u" => Ok(Self::new("u", |u, _| u)),
            "mean" => Ok(Self::new("mean", |u, v| 0.5 * (u + v))),
            "geomean" => Ok(Self::new("geomean", |u, v| (u * v).sqrt())),
            other => Err(Error::Parse(format!("unknown scale connector `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for Connector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Connector({})", self.name)
    }
}

/// The scaling functions `(W, W₃)` of the adaptive case.
#[derive(Clone)]
pub enum ScalingPair {
    /// `W ≡ 1`, `W₃ ≡ 1`.
    ClassicalBregman,
    /// `W(u,v) = v`, `W₃(u,v) = v`.
    Casm,
    /// `W(u,v) = v`, `W₃(u,v) = |v|`.
    TvScaled,
    /// `W₃ = W` = the connector.
    ScaledBregman(Connector),
    Custom { name: String, w: PairFn, w3: PairFn, domain: Domain },
}

impl fmt::Debug for ScalingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl ScalingPair {
    pub fn custom<W, W3>(name: &str, w: W, w3: W3, domain: Domain) -> Self
    where
        W: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        W3: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        ScalingPair::Custom { name: name.into(), w: Arc::new(w), w3: Arc::new(w3), domain }
    }

    pub fn name(&self) -> String {
        match self {
            ScalingPair::ClassicalBregman => "cbd".into(),
            ScalingPair::Casm => "casm".into(),
            ScalingPair::TvScaled => "tvscaled".into(),
            ScalingPair::ScaledBregman(c) => format!("sbd:connector={}", c.name),
            ScalingPair::Custom { name, .. } => name.clone(),
        }
    }

    pub fn w(&self, u: f64, v: f64) -> f64 {
        match self {
            ScalingPair::ClassicalBregman => 1.0,
            ScalingPair::Casm | ScalingPair::TvScaled => v,
            ScalingPair::ScaledBregman(c) => (c.f)(u, v),
            ScalingPair::Custom { w, .. } => w(u, v),
        }
    }

    pub fn w3(&self, u: f64, v: f64) -> f64 {
        match self {
            ScalingPair::ClassicalBregman => 1.0,
            ScalingPair::Casm => v,
            ScalingPair::TvScaled => v.abs(),
            ScalingPair::ScaledBregman(c) => (c.f)(u, v),
            ScalingPair::Custom { w3, .. } => w3(u, v),
        }
    }

    /// Declared input domain.
    pub fn default_domain(&self) -> Domain {
        match self {
            ScalingPair::ClassicalBregman | ScalingPair::TvScaled => Domain::plane(),
            ScalingPair::Casm | ScalingPair::ScaledBregman(_) => Domain::nonnegative_quadrant(),
            ScalingPair::Custom { domain, .. } => *domain,
        }
    }

    /// Sampled check that `W₃` is finite and nonnegative everywhere and strictly
    /// positive off the diagonal, and that `W` is finite. Returns violations.
    pub fn check(&self, pairs: impl IntoIterator<Item = (f64, f64)>) -> Vec<String> {
        let mut problems = Vec::new();
        for (u, v) in pairs {
            let w = self.w(u, v);
            let w3 = self.w3(u, v);
            if !w.is_finite() {
                problems.push(format!("W({u}, {v}) = {w} is not finite"));
            }
            if !w3.is_finite() {
                problems.push(format!("(e): W3({u}, {v}) = {w3} is not finite"));
            } else if w3 < 0.0 {
                problems.push(format!("W3({u}, {v}) = {w3} is negative"));
            } else if u != v && w3 <= 0.0 {
                problems.push(format!("(f): W3({u}, {v}) = 0 off the diagonal"));
            }
            if problems.len() >= 8 {
                break;
            }
        }
        problems
    }
}

impl FromStr for ScalingPair {
    type Err = Error;

    /// `cbd`, `casm`, `tvscaled`, `sbd:connector=<name>`.
    fn from_str(spec: &str) -> Result<Self> {
        match spec.trim() {
            "cbd" => Ok(ScalingPair::ClassicalBregman),
            "casm" => Ok(ScalingPair::Casm),
            "tvscaled" => Ok(ScalingPair::TvScaled),
            other => {
                let name = other
                    .strip_prefix("sbd:connector=")
                    .ok_or_else(|| Error::Parse(format!("unknown scaling `{other}`")))?;
                Ok(ScalingPair::ScaledBregman(Connector::builtin(name.trim())?))
            }
        }
    }
}

#[derive(Clone)]
enum CostKind {
    Composed { generator: Generator, c: f64, scaling: ScalingPair },
    Pointwise { name: String, f: PairFn },
}

/// Borrowed view of a cost's construction.
pub(crate) enum CostKindRef<'a> {
    Composed { generator: &'a Generator, c: f64, scaling: &'a ScalingPair },
    Pointwise,
}

/// A pointwise transport cost `Υ̅(u,v) ∈ [0, ∞]`.
#[derive(Clone)]
pub struct CostFunction {
    kind: CostKind,
    domain: Domain,
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CostFunction({})", self.name())
    }
}

impl CostFunction {
    pub fn new(generator: Generator, c: f64, scaling: ScalingPair) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Domain(format!("subderivative weight c = {c} is outside [0,1]")));
        }
        let domain = scaling.default_domain();
        Ok(Self { kind: CostKind::Composed { generator, c, scaling }, domain })
    }

    /// A cost given directly as a function of `(u, v)`.
    pub fn pointwise<F>(name: &str, f: F, domain: Domain) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self { kind: CostKind::Pointwise { name: name.into(), f: Arc::new(f) }, domain }
    }

    /// `√|u − v|`: concave in `u − v`, hence not quasi-antitone.
    pub fn sqrt_abs_difference() -> Self {
        Self::pointwise("sqrt-abs", |u, v| (u - v).abs().sqrt(), Domain::plane())
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn name(&self) -> String {
        match &self.kind {
            CostKind::Composed { generator, c, scaling } => {
                if generator.is_smooth() {
                    format!("{}+{}", scaling.name(), generator.name())
                } else {
                    format!("{}+{}(c={c})", scaling.name(), generator.name())
                }
            }
            CostKind::Pointwise { name, .. } => name.clone(),
        }
    }

    pub(crate) fn kind_ref(&self) -> CostKindRef<'_> {
        match &self.kind {
            CostKind::Composed { generator, c, scaling } => CostKindRef::Composed { generator, c: *c, scaling },
            CostKind::Pointwise { .. } => CostKindRef::Pointwise,
        }
    }

    pub fn generator(&self) -> Option<&Generator> {
        match &self.kind {
            CostKind::Composed { generator, .. } => Some(generator),
            CostKind::Pointwise { .. } => None,
        }
    }

    pub fn scaling(&self) -> Option<&ScalingPair> {
        match &self.kind {
            CostKind::Composed { scaling, .. } => Some(scaling),
            CostKind::Pointwise { .. } => None,
        }
    }

    pub fn c(&self) -> Option<f64> {
        match &self.kind {
            CostKind::Composed { c, .. } => Some(*c),
            CostKind::Pointwise { .. } => None,
        }
    }

    /// Whether the cost is built from a differentiable generator (or given pointwise).
    pub fn is_smooth(&self) -> bool {
        self.generator().is_none_or(Generator::is_smooth)
    }

    /// `Υ̅(u, v)`.
    pub fn evaluate(&self, u: f64, v: f64) -> Result<f64> {
        self.evaluate_traced(u, v).map(|(value, _)| value)
    }

    /// `Υ̅(u, v)` together with the kernel branch that produced it.
    pub fn evaluate_traced(&self, u: f64, v: f64) -> Result<(f64, Convention)> {
        if !self.domain.contains(u, v) {
            return Err(Error::Domain(format!("({u}, {v}) is outside the domain of {}", self.name())));
        }
        match &self.kind {
            CostKind::Pointwise { name, f } => {
                let value = f(u, v);
                if value.is_nan() {
                    return Err(Error::NonFinite(format!("{name} at ({u}, {v}) is NaN")));
                }
                Ok((value, Convention::Interior))
            }
            CostKind::Composed { generator, c, scaling } => {
                let w = scaling.w(u, v);
                let w3 = scaling.w3(u, v);
                if w.is_nan() || w3.is_nan() {
                    return Err(Error::NonFinite(format!("scaling {} at ({u}, {v}) is NaN", scaling.name())));
                }
                let (s, t) = if w == 0.0 {
                    if u == 0.0 && v == 0.0 {
                        (KernelArg::ZeroOverZero, KernelArg::ZeroOverZero)
                    } else {
                        return Err(Error::SingularScaling { u, v });
                    }
                } else {
                    (KernelArg::Finite(u / w), KernelArg::Finite(v / w))
                };
                let (psi, convention) = generator.kernel_args(*c, s, t)?;
                // 0·∞ = 0
                let value = if w3 == 0.0 { 0.0 } else { w3 * psi };
                Ok((value, convention))
            }
        }
    }

    /// Closed-form `∂²Υ/∂u∂v` for the CASM and classical Bregman families.
    pub fn mixed_partial_analytic(&self, u: f64, v: f64) -> Option<f64> {
        let CostKind::Composed { generator, scaling, .. } = &self.kind else {
            return None;
        };
        match scaling {
            ScalingPair::ClassicalBregman => generator.second_derivative(v).map(|d2| -d2),
            ScalingPair::Casm if v > 0.0 => {
                let r = u / v;
                generator.second_derivative(r).map(|d2| -(u / (v * v)) * d2)
            }
            _ => None,
        }
    }

    /// Central four-point estimate of `∂²Υ/∂u∂v` with steps `(hu, hv)`.
    pub fn mixed_partial_fd(&self, u: f64, v: f64, hu: f64, hv: f64) -> Result<f64> {
        let pp = self.evaluate(u + hu, v + hv)?;
        let pm = self.evaluate(u + hu, v - hv)?;
        let mp = self.evaluate(u - hu, v + hv)?;
        let mm = self.evaluate(u - hu, v - hv)?;
        Ok((pp - pm - mp + mm) / (4.0 * hu * hv))
    }

    /// Ranges on which the sign and quadruple checks run by default.
    pub fn default_check_ranges(&self) -> (Interval, Interval) {
        let square = |lo, hi| (Interval::new(lo, hi), Interval::new(lo, hi));
        match &self.kind {
            CostKind::Composed { scaling, .. } => match scaling {
                ScalingPair::ClassicalBregman | ScalingPair::TvScaled => square(-2.0, 2.0),
                ScalingPair::Casm | ScalingPair::ScaledBregman(_) => square(1.0, 5.0),
                ScalingPair::Custom { domain, .. } => clip_domain(*domain),
            },
            CostKind::Pointwise { .. } => {
                let (u, v) = clip_domain(self.domain);
                if self.domain == Domain::plane() {
                    square(0.0, 4.0)
                } else {
                    (u, v)
                }
            }
        }
    }
}

fn clip_domain(d: Domain) -> (Interval, Interval) {
    let clip = |i: Interval| {
        let lo = if i.lo.is_finite() { i.lo } else { -2.0 };
        let hi = if i.hi.is_finite() { i.hi } else { lo.max(0.0) + 4.0 };
        Interval::new(lo, hi)
    };
    (clip(d.u), clip(d.v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tv_cost() -> CostFunction {
        CostFunction::new(Generator::total_variation(), 0.5, ScalingPair::TvScaled).unwrap()
    }

    fn quadratic_cbd() -> CostFunction {
        CostFunction::new(Generator::quadratic(), 0.5, ScalingPair::ClassicalBregman).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_abs_diff_eq!(tv_cost().evaluate(2.0, 5.0).unwrap(), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(quadratic_cbd().evaluate(2.0, 5.0).unwrap(), 4.5, epsilon = 1e-14);

        // direct composition: v·ψ(u/v, 1) with φ₂(s) = (s − 1)²/2
        let casm2 = CostFunction::new(Generator::power(2.0).unwrap(), 0.5, ScalingPair::Casm).unwrap();
        let oracle = 1.0 * ((2.0f64 / 1.0 - 1.0).powi(2) / 2.0);
        assert_abs_diff_eq!(casm2.evaluate(2.0, 1.0).unwrap(), oracle, epsilon = 1e-14);
        assert_abs_diff_eq!(oracle, 0.5, epsilon = 1e-15);

        let kl = CostFunction::new(Generator::kullback_leibler(), 0.5, ScalingPair::Casm).unwrap();
        assert_eq!(kl.evaluate(1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_over_zero_and_singular_scaling() {
        let kl = CostFunction::new(Generator::kullback_leibler(), 0.5, ScalingPair::Casm).unwrap();
        assert_eq!(kl.evaluate_traced(0.0, 0.0).unwrap(), (0.0, Convention::ZeroOverZero));
        assert_eq!(tv_cost().evaluate(0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(kl.evaluate(1.0, 0.0), Err(Error::SingularScaling { .. })));
        assert!(matches!(tv_cost().evaluate(-1.0, 0.0), Err(Error::SingularScaling { .. })));
    }

    #[test]
    fn boundary_ratio_uses_kernel_convention() {
        let kl = CostFunction::new(Generator::kullback_leibler(), 0.5, ScalingPair::Casm).unwrap();
        // u/v = 0 is the lower endpoint of the KL domain: Υ = v·φ̄(0) = v
        let (value, conv) = kl.evaluate_traced(0.0, 3.0).unwrap();
        assert_abs_diff_eq!(value, 3.0, epsilon = 1e-14);
        assert_eq!(conv, Convention::FirstAtLower);
        assert!(matches!(kl.evaluate(-1.0, 3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn family_overlaps_with_wasserstein_costs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tv = tv_cost();
        let quad = quadratic_cbd();
        for _ in 0..100_000 {
            let u: f64 = rng.random_range(-10.0..10.0);
            let v: f64 = rng.random_range(-10.0..10.0);
            let d = (u - v).abs();
            assert!((tv.evaluate(u, v).unwrap() - d).abs() <= 1e-12 * (1.0 + d));
            assert!((quad.evaluate(u, v).unwrap() - d * d / 2.0).abs() <= 1e-12 * (1.0 + d * d));
        }
    }

    #[test]
    fn scaled_bregman_with_v_connector_is_casm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in [Generator::power(2.0).unwrap(), Generator::power(0.5).unwrap(), Generator::kullback_leibler()] {
            let casm = CostFunction::new(g.clone(), 0.5, ScalingPair::Casm).unwrap();
            let sbd = CostFunction::new(g, 0.5, "sbd:connector=v".parse().unwrap()).unwrap();
            for _ in 0..1000 {
                let u: f64 = rng.random_range(0.1..10.0);
                let v: f64 = rng.random_range(0.1..10.0);
                let a = casm.evaluate(u, v).unwrap();
                let b = sbd.evaluate(u, v).unwrap();
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn diagonal_is_zero() {
        let costs = [
            tv_cost(),
            quadratic_cbd(),
            CostFunction::new(Generator::quartic(), 0.5, ScalingPair::ClassicalBregman).unwrap(),
            CostFunction::new(Generator::power(3.0).unwrap(), 0.5, ScalingPair::Casm).unwrap(),
            CostFunction::new(Generator::kullback_leibler(), 0.5, "sbd:connector=mean".parse().unwrap()).unwrap(),
        ];
        for cf in &costs {
            for u in [0.25, 1.0, 3.5, 9.0] {
                assert_eq!(cf.evaluate(u, u).unwrap(), 0.0, "{}", cf.name());
            }
        }
    }

    #[test]
    fn scaling_checks() {
        assert!(ScalingPair::Casm.check([(1.0, 2.0), (3.0, 1.0)]).is_empty());
        let problems = ScalingPair::Casm.check([(1.0, 0.0)]);
        assert!(problems[0].starts_with("(f)"), "{problems:?}");
        let bad = ScalingPair::custom("inf", |_, _| 1.0, |_, _| f64::INFINITY, Domain::plane());
        assert!(bad.check([(1.0, 2.0)])[0].starts_with("(e)"));
    }

    #[test]
    fn parses_scaling_specs() {
        for spec in ["cbd", "casm", "tvscaled", "sbd:connector=geomean"] {
            assert_eq!(spec.parse::<ScalingPair>().unwrap().name(), spec);
        }
        assert!("sbd:connector=nope".parse::<ScalingPair>().is_err());
        assert!("w2".parse::<ScalingPair>().is_err());
    }
}
