//! Convex divergence generators `φ` on an open interval `]a,b[` and the
//! Bregman-type kernel `ψ(s,t) = φ(s) − φ(t) − φ′₊,c(t)·(s − t)`, extended
//! lower semi-continuously to the closed square `[a,b]²`.
//!
//! Finite endpoints carry the limits `φ̄(a)`, `φ̄′(a)` (and likewise at `b`).
//! Builtins supply them in closed form; custom generators get them from
//! Richardson-extrapolated one-sided limits at construction time. Infinite
//! endpoints are never reached by finite arguments, so passing `±∞` to the
//! kernel is a domain error.

mod limits;
mod validity;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub use validity::{validate_generator, Condition, Interval, ValidityReport, Violation};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Value and slope limits at a finite endpoint of the generator domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Boundary {
    /// `φ̄` at the endpoint; may be `+∞`.
    #[serde(serialize_with = "crate::report::float")]
    pub value: f64,
    /// Limit of `φ′₊,c` at the endpoint; the same for every `c`. May be `±∞`.
    #[serde(serialize_with = "crate::report::float")]
    pub slope: f64,
}

/// Which branch of the extended kernel produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Both arguments inside `]a,b[`; no convention involved.
    Interior,
    /// `ψ̄(a,t)`: limit in the first argument at the lower endpoint.
    FirstAtLower,
    /// `ψ̄(b,t)`.
    FirstAtUpper,
    /// `ψ̄(s,a)`: the tangent is taken at the lower endpoint.
    SecondAtLower,
    /// `ψ̄(s,b)`.
    SecondAtUpper,
    /// `ψ̄(a,a) := 0`.
    DiagonalLower,
    /// `ψ̄(b,b) := 0`.
    DiagonalUpper,
    /// `ψ̄(a,b)`.
    LowerUpper,
    /// `ψ̄(b,a)`.
    UpperLower,
    /// `ψ̄(0/0, 0/0) := 0`.
    ZeroOverZero,
}

impl Convention {
    pub const ALL: [Convention; 10] = [
        Convention::Interior,
        Convention::FirstAtLower,
        Convention::FirstAtUpper,
        Convention::SecondAtLower,
        Convention::SecondAtUpper,
        Convention::DiagonalLower,
        Convention::DiagonalUpper,
        Convention::LowerUpper,
        Convention::UpperLower,
        Convention::ZeroOverZero,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Convention::Interior => "interior",
            Convention::FirstAtLower => "first_at_lower",
            Convention::FirstAtUpper => "first_at_upper",
            Convention::SecondAtLower => "second_at_lower",
            Convention::SecondAtUpper => "second_at_upper",
            Convention::DiagonalLower => "diagonal_lower",
            Convention::DiagonalUpper => "diagonal_upper",
            Convention::LowerUpper => "lower_upper",
            Convention::UpperLower => "upper_lower",
            Convention::ZeroOverZero => "zero_over_zero",
        }
    }
}

/// A kernel argument: a finite ratio, or the indeterminate `0/0` produced
/// when the scale function vanishes at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelArg {
    Finite(f64),
    ZeroOverZero,
}

#[derive(Clone)]
enum Kind {
    Power(f64),
    KullbackLeibler,
    ReverseKullbackLeibler,
    TotalVariation,
    Quadratic,
    Quartic,
    Custom(Arc<CustomFns>),
}

struct CustomFns {
    value: ScalarFn,
    right: ScalarFn,
    left: Option<ScalarFn>,
    second: Option<ScalarFn>,
}

/// A continuous convex generator `φ: ]a,b[ → ℝ`.
#[derive(Clone)]
pub struct Generator {
    name: String,
    lower: f64,
    upper: f64,
    kind: Kind,
    lower_boundary: Option<Boundary>,
    upper_boundary: Option<Boundary>,
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("name", &self.name)
            .field("domain", &(self.lower, self.upper))
            .field("lower_boundary", &self.lower_boundary)
            .field("upper_boundary", &self.upper_boundary)
            .finish()
    }
}

impl Generator {
    /// Power divergence generator `(t^γ − γt + γ − 1)/(γ(γ − 1))` on `]0,∞[`.
    pub fn power(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma == 0.0 || gamma == 1.0 {
            return Err(Error::InvalidParameters(format!(
                "power generator needs γ ∉ {{0, 1}}, got {gamma}"
            )));
        }
        let value = if gamma > 0.0 { 1.0 / gamma } else { f64::INFINITY };
        let slope = if gamma > 1.0 { -1.0 / (gamma - 1.0) } else { f64::NEG_INFINITY };
        Ok(Self {
            name: format!("power(gamma={gamma})"),
            lower: 0.0,
            upper: f64::INFINITY,
            kind: Kind::Power(gamma),
            lower_boundary: Some(Boundary { value, slope }),
            upper_boundary: None,
        })
    }

    /// `t ln t − t + 1` on `]0,∞[`.
    pub fn kullback_leibler() -> Self {
        Self {
            name: "kl".into(),
            lower: 0.0,
            upper: f64::INFINITY,
            kind: Kind::KullbackLeibler,
            lower_boundary: Some(Boundary { value: 1.0, slope: f64::NEG_INFINITY }),
            upper_boundary: None,
        }
    }

    /// `−ln t + t − 1` on `]0,∞[`.
    pub fn reverse_kullback_leibler() -> Self {
        Self {
            name: "revkl".into(),
            lower: 0.0,
            upper: f64::INFINITY,
            kind: Kind::ReverseKullbackLeibler,
            lower_boundary: Some(Boundary { value: f64::INFINITY, slope: f64::NEG_INFINITY }),
            upper_boundary: None,
        }
    }

    /// `|t − 1|` on `ℝ`; the only builtin with a kink (at `t = 1`).
    pub fn total_variation() -> Self {
        Self::unbounded("tv", Kind::TotalVariation)
    }

    /// `(t − 1)²/2` on `ℝ`.
    pub fn quadratic() -> Self {
        Self::unbounded("quadratic", Kind::Quadratic)
    }

    /// `t⁴` on `ℝ`.
    pub fn quartic() -> Self {
        Self::unbounded("quartic", Kind::Quartic)
    }

    fn unbounded(name: &str, kind: Kind) -> Self {
        Self {
            name: name.into(),
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            kind,
            lower_boundary: None,
            upper_boundary: None,
        }
    }

    /// A differentiable generator given by closures. Boundary limits at finite
    /// endpoints are extrapolated numerically here, once.
    pub fn custom<V, D>(name: &str, lower: f64, upper: f64, value: V, derivative: D) -> Result<Self>
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidParameters(format!("generator domain ]{lower}, {upper}[ is empty")));
        }
        let fns = CustomFns { value: Arc::new(value), right: Arc::new(derivative), left: None, second: None };
        let width = if (upper - lower).is_finite() { upper - lower } else { 1.0 };
        let lower_boundary = lower.is_finite().then(|| Boundary {
            value: limits::one_sided_limit(&*fns.value, lower, 1.0, width),
            slope: limits::one_sided_limit(&*fns.right, lower, 1.0, width),
        });
        let upper_boundary = upper.is_finite().then(|| Boundary {
            value: limits::one_sided_limit(&*fns.value, upper, -1.0, width),
            slope: limits::one_sided_limit(&*fns.right, upper, -1.0, width),
        });
        Ok(Self {
            name: name.into(),
            lower,
            upper,
            kind: Kind::Custom(Arc::new(fns)),
            lower_boundary,
            upper_boundary,
        })
    }

    /// Supplies a separate left-hand derivative, making the generator non-smooth.
    /// The closure given to [`Generator::custom`] is then the right-hand derivative.
    pub fn with_left_derivative<L>(self, left: L) -> Self
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.map_custom(|fns| CustomFns {
            value: fns.value.clone(),
            right: fns.right.clone(),
            left: Some(Arc::new(left)),
            second: fns.second.clone(),
        })
    }

    /// Supplies `φ″`, enabling analytic mixed partials of composed costs.
    pub fn with_second_derivative<S>(self, second: S) -> Self
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.map_custom(|fns| CustomFns {
            value: fns.value.clone(),
            right: fns.right.clone(),
            left: fns.left.clone(),
            second: Some(Arc::new(second)),
        })
    }

    fn map_custom(mut self, f: impl FnOnce(&CustomFns) -> CustomFns) -> Self {
        if let Kind::Custom(fns) = &self.kind {
            self.kind = Kind::Custom(Arc::new(f(fns)));
        }
        self
    }

    /// Overrides the numerically extrapolated boundary limits.
    pub fn with_boundaries(mut self, lower: Option<Boundary>, upper: Option<Boundary>) -> Self {
        if self.lower.is_finite() {
            self.lower_boundary = lower;
        }
        if self.upper.is_finite() {
            self.upper_boundary = upper;
        }
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Domain endpoints `(a, b)`; either may be infinite.
    pub fn domain(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn lower_boundary(&self) -> Option<Boundary> {
        self.lower_boundary
    }

    pub fn upper_boundary(&self) -> Option<Boundary> {
        self.upper_boundary
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, Kind::Custom(_))
    }

    /// Whether `φ` is continuously differentiable on the whole domain.
    pub fn is_smooth(&self) -> bool {
        match &self.kind {
            Kind::TotalVariation => false,
            Kind::Custom(fns) => fns.left.is_none(),
            _ => true,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.lower && t < self.upper
    }

    fn check_interior(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{t} is outside ]{}, {}[ of {}", self.lower, self.upper, self.name)))
        }
    }

    fn finite(&self, what: &str, t: f64, x: f64) -> Result<f64> {
        if x.is_nan() {
            Err(Error::NonFinite(format!("{} of {} at {t} is NaN", what, self.name)))
        } else {
            Ok(x)
        }
    }

    /// `φ(t)` for interior `t`.
    pub fn value(&self, t: f64) -> Result<f64> {
        self.check_interior(t)?;
        self.finite("value", t, self.raw_value(t))
    }

    pub fn right_derivative(&self, t: f64) -> Result<f64> {
        self.check_interior(t)?;
        self.finite("right derivative", t, self.raw_right(t))
    }

    pub fn left_derivative(&self, t: f64) -> Result<f64> {
        self.check_interior(t)?;
        self.finite("left derivative", t, self.raw_left(t))
    }

    /// `φ″(t)` where a closed form is known.
    pub fn second_derivative(&self, t: f64) -> Option<f64> {
        if !self.contains(t) {
            return None;
        }
        match &self.kind {
            Kind::Power(g) => Some(t.powf(g - 2.0)),
            Kind::KullbackLeibler => Some(1.0 / t),
            Kind::ReverseKullbackLeibler => Some(1.0 / (t * t)),
            Kind::TotalVariation => None,
            Kind::Quadratic => Some(1.0),
            Kind::Quartic => Some(12.0 * t * t),
            Kind::Custom(fns) => fns.second.as_ref().map(|f| f(t)),
        }
    }

    /// `φ′₊,c(t) = c·φ′₊(t) + (1 − c)·φ′₋(t)`.
    pub fn mixed_subderivative(&self, c: f64, t: f64) -> Result<f64> {
        check_mixing(c)?;
        self.check_interior(t)?;
        let d = self.raw_mixed(c, t);
        self.finite("subderivative", t, d)
    }

    /// `φ̄(t)` on the closed domain `[a,b]`.
    pub fn extended_value(&self, t: f64) -> Result<f64> {
        if self.contains(t) {
            return self.value(t);
        }
        self.boundary_at(t)
            .map(|b| b.value)
            .ok_or_else(|| Error::Domain(format!("{t} is outside [{}, {}] of {}", self.lower, self.upper, self.name)))
    }

    fn boundary_at(&self, t: f64) -> Option<Boundary> {
        if t == self.lower {
            self.lower_boundary
        } else if t == self.upper {
            self.upper_boundary
        } else {
            None
        }
    }

    pub(crate) fn raw_value(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Power(g) => (t.powf(*g) - g * t + g - 1.0) / (g * (g - 1.0)),
            Kind::KullbackLeibler => t * t.ln() - t + 1.0,
            Kind::ReverseKullbackLeibler => -t.ln() + t - 1.0,
            Kind::TotalVariation => (t - 1.0).abs(),
            Kind::Quadratic => 0.5 * (t - 1.0) * (t - 1.0),
            Kind::Quartic => t.powi(4),
            Kind::Custom(fns) => (fns.value)(t),
        }
    }

    pub(crate) fn raw_right(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Power(g) => (t.powf(g - 1.0) - 1.0) / (g - 1.0),
            Kind::KullbackLeibler => t.ln(),
            Kind::ReverseKullbackLeibler => 1.0 - 1.0 / t,
            Kind::TotalVariation => {
                if t >= 1.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Kind::Quadratic => t - 1.0,
            Kind::Quartic => 4.0 * t.powi(3),
            Kind::Custom(fns) => (fns.right)(t),
        }
    }

    pub(crate) fn raw_left(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::TotalVariation => {
                if t > 1.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Kind::Custom(fns) => match &fns.left {
                Some(left) => left(t),
                None => (fns.right)(t),
            },
            _ => self.raw_right(t),
        }
    }

    pub(crate) fn raw_mixed(&self, c: f64, t: f64) -> f64 {
        let right = self.raw_right(t);
        if self.is_smooth() {
            return right;
        }
        let left = self.raw_left(t);
        if right == left {
            right
        } else {
            c * right + (1.0 - c) * left
        }
    }

    /// The extended kernel `ψ̄_{φ,c}(s,t)` on `[a,b]²`.
    pub fn kernel(&self, c: f64, s: f64, t: f64) -> Result<f64> {
        self.kernel_traced(c, s, t).map(|(v, _)| v)
    }

    /// Like [`Generator::kernel`], also reporting which branch was used.
    pub fn kernel_traced(&self, c: f64, s: f64, t: f64) -> Result<(f64, Convention)> {
        check_mixing(c)?;
        for x in [s, t] {
            if !(x.is_finite() && x >= self.lower && x <= self.upper) {
                return Err(Error::Domain(format!(
                    "kernel argument {x} is outside [{}, {}] of {}",
                    self.lower, self.upper, self.name
                )));
            }
        }
        let s_in = self.contains(s);
        let t_in = self.contains(t);
        let (value, convention) = match (s_in, t_in) {
            (true, true) => (self.interior_kernel(c, s, t)?, Convention::Interior),
            (false, true) => {
                let b = self.boundary_at(s).expect("finite endpoint has a boundary");
                let convention = if s == self.lower { Convention::FirstAtLower } else { Convention::FirstAtUpper };
                let v = if b.value == f64::INFINITY {
                    f64::INFINITY
                } else {
                    let phi_t = self.finite("value", t, self.raw_value(t))?;
                    let d = self.finite("subderivative", t, self.raw_mixed(c, t))?;
                    self.settle(b.value - phi_t - d * (s - t), s, t)?
                };
                (v, convention)
            }
            (true, false) => {
                let b = self.boundary_at(t).expect("finite endpoint has a boundary");
                let at_lower = t == self.lower;
                let convention = if at_lower { Convention::SecondAtLower } else { Convention::SecondAtUpper };
                // An infinite slope toward the outside makes the tangent vertical.
                let vertical = if at_lower { b.slope == f64::NEG_INFINITY } else { b.slope == f64::INFINITY };
                let v = if vertical {
                    f64::INFINITY
                } else {
                    let phi_s = self.finite("value", s, self.raw_value(s))?;
                    self.settle(phi_s - b.value - b.slope * (s - t), s, t)?
                };
                (v, convention)
            }
            (false, false) => {
                if s == t {
                    let convention = if s == self.lower { Convention::DiagonalLower } else { Convention::DiagonalUpper };
                    (0.0, convention)
                } else {
                    let bs = self.boundary_at(s).expect("finite endpoint");
                    let bt = self.boundary_at(t).expect("finite endpoint");
                    let (convention, vertical) = if s == self.lower {
                        (Convention::LowerUpper, bt.slope == f64::INFINITY)
                    } else {
                        (Convention::UpperLower, bt.slope == f64::NEG_INFINITY)
                    };
                    let v = if vertical || bs.value == f64::INFINITY {
                        f64::INFINITY
                    } else {
                        self.settle(bs.value - bt.value - bt.slope * (s - t), s, t)?
                    };
                    (v, convention)
                }
            }
        };
        Ok((value, convention))
    }

    /// Kernel on possibly indeterminate ratios.
    pub fn kernel_args(&self, c: f64, s: KernelArg, t: KernelArg) -> Result<(f64, Convention)> {
        match (s, t) {
            (KernelArg::Finite(s), KernelArg::Finite(t)) => self.kernel_traced(c, s, t),
            (KernelArg::ZeroOverZero, KernelArg::ZeroOverZero) => Ok((0.0, Convention::ZeroOverZero)),
            _ => Err(Error::Domain("only the pair (0/0, 0/0) has a kernel convention".into())),
        }
    }

    fn interior_kernel(&self, c: f64, s: f64, t: f64) -> Result<f64> {
        if s == t {
            return Ok(0.0);
        }
        let phi_s = self.finite("value", s, self.raw_value(s))?;
        let phi_t = self.finite("value", t, self.raw_value(t))?;
        let d = self.finite("subderivative", t, self.raw_mixed(c, t))?;
        let psi = phi_s - phi_t - d * (s - t);
        let scale = phi_s.abs() + phi_t.abs() + (d * (s - t)).abs();
        if psi < 0.0 && psi < -64.0 * f64::EPSILON * scale {
            return Err(Error::Precondition(format!(
                "{} is not convex between {s} and {t} (kernel {psi})",
                self.name
            )));
        }
        Ok(psi.max(0.0))
    }

    fn settle(&self, psi: f64, s: f64, t: f64) -> Result<f64> {
        if psi.is_nan() {
            return Err(Error::NonFinite(format!("kernel of {} at ({s}, {t}) is NaN", self.name)));
        }
        if psi < -1e-9 * (1.0 + s.abs() + t.abs()) {
            return Err(Error::Precondition(format!(
                "{} boundary limits give a negative kernel at ({s}, {t}): {psi}",
                self.name
            )));
        }
        Ok(psi.max(0.0))
    }
}

fn check_mixing(c: f64) -> Result<()> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::Domain(format!("subderivative weight c = {c} is outside [0,1]")))
    }
}

impl FromStr for Generator {
    type Err = Error;

    /// `power:gamma=2`, `kl`, `revkl`, `tv`, `quadratic`, `quartic`.
    fn from_str(spec: &str) -> Result<Self> {
        match spec.trim() {
            "kl" => Ok(Self::kullback_leibler()),
            "revkl" => Ok(Self::reverse_kullback_leibler()),
            "tv" => Ok(Self::total_variation()),
            "quadratic" => Ok(Self::quadratic()),
            "quartic" => Ok(Self::quartic()),
            other => {
                let gamma = other
                    .strip_prefix("power:gamma=")
                    .ok_or_else(|| Error::Parse(format!("unknown generator `{other}`")))?;
                let gamma: f64 = gamma
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("`{gamma}` is not a number")))?;
                Self::power(gamma)
            }
        }
    }
}
