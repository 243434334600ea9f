//! The monotone transport map `T(u) = F_q←(F_p(u))` for atomless sources.

use serde::Serialize;

use crate::cost::CostFunction;
use crate::distributions::{ks_statistic, Distribution};
use crate::divergence::QuadratureOptions;
use crate::error::{Error, Result};

/// Critical value of the one-sample KS test at level 1% is `1.63/√n`.
const KS_COEFFICIENT: f64 = 1.63;

#[derive(Debug, Clone)]
pub struct MongeMap {
    source: Distribution,
    target: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportCost {
    #[serde(serialize_with = "crate::report::float")]
    pub value: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub error_estimate: f64,
    pub nodes_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushforwardReport {
    pub n: usize,
    pub seed: u64,
    #[serde(serialize_with = "crate::report::float")]
    pub statistic: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub threshold: f64,
    pub passed: bool,
}

/// Maps the real line onto `]0,1[` so the quadrature's tail handling applies
/// in source space: `u = φ(t)` with Jacobian `φ′(t)`.
#[derive(Debug, Clone, Copy)]
enum Chart {
    Bounded { lo: f64, hi: f64 },
    Lower { lo: f64, scale: f64 },
    Upper { hi: f64, scale: f64 },
    Line { centre: f64, scale: f64 },
}

impl Chart {
    fn for_law(law: &Distribution) -> Self {
        let (lo, hi) = (law.support_lower_bound(), law.support_upper_bound());
        let scale = (law.quantile_unchecked(0.75) - law.quantile_unchecked(0.25)).max(f64::MIN_POSITIVE);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => Chart::Bounded { lo, hi },
            (true, false) => Chart::Lower { lo, scale },
            (false, true) => Chart::Upper { hi, scale },
            (false, false) => Chart::Line { centre: law.quantile_unchecked(0.5), scale },
        }
    }

    /// `(u, du/dt)`.
    fn point(self, t: f64) -> (f64, f64) {
        match self {
            Chart::Bounded { lo, hi } => (lo + (hi - lo) * t, hi - lo),
            Chart::Lower { lo, scale } => (lo + scale * t / (1.0 - t), scale / ((1.0 - t) * (1.0 - t))),
            Chart::Upper { hi, scale } => (hi - scale * (1.0 - t) / t, scale / (t * t)),
            Chart::Line { centre, scale } => (centre + scale * (t / (1.0 - t)).ln(), scale / (t * (1.0 - t))),
        }
    }
}

impl MongeMap {
    /// The comonotone map from an atomless `source` to any `target`.
    pub fn new(source: Distribution, target: Distribution) -> Result<Self> {
        if source.is_discrete() {
            return Err(Error::Unsupported(
                "a transport map needs an atomless source; use the comonotone coupling".into(),
            ));
        }
        Ok(Self { source, target })
    }

    pub fn source(&self) -> &Distribution {
        &self.source
    }

    pub fn target(&self) -> &Distribution {
        &self.target
    }

    /// `T(u) = F_q←(F_p(u))`, with `F_p(u)` kept inside `]0,1[`.
    pub fn apply(&self, u: f64) -> f64 {
        let level = self.source.cdf(u).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        self.target.quantile_unchecked(level)
    }

    /// `∫ Υ̅(u, T(u)) dP(u)`, integrated in source space against the density.
    pub fn cost(&self, cf: &CostFunction, opts: &QuadratureOptions) -> Result<TransportCost> {
        let chart = Chart::for_law(&self.source);
        let integrand = |t: f64| -> Result<f64> {
            let (u, jacobian) = chart.point(t);
            let density = self.source.density(u).unwrap_or(0.0);
            if density == 0.0 || jacobian == 0.0 || !u.is_finite() {
                return Ok(0.0);
            }
            Ok(cf.evaluate(u, self.apply(u))? * density * jacobian)
        };
        let outcome = crate::divergence::integrate_unit(&integrand, &[], opts)?;
        Ok(TransportCost { value: outcome.value, error_estimate: outcome.error, nodes_used: outcome.nodes })
    }

    /// KS distance between `T` applied to `n` source draws and the target.
    pub fn pushforward_check(&self, n: usize, seed: u64) -> PushforwardReport {
        let mapped: Vec<f64> = self.source.sample(seed, n).into_iter().map(|u| self.apply(u)).collect();
        let statistic = ks_statistic(&mapped, &self.target);
        let threshold = KS_COEFFICIENT / (n as f64).sqrt();
        PushforwardReport { n, seed, statistic, threshold, passed: statistic < threshold }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::ScalingPair;
    use crate::divergence::{divergence_quadrature, DivergenceSpec};
    use crate::generators::Generator;

    #[test]
    fn map_examples() {
        let t = MongeMap::new(Distribution::uniform(0.0, 1.0).unwrap(), Distribution::uniform(0.0, 2.0).unwrap()).unwrap();
        assert_eq!(t.apply(0.5), 1.0);
        let e = Distribution::exponential(1.0).unwrap();
        let t = MongeMap::new(e.clone(), e).unwrap();
        for u in [0.01, 0.5, 1.0, 3.0, 10.0] {
            assert!((t.apply(u) - u).abs() < 1e-12 * (1.0 + u), "{u}");
        }
        let t = MongeMap::new(Distribution::normal(0.0, 1.0).unwrap(), Distribution::normal(1.0, 1.0).unwrap()).unwrap();
        for u in [-3.0, -1.0, 0.0, 0.7, 2.0, 3.0] {
            assert!((t.apply(u) - (u + 1.0)).abs() < 1e-8, "{u}");
        }
        assert!(MongeMap::new(Distribution::empirical(&[1.0]).unwrap(), Distribution::uniform(0.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn map_is_monotone() {
        let t = MongeMap::new(Distribution::normal(0.0, 2.0).unwrap(), Distribution::exponential(0.5).unwrap()).unwrap();
        let values: Vec<f64> = (-40..=40).map(|k| t.apply(k as f64 * 0.25)).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn cost_matches_divergence() {
        let p = Distribution::normal(0.0, 1.0).unwrap();
        let q = Distribution::normal(1.0, 2.0).unwrap();
        let cf = CostFunction::new(Generator::quadratic(), 0.5, ScalingPair::ClassicalBregman).unwrap();
        let opts = QuadratureOptions::default();
        let monge = MongeMap::new(p.clone(), q.clone()).unwrap().cost(&cf, &opts).unwrap();
        let d = divergence_quadrature(&DivergenceSpec::new(p, q, cf), &opts).unwrap();
        // ½ E[(X − (1 + 2X))²] = ½ (1 + 1) = 1
        assert!((d.value - 1.0).abs() < 1e-9, "{d:?}");
        assert!((monge.value - d.value).abs() < 10.0 * (monge.error_estimate + d.error_estimate), "{monge:?} {d:?}");
    }

    #[test]
    fn pushforward_matches_target() {
        let t = MongeMap::new(Distribution::exponential(1.0).unwrap(), Distribution::uniform(1.0, 4.0).unwrap()).unwrap();
        let r = t.pushforward_check(10_000, 4);
        assert!(r.passed, "{r:?}");
    }
}
