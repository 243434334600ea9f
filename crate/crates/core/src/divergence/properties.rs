//! Sampled checks of nonnegativity, reflexivity and asymmetry.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{divergence, DivergenceSpec, Method, QuadratureOptions};
use crate::cost::CostKindRef;
use crate::distributions::open_unit;
use crate::error::{Error, Result};
use crate::generators::{validate_generator, Interval};

const PROBE_GRID: usize = 99;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReflexivityCheck {
    #[serde(serialize_with = "crate::report::float")]
    pub d_pp: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub d_qq: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub tolerance: f64,
    pub passed: bool,
}

/// `D(p,q) < tolerance` must force `max |F_p← − F_q←| < epsilon` on the probes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseProbe {
    #[serde(serialize_with = "crate::report::float")]
    pub divergence: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub tolerance: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub max_quantile_gap: f64,
    /// Probe level where the largest gap occurs.
    #[serde(serialize_with = "crate::report::float")]
    pub at_level: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub epsilon: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Asymmetry {
    #[serde(serialize_with = "crate::report::float")]
    pub d_pq: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub d_qp: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub passed: bool,
    pub nonnegativity: bool,
    /// Smallest integrand value over the probe levels.
    #[serde(serialize_with = "crate::report::float")]
    pub min_integrand: f64,
    pub reflexivity: ReflexivityCheck,
    pub converse: ConverseProbe,
    pub asymmetry: Asymmetry,
    pub probes: usize,
}

/// Rejects costs whose generator or scaling fails the validity conditions on
/// the ratios actually reached by the probe pairs.
fn check_preconditions(spec: &DivergenceSpec, pairs: &[(f64, f64)]) -> Result<()> {
    let CostKindRef::Composed { generator, c, scaling } = spec.cost.kind_ref() else {
        return Ok(());
    };
    let problems = scaling.check(pairs.iter().copied());
    if !problems.is_empty() {
        return Err(Error::Precondition(format!("scaling {}: {}", scaling.name(), problems.join("; "))));
    }
    let (a, b) = generator.domain();
    let hull = |values: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = values
            .filter(|r| r.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
        Interval::new(lo.max(a), hi.min(b))
    };
    let ratios: Vec<(f64, f64)> = pairs
        .iter()
        .filter_map(|&(u, v)| {
            let w = scaling.w(u, v);
            (w != 0.0).then(|| (u / w, v / w))
        })
        .collect();
    let s = hull(&mut ratios.iter().map(|r| r.0));
    let t = hull(&mut ratios.iter().map(|r| r.1));
    if s.is_empty() || t.is_empty() {
        return Ok(());
    }
    let report = validate_generator(generator, c, s, t)?;
    if !report.usable {
        let names: Vec<String> = report.violated_conditions().iter().map(|c| format!("{c:?}")).collect();
        let detail = report.violations.first().map(|v| v.detail.clone()).unwrap_or_default();
        return Err(Error::Precondition(format!(
            "{} violates condition(s) {} on the reached ratios: {detail}",
            spec.cost.name(),
            names.join(", ")
        )));
    }
    Ok(())
}

/// Checks nonnegativity and reflexivity of `D` for `spec`, probes the
/// converse direction of reflexivity on a fixed grid plus `trials` random
/// levels, and reports `D(p,q)` against `D(q,p)`.
pub fn check_divergence_properties(
    spec: &DivergenceSpec,
    trials: usize,
    seed: u64,
    opts: &QuadratureOptions,
) -> Result<PropertyReport> {
    let mut levels: Vec<f64> = (1..=PROBE_GRID).map(|k| k as f64 / (PROBE_GRID + 1) as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    levels.extend((0..trials).map(|_| open_unit(&mut rng)));
    let pairs: Vec<(f64, f64)> = levels.iter().map(|&x| (spec.p.quantile_unchecked(x), spec.q.quantile_unchecked(x))).collect();
    check_preconditions(spec, &pairs)?;

    let mut min_integrand = f64::INFINITY;
    let (mut gap, mut at_level) = (0.0f64, levels[0]);
    for (&x, &(u, v)) in levels.iter().zip(&pairs) {
        min_integrand = min_integrand.min(spec.cost.evaluate(u, v)?);
        if (u - v).abs() > gap {
            gap = (u - v).abs();
            at_level = x;
        }
    }

    let forward = divergence(spec, opts)?;
    let backward = divergence(&spec.swapped(), opts)?;
    let exact = forward.method == Method::ExactBreakpoint;
    let d_pp = divergence(&DivergenceSpec::new(spec.p.clone(), spec.p.clone(), spec.cost.clone()), opts)?.value;
    let d_qq = divergence(&DivergenceSpec::new(spec.q.clone(), spec.q.clone(), spec.cost.clone()), opts)?.value;

    let nonnegativity = min_integrand >= 0.0 && [forward.value, backward.value, d_pp, d_qq].iter().all(|d| *d >= 0.0);
    let re_tol = if exact { 0.0 } else { opts.abs_tol };
    let reflexivity = ReflexivityCheck {
        d_pp,
        d_qq,
        tolerance: re_tol,
        passed: if exact { d_pp == 0.0 && d_qq == 0.0 } else { d_pp < re_tol && d_qq < re_tol },
    };
    let (tolerance, epsilon) = if exact { (1e-12, 1e-6) } else { (10.0 * opts.abs_tol, 1e-3) };
    let converse = ConverseProbe {
        divergence: forward.value,
        tolerance,
        max_quantile_gap: gap,
        at_level,
        epsilon,
        passed: forward.value >= tolerance || gap < epsilon,
    };
    let asymmetry = Asymmetry {
        d_pq: forward.value,
        d_qp: backward.value,
        difference: (forward.value - backward.value).abs(),
    };
    Ok(PropertyReport {
        passed: nonnegativity && reflexivity.passed && converse.passed,
        nonnegativity,
        min_integrand,
        reflexivity,
        converse,
        asymmetry,
        probes: levels.len(),
    })
}
