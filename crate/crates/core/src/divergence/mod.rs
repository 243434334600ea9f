//! The directed distance between quantile functions,
//! `D(p, q) = ∫₀¹ Υ̅(F_p←(x), F_q←(x)) dx`.
//!
//! Discrete pairs are evaluated exactly by merging the cumulative-weight
//! breakpoints of both laws. Everything else goes through adaptive quadrature,
//! with Monte Carlo available as an independent check.

mod properties;
mod quadrature;

use std::sync::atomic::{AtomicU16, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cost::CostFunction;
use crate::distributions::{open_unit, Distribution};
use crate::error::{Error, Result};
use crate::generators::Convention;

pub use properties::{check_divergence_properties, Asymmetry, ConverseProbe, PropertyReport, ReflexivityCheck};
pub use quadrature::QuadratureOptions;
pub(crate) use quadrature::integrate_unit;

/// Smallest sample size accepted by [`divergence_monte_carlo`].
pub const MIN_MONTE_CARLO_SAMPLES: usize = 100;

/// A pair of laws and the cost that compares their quantiles.
#[derive(Debug, Clone)]
pub struct DivergenceSpec {
    pub p: Distribution,
    pub q: Distribution,
    pub cost: CostFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactBreakpoint,
    AdaptiveQuadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceResult {
    /// `D ∈ [0, ∞]`.
    #[serde(serialize_with = "crate::report::float")]
    pub value: f64,
    pub method: Method,
    #[serde(serialize_with = "crate::report::float")]
    pub error_estimate: f64,
    /// Integrand evaluations (cells for the exact method).
    pub nodes_used: usize,
    /// Boundary conventions of the extended kernel that were hit, in order.
    pub conventions_triggered: Vec<Convention>,
}

impl DivergenceSpec {
    pub fn new(p: Distribution, q: Distribution, cost: CostFunction) -> Self {
        Self { p, q, cost }
    }

    /// The same cost with the roles of `p` and `q` exchanged.
    pub fn swapped(&self) -> Self {
        Self { p: self.q.clone(), q: self.p.clone(), cost: self.cost.clone() }
    }

    /// Checks that the quantile ranges, clipped at `clip_eps`, lie in the cost domain.
    fn check_ranges(&self, clip_eps: f64) -> Result<()> {
        let domain = self.cost.domain();
        for (label, law, range) in [("p", &self.p, domain.u), ("q", &self.q, domain.v)] {
            let probes: Vec<(f64, f64)> = match law.atoms() {
                Some((values, _)) => {
                    let levels = law.quantile_breakpoints()?;
                    values.iter().zip(levels).map(|(v, (c, _))| (c, *v)).collect()
                }
                None => [clip_eps, 1.0 - clip_eps].iter().map(|&x| (x, law.quantile_unchecked(x))).collect(),
            };
            if let Some((x, z)) = probes.into_iter().find(|(_, z)| *z < range.lo || *z > range.hi) {
                return Err(Error::Domain(format!(
                    "F_{label}←({x}) = {z} lies outside [{}, {}], the domain of {}",
                    range.lo,
                    range.hi,
                    self.cost.name()
                )));
            }
        }
        Ok(())
    }

    /// The integrand `x ↦ Υ̅(F_p←(x), F_q←(x))`.
    fn integrand(&self, x: f64) -> Result<(f64, Convention)> {
        let u = self.p.quantile_unchecked(x);
        let v = self.q.quantile_unchecked(x);
        self.cost.evaluate_traced(u, v)
    }
}

/// Records conventions from concurrent integrand calls.
#[derive(Default)]
struct ConventionSet(AtomicU16);

impl ConventionSet {
    fn insert(&self, c: Convention) {
        if c != Convention::Interior {
            self.0.fetch_or(1 << c as u16, Ordering::Relaxed);
        }
    }

    fn into_vec(self) -> Vec<Convention> {
        let bits = self.0.into_inner();
        Convention::ALL.into_iter().filter(|c| bits & (1 << *c as u16) != 0).collect()
    }
}

/// One cell of the merged breakpoint partition: `]start, end]` with
/// `F_p← ≡ p_values[i]` and `F_q← ≡ q_values[j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cell {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

/// Merges the cumulative weights of two discrete laws into cells of positive length.
pub(crate) fn merged_cells(p: &Distribution, q: &Distribution) -> Result<Vec<Cell>> {
    let bp = p.quantile_breakpoints()?;
    let bq = q.quantile_breakpoints()?;
    let (mut i, mut j) = (0, 0);
    let mut start = 0.0;
    let mut cells = Vec::with_capacity(bp.len() + bq.len());
    while i < bp.len() && j < bq.len() {
        let end = bp[i].0.min(bq[j].0);
        if end > start {
            cells.push(Cell { i, j, length: end - start });
            start = end;
        }
        if bp[i].0 <= end {
            i += 1;
        }
        if bq[j].0 <= end {
            j += 1;
        }
    }
    Ok(cells)
}

/// Exact `D` for two discrete laws: the integrand is constant on every cell
/// of the merged breakpoint partition.
pub fn divergence_exact_discrete(spec: &DivergenceSpec) -> Result<DivergenceResult> {
    let (Some((pv, _)), Some((qv, _))) = (spec.p.atoms(), spec.q.atoms()) else {
        return Err(Error::Unsupported("exact evaluation needs two discrete laws".into()));
    };
    spec.check_ranges(0.0)?;
    let cells = merged_cells(&spec.p, &spec.q)?;
    let seen = ConventionSet::default();
    let mut value = 0.0;
    for cell in &cells {
        let (cost, convention) = spec.cost.evaluate_traced(pv[cell.i], qv[cell.j])?;
        seen.insert(convention);
        value += if cost == 0.0 { 0.0 } else { cell.length * cost };
    }
    Ok(DivergenceResult {
        value,
        method: Method::ExactBreakpoint,
        error_estimate: 0.0,
        nodes_used: cells.len(),
        conventions_triggered: seen.into_vec(),
    })
}

/// `D` by adaptive Gauss–Legendre quadrature. Breakpoints of discrete
/// marginals are used as panel edges. A non-integrable integrand yields
/// `value = +∞`.
pub fn divergence_quadrature(spec: &DivergenceSpec, opts: &QuadratureOptions) -> Result<DivergenceResult> {
    opts.validate()?;
    spec.check_ranges(opts.clip_eps)?;
    let mut forced: Vec<f64> = Vec::new();
    for law in [&spec.p, &spec.q] {
        if law.is_discrete() {
            forced.extend(law.quantile_breakpoints()?.iter().map(|(c, _)| *c).filter(|c| *c < 1.0));
        }
    }
    forced.sort_by(f64::total_cmp);
    forced.dedup();
    let seen = ConventionSet::default();
    let integrand = |x: f64| {
        let (value, convention) = spec.integrand(x)?;
        seen.insert(convention);
        Ok(value)
    };
    let outcome = quadrature::integrate_unit(&integrand, &forced, opts)?;
    Ok(DivergenceResult {
        value: outcome.value.max(0.0),
        method: Method::AdaptiveQuadrature,
        error_estimate: outcome.error,
        nodes_used: outcome.nodes,
        conventions_triggered: seen.into_vec(),
    })
}

/// `D = E[Υ̅(F_p←(U), F_q←(U))]` estimated from `n` uniform draws; the error
/// estimate is the standard error of the mean.
pub fn divergence_monte_carlo(spec: &DivergenceSpec, n: usize, seed: u64) -> Result<DivergenceResult> {
    if n < MIN_MONTE_CARLO_SAMPLES {
        return Err(Error::Domain(format!("Monte Carlo needs n ≥ {MIN_MONTE_CARLO_SAMPLES}, got {n}")));
    }
    spec.check_ranges(f64::EPSILON)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seen = ConventionSet::default();
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 0..n {
        let (y, convention) = spec.integrand(open_unit(&mut rng))?;
        seen.insert(convention);
        if y.is_infinite() {
            mean = f64::INFINITY;
            m2 = 0.0;
            break;
        }
        let delta = y - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (y - mean);
    }
    let variance = if n > 1 && mean.is_finite() { m2 / (n - 1) as f64 } else { 0.0 };
    Ok(DivergenceResult {
        value: mean,
        method: Method::MonteCarlo,
        error_estimate: (variance / n as f64).sqrt(),
        nodes_used: n,
        conventions_triggered: seen.into_vec(),
    })
}

/// Exact evaluation for discrete pairs, quadrature otherwise.
pub fn divergence(spec: &DivergenceSpec, opts: &QuadratureOptions) -> Result<DivergenceResult> {
    if spec.p.is_discrete() && spec.q.is_discrete() {
        divergence_exact_discrete(spec)
    } else {
        divergence_quadrature(spec, opts)
    }
}
