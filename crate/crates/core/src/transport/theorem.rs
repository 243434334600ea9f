//! Randomized verification that comonotone cost, quantile divergence and the
//! transport minimum coincide for quasi-antitone costs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{brute_force_min, comonotone_coupling, coupling_cost, lp_lower_bound_check, DEFAULT_DUAL_ITERATIONS, MAX_BRUTE_FORCE_ATOMS};
use crate::cost::{quasi_antitone_quadruple_test, CostFunction, ScalingPair};
use crate::distributions::{open_unit, Distribution};
use crate::divergence::{divergence_exact_discrete, DivergenceSpec};
use crate::error::{Error, Result};
use crate::generators::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Bound on `|A − B|` (comonotone cost against exact divergence).
    #[serde(serialize_with = "crate::report::float")]
    pub coupling_vs_divergence: f64,
    /// Bound on `|A − C|` (comonotone cost against the oracle minimum).
    #[serde(serialize_with = "crate::report::float")]
    pub coupling_vs_minimum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { coupling_vs_divergence: 1e-10, coupling_vs_minimum: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremConfig {
    pub trials: usize,
    pub seed: u64,
    /// Instances have between 1 and `max_atoms` atoms per side.
    pub max_atoms: usize,
    /// Equal weights (brute-force oracle) or Dirichlet weights (dual oracle).
    pub equal_weights: bool,
    pub tolerances: Tolerances,
    /// Run even if the quadruple test finds the cost is not quasi-antitone.
    pub force: bool,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        Self { trials: 100, seed: 0, max_atoms: 7, equal_weights: true, tolerances: Tolerances::default(), force: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    BruteForce,
    DualCertificate,
}

/// The three quantities compared on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceCheck {
    /// Comonotone coupling cost.
    #[serde(rename = "A")]
    #[serde(serialize_with = "crate::report::float")]
    pub a: f64,
    /// Exact quantile divergence.
    #[serde(rename = "B")]
    #[serde(serialize_with = "crate::report::float")]
    pub b: f64,
    /// Oracle minimum (or dual lower bound).
    #[serde(rename = "C")]
    #[serde(serialize_with = "crate::report::float")]
    pub c: f64,
    pub oracle: Oracle,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    #[serde(serialize_with = "crate::report::float")]
    pub p_atoms: Vec<f64>,
    #[serde(serialize_with = "crate::report::float")]
    pub p_weights: Vec<f64>,
    #[serde(serialize_with = "crate::report::float")]
    pub q_atoms: Vec<f64>,
    #[serde(serialize_with = "crate::report::float")]
    pub q_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremFailure {
    /// Regenerates the instance through [`random_instance`].
    pub seed: u64,
    pub instance: Instance,
    #[serde(rename = "A")]
    #[serde(serialize_with = "crate::report::float")]
    pub a: f64,
    #[serde(rename = "B")]
    #[serde(serialize_with = "crate::report::float")]
    pub b: f64,
    #[serde(rename = "C")]
    #[serde(serialize_with = "crate::report::float")]
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub cost: String,
    pub trials: usize,
    pub passes: usize,
    pub failures: Vec<TheoremFailure>,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl TheoremReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty() && self.passes == self.trials
    }
}

/// Compares comonotone cost (A), exact divergence (B) and the oracle
/// minimum (C) on one discrete pair.
pub fn verify_instance(p: &Distribution, q: &Distribution, cf: &CostFunction, tol: &Tolerances) -> Result<InstanceCheck> {
    let a = coupling_cost(&comonotone_coupling(p, q)?, cf)?;
    let b = divergence_exact_discrete(&DivergenceSpec::new(p.clone(), q.clone(), cf.clone()))?.value;
    let (c, oracle) = match brute_force_min(p, q, cf) {
        Ok(min) => (min.min_cost, Oracle::BruteForce),
        Err(Error::Unsupported(_)) => {
            (lp_lower_bound_check(p, q, cf, 0, DEFAULT_DUAL_ITERATIONS)?.lower_bound, Oracle::DualCertificate)
        }
        Err(e) => return Err(e),
    };
    let close = |x: f64, y: f64, t: f64| x == y || (x - y).abs() <= t;
    let passed = close(a, b, tol.coupling_vs_divergence) && close(a, c, tol.coupling_vs_minimum);
    Ok(InstanceCheck { a, b, c, oracle, passed })
}

/// Range from which random atoms are drawn for a cost family.
fn atom_range(cf: &CostFunction) -> Interval {
    match cf.scaling() {
        Some(ScalingPair::ClassicalBregman) | None => Interval::new(-10.0, 10.0),
        Some(_) => Interval::new(0.5, 10.0),
    }
}

fn mix(seed: u64, k: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A random discrete pair for `cf`. With `equal_weights` both sides share
/// the same atom count; otherwise weights are Dirichlet(1, …, 1).
pub fn random_instance(cf: &CostFunction, seed: u64, max_atoms: usize, equal_weights: bool) -> Result<(Distribution, Distribution)> {
    if max_atoms == 0 {
        return Err(Error::Domain("instances need at least one atom".into()));
    }
    let range = atom_range(cf);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_p = rng.random_range(1..=max_atoms);
    let n_q = if equal_weights { n_p } else { rng.random_range(1..=max_atoms) };
    let mut side = |n: usize| -> Result<Distribution> {
        let atoms: Vec<f64> = (0..n).map(|_| rng.random_range(range.lo..range.hi)).collect();
        if equal_weights {
            Distribution::empirical(&atoms)
        } else {
            let raw: Vec<f64> = (0..n).map(|_| -open_unit(&mut rng).ln()).collect();
            let total: f64 = raw.iter().sum();
            let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let rest: f64 = weights[..n - 1].iter().sum();
            weights[n - 1] = 1.0 - rest;
            Distribution::discrete(&atoms, &weights)
        }
    };
    let p = side(n_p)?;
    let q = side(n_q)?;
    Ok((p, q))
}

/// Checks `A = B = C` on `config.trials` random instances. Costs that fail
/// the quadruple test on the atom range are refused unless `config.force`.
pub fn verify_theorem1(cf: &CostFunction, config: &TheoremConfig) -> Result<TheoremReport> {
    if config.max_atoms > MAX_BRUTE_FORCE_ATOMS && config.equal_weights {
        return Err(Error::Unsupported(format!("equal-weight instances are limited to {MAX_BRUTE_FORCE_ATOMS} atoms")));
    }
    if !config.force {
        let range = atom_range(cf);
        let evidence = quasi_antitone_quadruple_test(cf, range, range, 16, config.seed, 2000)?;
        if !evidence.verdict.passed() {
            return Err(Error::Precondition(format!(
                "{} is not quasi-antitone on [{}, {}]²: margin {:.3e} at {:?}",
                cf.name(),
                range.lo,
                range.hi,
                evidence.worst_margin,
                evidence.witness.unwrap_or_default()
            )));
        }
    }
    let outcomes: Vec<Option<TheoremFailure>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|k| {
            let seed = mix(config.seed, k);
            let (p, q) = random_instance(cf, seed, config.max_atoms, config.equal_weights)?;
            let check = verify_instance(&p, &q, cf, &config.tolerances)?;
            if check.passed {
                return Ok(None);
            }
            let (pv, pw) = p.atoms().expect("discrete");
            let (qv, qw) = q.atoms().expect("discrete");
            Ok(Some(TheoremFailure {
                seed,
                instance: Instance { p_atoms: pv.to_vec(), p_weights: pw.to_vec(), q_atoms: qv.to_vec(), q_weights: qw.to_vec() },
                a: check.a,
                b: check.b,
                c: check.c,
            }))
        })
        .collect::<Result<_>>()?;
    let failures: Vec<TheoremFailure> = outcomes.into_iter().flatten().collect();
    Ok(TheoremReport {
        cost: cf.name(),
        trials: config.trials,
        passes: config.trials - failures.len(),
        failures,
        tolerances: config.tolerances,
        seed: config.seed,
    })
}
