//! Exhaustive minimum over bijections for small equal-weight instances.

use itertools::Itertools;
use serde::Serialize;

use crate::cost::CostFunction;
use crate::distributions::Distribution;
use crate::error::{Error, Result};

/// `8! = 40320` assignments.
pub const MAX_BRUTE_FORCE_ATOMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceMinimum {
    /// Mean cost of the best assignment.
    #[serde(serialize_with = "crate::report::float")]
    pub min_cost: f64,
    /// `u_atoms[i]` is sent to `v_atoms[permutation[i]]`.
    pub permutation: Vec<usize>,
}

/// Minimum of `(1/n) Σ Υ̅(u_i, v_σ(i))` over all permutations `σ`.
///
/// Both laws need the same number `n ≤ 8` of equally weighted atoms; for
/// equal weights the transport optimum is attained at a permutation. Ties go
/// to the first permutation in lexicographic order.
pub fn brute_force_min(p: &Distribution, q: &Distribution, cf: &CostFunction) -> Result<BruteForceMinimum> {
    let (Some((pv, pw)), Some((qv, qw))) = (p.atoms(), q.atoms()) else {
        return Err(Error::Unsupported("brute force needs two discrete laws".into()));
    };
    let n = pv.len();
    if qv.len() != n || n > MAX_BRUTE_FORCE_ATOMS {
        return Err(Error::Unsupported(format!(
            "brute force needs the same number (at most {MAX_BRUTE_FORCE_ATOMS}) of atoms on both sides, got {n} and {}",
            qv.len()
        )));
    }
    let equal = |w: &[f64]| w.iter().all(|x| (x - 1.0 / n as f64).abs() <= 1e-12);
    if !equal(pw) || !equal(qw) {
        return Err(Error::Unsupported("brute force needs equal weights; use the dual certificate".into()));
    }
    let costs: Vec<Vec<f64>> = pv
        .iter()
        .map(|&u| qv.iter().map(|&v| cf.evaluate(u, v)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    let mut best = BruteForceMinimum { min_cost: f64::INFINITY, permutation: (0..n).collect() };
    for sigma in (0..n).permutations(n) {
        let total: f64 = sigma.iter().enumerate().map(|(i, &j)| costs[i][j]).sum();
        let mean = total / n as f64;
        if mean < best.min_cost {
            best = BruteForceMinimum { min_cost: mean, permutation: sigma };
        }
    }
    Ok(best)
}
