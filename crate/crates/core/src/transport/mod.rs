//! One-dimensional optimal transport under quasi-antitone costs.
//!
//! The comonotone coupling pairs equal quantile levels of the two marginals.
//! For quasi-antitone costs its cost equals the quantile divergence and the
//! transport minimum; [`verify_theorem1`] checks this against exhaustive and
//! dual oracles, and [`MongeMap`] gives the deterministic map for atomless
//! sources.

mod dual;
mod monge;
mod oracle;
mod theorem;

use serde::Serialize;

use crate::cost::CostFunction;
use crate::distributions::Distribution;
use crate::divergence::merged_cells;
use crate::error::{Error, Result};

pub use dual::{lp_lower_bound_check, CertificateReport, DEFAULT_DUAL_ITERATIONS};
pub use monge::{MongeMap, PushforwardReport, TransportCost};
pub use oracle::{brute_force_min, BruteForceMinimum, MAX_BRUTE_FORCE_ATOMS};
pub use theorem::{
    random_instance, verify_instance, verify_theorem1, Instance, InstanceCheck, Oracle, TheoremConfig, TheoremFailure, TheoremReport,
    Tolerances,
};

/// Marginal and comonotonicity checks use this absolute tolerance.
pub const MASS_TOL: f64 = 1e-12;

/// A transport plan between two discrete laws: `plan[i][j]` is the mass moved
/// from `u_atoms[i]` to `v_atoms[j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    #[serde(serialize_with = "crate::report::float")]
    pub u_atoms: Vec<f64>,
    #[serde(serialize_with = "crate::report::float")]
    pub v_atoms: Vec<f64>,
    #[serde(serialize_with = "crate::report::float")]
    pub plan: Vec<Vec<f64>>,
}

impl Coupling {
    /// A plan with explicit masses; atoms must be sorted.
    pub fn new(u_atoms: Vec<f64>, v_atoms: Vec<f64>, plan: Vec<Vec<f64>>) -> Result<Self> {
        if plan.len() != u_atoms.len() || plan.iter().any(|row| row.len() != v_atoms.len()) {
            return Err(Error::InvalidParameters("plan shape does not match the atoms".into()));
        }
        if plan.iter().flatten().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidParameters("plan masses must be finite and nonnegative".into()));
        }
        if !u_atoms.is_sorted() || !v_atoms.is_sorted() {
            return Err(Error::InvalidParameters("atoms must be sorted".into()));
        }
        Ok(Self { u_atoms, v_atoms, plan })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.plan.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.v_atoms.len()).map(|j| self.plan.iter().map(|row| row[j]).sum()).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.row_sums().iter().sum()
    }

    /// Whether the marginals are `p` and `q` to within [`MASS_TOL`].
    pub fn has_marginals(&self, p: &Distribution, q: &Distribution) -> bool {
        let (Some((pv, pw)), Some((qv, qw))) = (p.atoms(), q.atoms()) else {
            return false;
        };
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= MASS_TOL);
        pv == self.u_atoms.as_slice()
            && qv == self.v_atoms.as_slice()
            && close(&self.row_sums(), pw)
            && close(&self.column_sums(), qw)
    }

    /// Whether the joint cdf equals `min{F_p(u), F_q(v)}` at every atom pair.
    pub fn is_comonotone(&self) -> bool {
        let row_cum: Vec<f64> = self.row_sums().iter().scan(0.0, |s, m| { *s += m; Some(*s) }).collect();
        let col_cum: Vec<f64> = self.column_sums().iter().scan(0.0, |s, m| { *s += m; Some(*s) }).collect();
        let m = self.v_atoms.len();
        let mut above = vec![0.0; m];
        for (i, row) in self.plan.iter().enumerate() {
            let mut running = 0.0;
            for j in 0..m {
                running += row[j];
                above[j] += running;
                if (above[j] - row_cum[i].min(col_cum[j])).abs() > MASS_TOL {
                    return false;
                }
            }
        }
        true
    }
}

/// The comonotone coupling of two discrete laws: the north-west-corner plan
/// obtained by matching cumulative weights.
pub fn comonotone_coupling(p: &Distribution, q: &Distribution) -> Result<Coupling> {
    let (Some((pv, _)), Some((qv, _))) = (p.atoms(), q.atoms()) else {
        return Err(Error::Unsupported("comonotone coupling of non-discrete laws; use the Monge map instead".into()));
    };
    let mut plan = vec![vec![0.0; qv.len()]; pv.len()];
    for cell in merged_cells(p, q)? {
        plan[cell.i][cell.j] += cell.length;
    }
    Ok(Coupling { u_atoms: pv.to_vec(), v_atoms: qv.to_vec(), plan })
}

/// `Σ plan[i][j] · Υ̅(u_i, v_j)`; cells without mass contribute nothing.
pub fn coupling_cost(coupling: &Coupling, cf: &CostFunction) -> Result<f64> {
    let mut total = 0.0;
    for (row, &u) in coupling.plan.iter().zip(&coupling.u_atoms) {
        for (&mass, &v) in row.iter().zip(&coupling.v_atoms) {
            if mass > 0.0 {
                total += mass * cf.evaluate(u, v)?;
            }
        }
    }
    Ok(total)
}
