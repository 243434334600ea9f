//! Directed distances between quantile functions and the one-dimensional
//! optimal transport problems they solve.
//!
//! A convex generator `φ` and a scaling pair `(W, W₃)` define a pointwise
//! cost `Υ̅(u, v)`. Integrating it along the quantile functions of two laws
//! gives a directed distance `D(p, q)`. When the cost is quasi-antitone, `D`
//! is also the minimal transport cost, attained by the comonotone coupling.
//!
//! ```
//! use directed_ot::prelude::*;
//!
//! let cost = CostFunction::new(Generator::quadratic(), 0.5, ScalingPair::ClassicalBregman)?;
//! let spec = DivergenceSpec::new(Distribution::uniform(0.0, 1.0)?, Distribution::uniform(0.0, 2.0)?, cost);
//! let d = divergence(&spec, &QuadratureOptions::default())?;
//! assert!((d.value - 1.0 / 6.0).abs() < 1e-9);
//! # Ok::<(), directed_ot::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cost;
pub mod distributions;
pub mod divergence;
pub mod error;
pub mod generators;
pub mod report;
pub mod transport;

pub use error::{Error, Result};

/// The types needed for most computations.
pub mod prelude {
    pub use crate::cost::{CostFunction, ScalingPair};
    pub use crate::distributions::Distribution;
    pub use crate::divergence::{divergence, DivergenceResult, DivergenceSpec, QuadratureOptions};
    pub use crate::error::{Error, Result};
    pub use crate::generators::{Generator, Interval};
    pub use crate::transport::{comonotone_coupling, coupling_cost, MongeMap};
}
