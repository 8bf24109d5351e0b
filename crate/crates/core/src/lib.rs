//! Fixed-energy action minimization over antiperiodic loops pinned at `Re`,
//! rescaling of minimizers to periodic orbits of `ü + ∇V(u) = 0`, and
//! diagnostics for the large-`R` limit toward an escape orbit.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod action;
pub mod asymptotics;
pub mod continuation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod loops;
pub mod minimize;
pub mod orbit;
pub mod potentials;

pub use continuation::{run_continuation, ContinuationConfig, DiagnosticsRecord};
pub use error::{Error, Result};
pub use loops::SymmetricLoop;
pub use minimize::{minimize_loop, MinimizeOptions, MinimizeStats};
pub use orbit::{PeriodicOrbit, Trajectory};
pub use potentials::{Potential, PotentialSpec};
