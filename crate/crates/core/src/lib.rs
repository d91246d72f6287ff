//! Wiener-Hopf partial indices of rational matrix functions that are
//! unitary on the imaginary axis.
//!
//! The symbol is supplied as `R = V W*` with stable dissipative
//! realizations of the bi-inner factors `V` and `W`; the indices follow
//! from two Lyapunov solves and a sequence of eigenvalue counts (see
//! [`indices`]). The [`cayley`] module carries the same computation over
//! to the unit disk, where it becomes a pair of Stein equations, and
//! [`oracle`] provides independent ground truth for scalar symbols.

pub mod blaschke;
pub mod cayley;
pub mod equations;
pub mod error;
pub mod indices;
pub mod linalg;
pub mod oracle;
pub mod realization;
pub mod sample;

pub use blaschke::{BlaschkeSpec, Polynomial};
pub use error::{Error, Result};
pub use indices::{full_profile, IndexProfile, Tolerances};
pub use realization::{Flavor, Realization, Side, SymbolPair};
