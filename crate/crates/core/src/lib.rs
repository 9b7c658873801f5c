//! Extended dynamic mode decomposition (EDMD).
//!
//! Approximates Koopman eigenvalues, eigenfunctions and modes from snapshot
//! pairs `(x_m, y_m)` and a dictionary of observables. The crate is split into
//!
//! - [`numerics`]: pseudoinverse, two-sided eigensolver, k-means, log-log fits;
//! - [`dictionaries`]: Hermite, thin-plate RBF, spectral-element, state and
//!   Fourier-pair dictionaries behind the [`dictionaries::Basis`] trait;
//! - [`edmd`]: Gram accumulation, the Koopman matrix, decomposition,
//!   eigenfunction evaluation, prediction, DMD and convergence studies;
//! - [`benchmarks`]: seeded data generators and reference oracles;
//! - [`io`]: CSV/JSON persistence, experiment configs and oracle comparison.

pub mod benchmarks;
pub mod dictionaries;
pub mod edmd;
pub mod error;
pub mod io;
pub mod numerics;

pub use error::{Error, Result};
pub use num_complex::Complex64 as c64;
