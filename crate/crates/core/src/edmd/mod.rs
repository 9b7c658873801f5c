//! Extended dynamic mode decomposition.
//!
//! [`accumulate_gram`] averages dictionary products over snapshot pairs,
//! [`koopman_matrix`] solves the least-squares problem `K = G^+ A`, and
//! [`decompose`] turns `K` into eigenvalues, eigenvectors and modes.

mod convergence;
mod decomposition;
mod dmd;
mod gram;

pub use convergence::{convergence_study, leading_nontrivial, ConvergenceReport, ReferenceEigenpair};
pub use decomposition::{
    align_phase, correlation_modulus, decompose, evaluate_eigenfunctions, fit, koopman_matrix, pearson_modulus, predict,
    residual, spectral_order, sup_normalize, KoopmanDecomposition,
};
pub use dmd::{dmd, DmdResult};
pub use gram::{accumulate_gram, gram_matrix, GramPair, CHUNK_SIZE};

use faer::Mat;

use crate::numerics::{ensure_finite_real, RealMatrix};
use crate::{Error, Result};

/// Snapshot pairs `(x_m, y_m)` stored as the columns of two `N x M` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub x: RealMatrix,
    pub y: RealMatrix,
    /// Time between `x_m` and `y_m`, when the data come from a flow.
    pub delta_t: Option<f64>,
}

impl SnapshotSet {
    pub fn new(x: RealMatrix, y: RealMatrix, delta_t: Option<f64>) -> Result<Self> {
        if (x.nrows(), x.ncols()) != (y.nrows(), y.ncols()) {
            return Err(Error::input(format!(
                "x is {}x{} but y is {}x{}",
                x.nrows(),
                x.ncols(),
                y.nrows(),
                y.ncols()
            )));
        }
        ensure_finite_real(x.as_ref(), "x snapshots")?;
        ensure_finite_real(y.as_ref(), "y snapshots")?;
        if let Some(dt) = delta_t {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::input(format!("delta_t must be positive, got {dt}")));
            }
        }
        Ok(SnapshotSet { x, y, delta_t })
    }

    /// Number of pairs `M`.
    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state_dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn x_col(&self, j: usize) -> Vec<f64> {
        crate::numerics::column(self.x.as_ref(), j)
    }

    pub fn y_col(&self, j: usize) -> Vec<f64> {
        crate::numerics::column(self.y.as_ref(), j)
    }

    /// Concatenate the pairs of several sets.
    pub fn concat(parts: &[SnapshotSet]) -> Result<SnapshotSet> {
        let first = parts.first().ok_or_else(|| Error::input("nothing to concatenate"))?;
        let n = first.state_dim();
        if parts.iter().any(|p| p.state_dim() != n || p.delta_t != first.delta_t) {
            return Err(Error::input("snapshot sets differ in dimension or delta_t"));
        }
        let m: usize = parts.iter().map(SnapshotSet::len).sum();
        let mut x = Mat::zeros(n, m);
        let mut y = Mat::zeros(n, m);
        let mut off = 0;
        for p in parts {
            x.as_mut().subcols_mut(off, p.len()).copy_from(&p.x);
            y.as_mut().subcols_mut(off, p.len()).copy_from(&p.y);
            off += p.len();
        }
        Ok(SnapshotSet { x, y, delta_t: first.delta_t })
    }
}
