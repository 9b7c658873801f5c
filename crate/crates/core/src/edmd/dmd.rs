use faer::Mat;

use super::{spectral_order, SnapshotSet};
use crate::numerics::{eig_two_sided, to_complex, truncated_pinv_real, ComplexMatrix};
use crate::{c64, Result};

#[derive(Debug, Clone)]
pub struct DmdResult {
    pub values: Vec<c64>,
    /// Unit-norm eigenvectors of `Y X^+` as columns, in the order of `values`.
    pub modes: ComplexMatrix,
}

/// Dynamic mode decomposition: the eigenpairs of `Y X^+`.
pub fn dmd(s: &SnapshotSet, rtol: f64) -> Result<DmdResult> {
    let xp = truncated_pinv_real(s.x.as_ref(), rtol)?;
    let a = &s.y * &xp;
    let eig = eig_two_sided(to_complex(a.as_ref()).as_ref())?;
    let order = spectral_order(&eig.values);
    let n = order.len();
    Ok(DmdResult {
        values: order.iter().map(|&j| eig.values[j]).collect(),
        modes: Mat::from_fn(n, n, |i, j| eig.right[(i, order[j])]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::from_rows;

    #[test]
    fn identity_dynamics() {
        let x = from_rows(&[vec![1.0, 0.0, 2.0], vec![0.0, 1.0, -1.0]]);
        let r = dmd(&SnapshotSet::new(x.clone(), x, None).unwrap(), 1e-10).unwrap();
        assert!(r.values.iter().all(|v| (v - c64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn recovers_a_linear_map() {
        let x = from_rows(&[vec![1.0, 0.3, -0.7, 2.0], vec![0.2, -1.0, 0.5, 1.5]]);
        let j = from_rows(&[vec![0.9, -0.1], vec![0.0, 0.8]]);
        let y = &j * &x;
        let r = dmd(&SnapshotSet::new(x, y, None).unwrap(), 1e-10).unwrap();
        assert!((r.values[0] - c64::new(0.9, 0.0)).norm() < 1e-12);
        assert!((r.values[1] - c64::new(0.8, 0.0)).norm() < 1e-12);
    }
}
