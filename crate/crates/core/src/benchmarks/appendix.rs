use std::f64::consts::PI;

use faer::Mat;

use crate::dictionaries::fourier_pair_dictionary;
use crate::edmd::{koopman_matrix, GramPair};
use crate::numerics::{eig_two_sided, numerical_rank};
use crate::{c64, Result};

/// Closed-form `G` and `A` for the Fourier-pair dictionary restricted to the
/// diagonal `s -> (s, s)`, `s in [0, 2 pi)`, with the generator `d^2/ds^2`:
/// `G_ij = 2 pi` and `A_ij = -2 pi (m_j + n_j)^2` when `m_i + n_i = m_j + n_j`,
/// zero otherwise. `m_count` is zero since no data are involved.
pub fn appendix_matrices(k_param: usize) -> Result<GramPair> {
    let d = fourier_pair_dictionary(k_param)?;
    let k = k_param * k_param + 1;
    let total = |i: usize| {
        let (m, n) = d.wavenumbers(i);
        m + n
    };
    let g = Mat::from_fn(k, k, |i, j| if total(i) == total(j) { c64::new(2.0 * PI, 0.0) } else { c64::new(0.0, 0.0) });
    let a = Mat::from_fn(k, k, |i, j| {
        let t = total(j);
        if total(i) == t {
            c64::new(-2.0 * PI * (t * t) as f64, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    Ok(GramPair { g, a, m_count: 0 })
}

/// Rank of `G` and the spectrum of `G^+ A` for the closed-form matrices.
#[derive(Debug, Clone)]
pub struct AppendixReport {
    pub k_param: usize,
    pub size: usize,
    pub rank: usize,
    pub nullity: usize,
    /// Eigenvalues of `G^+ A`, sorted by decreasing real part.
    pub eigenvalues: Vec<c64>,
}

impl AppendixReport {
    /// Number of eigenvalues within `tol` of `value`.
    pub fn multiplicity(&self, value: f64, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|z| (**z - value).norm() <= tol).count()
    }
}

pub fn appendix_check(k_param: usize, rtol: f64) -> Result<AppendixReport> {
    let gp = appendix_matrices(k_param)?;
    let rank = numerical_rank(gp.g.as_ref(), rtol)?;
    let k = koopman_matrix(&gp, rtol)?;
    let mut eigenvalues = eig_two_sided(k.as_ref())?.values;
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re));
    Ok(AppendixReport { k_param, size: gp.size(), rank, nullity: gp.size() - rank, eigenvalues })
}
