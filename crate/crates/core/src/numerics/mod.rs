//! Dense linear algebra and clustering utilities shared by every other module.
//!
//! Matrices are [`faer::Mat`] values; [`RealMatrix`] and [`ComplexMatrix`] are
//! plain aliases. All functions are pure.

mod eig;
mod fit;
mod kmeans;
mod pinv;

pub use eig::{eig_two_sided, TwoSidedEigen};
pub use fit::fit_loglog_slope;
pub use kmeans::{kmeans, kmeans_with_cap, KMeansResult, DEFAULT_MAX_ITER};
pub use pinv::{numerical_rank, svd, truncated_pinv, truncated_pinv_real, SvdResult, DEFAULT_RTOL};

use faer::{Mat, MatRef};

use crate::{c64, Error, Result};

pub type RealMatrix = Mat<f64>;
pub type ComplexMatrix = Mat<c64>;

pub fn to_complex(m: MatRef<'_, f64>) -> ComplexMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

/// Real part of `m` when every imaginary part is exactly zero.
pub fn as_real(m: MatRef<'_, c64>) -> Option<RealMatrix> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)].im != 0.0 {
                return None;
            }
        }
    }
    Some(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re))
}

pub fn ensure_finite(m: MatRef<'_, c64>, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::input(format!("{what} is empty")));
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::input(format!("{what} has a non-finite entry at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

pub fn ensure_finite_real(m: MatRef<'_, f64>, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::input(format!("{what} is empty")));
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::input(format!("{what} has a non-finite entry at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

pub fn frobenius(m: MatRef<'_, c64>) -> f64 {
    m.norm_l2()
}

/// Largest |a_ij - b_ij|.
pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// Build a matrix from row vectors.
pub fn from_rows(rows: &[Vec<f64>]) -> RealMatrix {
    let ncols = rows.first().map_or(0, Vec::len);
    Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Build a matrix whose columns are the given vectors.
pub fn from_columns(cols: &[Vec<f64>]) -> RealMatrix {
    let nrows = cols.first().map_or(0, Vec::len);
    Mat::from_fn(nrows, cols.len(), |i, j| cols[j][i])
}

pub fn column(m: MatRef<'_, f64>, j: usize) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn ccolumn(m: MatRef<'_, c64>, j: usize) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}
