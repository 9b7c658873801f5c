use faer::{Mat, MatRef};

use super::{ensure_finite, ensure_finite_real};
use crate::{c64, Error, Result};

/// Default relative truncation level for singular values.
pub const DEFAULT_RTOL: f64 = 1e-10;

/// Thin singular value decomposition `m = U diag(s) V^H`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    pub u: Mat<c64>,
    pub v: Mat<c64>,
}

pub fn svd(m: MatRef<'_, c64>) -> Result<SvdResult> {
    ensure_finite(m, "matrix")?;
    let s = m
        .thin_svd()
        .map_err(|e| Error::numerical(format!("svd did not converge: {e:?}")))?;
    let singular_values = s.S().column_vector().iter().map(|z| z.re).collect();
    Ok(SvdResult { singular_values, u: s.U().to_owned(), v: s.V().to_owned() })
}

fn check_rtol(rtol: f64) -> Result<()> {
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(Error::input(format!("rtol must lie in (0, 1), got {rtol}")));
    }
    Ok(())
}

/// Number of singular values above `rtol` times the largest one.
pub fn numerical_rank(m: MatRef<'_, c64>, rtol: f64) -> Result<usize> {
    check_rtol(rtol)?;
    let s = svd(m)?.singular_values;
    let cut = s.first().copied().unwrap_or(0.0) * rtol;
    Ok(s.iter().filter(|&&v| v > cut && v > 0.0).count())
}

/// Moore-Penrose pseudoinverse with singular values below `rtol * s_max` zeroed.
pub fn truncated_pinv(m: MatRef<'_, c64>, rtol: f64) -> Result<Mat<c64>> {
    check_rtol(rtol)?;
    let SvdResult { singular_values: s, u, v } = svd(m)?;
    let cut = s.first().copied().unwrap_or(0.0) * rtol;
    let kept = s.iter().take_while(|&&x| x > cut && x > 0.0).count();
    // P = V_r diag(1/s_r) U_r^H
    let scaled = Mat::from_fn(v.nrows(), kept, |i, j| v[(i, j)] / s[j]);
    let p = scaled.as_ref() * u.as_ref().subcols(0, kept).adjoint();
    if is_hermitian(m) {
        return Ok(Mat::from_fn(p.nrows(), p.ncols(), |i, j| 0.5 * (p[(i, j)] + p[(j, i)].conj())));
    }
    Ok(p)
}

fn is_hermitian(m: MatRef<'_, c64>) -> bool {
    m.nrows() == m.ncols() && (0..m.nrows()).all(|i| (0..=i).all(|j| m[(i, j)] == m[(j, i)].conj()))
}

/// Real counterpart of [`truncated_pinv`]; roughly four times cheaper.
pub fn truncated_pinv_real(m: MatRef<'_, f64>, rtol: f64) -> Result<Mat<f64>> {
    check_rtol(rtol)?;
    ensure_finite_real(m, "matrix")?;
    let d = m
        .thin_svd()
        .map_err(|e| Error::numerical(format!("svd did not converge: {e:?}")))?;
    let s: Vec<f64> = d.S().column_vector().iter().copied().collect();
    let cut = s.first().copied().unwrap_or(0.0) * rtol;
    let kept = s.iter().take_while(|&&x| x > cut && x > 0.0).count();
    let v = d.V();
    let scaled = Mat::from_fn(v.nrows(), kept, |i, j| v[(i, j)] / s[j]);
    let p = scaled.as_ref() * d.U().subcols(0, kept).transpose();
    let symmetric = m.nrows() == m.ncols() && (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]));
    if symmetric {
        return Ok(Mat::from_fn(p.nrows(), p.ncols(), |i, j| 0.5 * (p[(i, j)] + p[(j, i)])));
    }
    Ok(p)
}
