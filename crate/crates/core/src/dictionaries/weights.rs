use faer::Mat;

use super::{Basis, Dictionary};
use crate::edmd::{gram_matrix, SnapshotSet};
use crate::numerics::{truncated_pinv, ComplexMatrix};
use crate::{c64, Error, Result};

/// Coefficients `B` (K x N) with `x ~ Psi(x) B`.
#[derive(Debug, Clone)]
pub struct FullStateWeights {
    pub b: ComplexMatrix,
    /// Set when `Psi(x) B = x` holds identically rather than in a least-squares sense.
    pub exact: bool,
    /// Root-mean-square reconstruction error over the supplied data.
    pub residual: Option<f64>,
}

/// Express the full-state observable in the dictionary, exactly when the
/// coordinates are dictionary members, otherwise by least squares on `data`.
pub fn full_state_weights(d: &Dictionary, data: Option<&SnapshotSet>, rtol: f64) -> Result<FullStateWeights> {
    let n = d.state_dim();
    if let Some(s) = data {
        if s.state_dim() != n {
            return Err(Error::input(format!("data has dimension {} but the dictionary expects {n}", s.state_dim())));
        }
    }
    let (b, exact) = match exact_weights(d, data) {
        Some(b) => (b, true),
        None => {
            let s = data.ok_or_else(|| {
                Error::input(format!("no exact full-state expansion for a {} dictionary and no data given", d.family()))
            })?;
            (least_squares(d, s, rtol)?, false)
        }
    };
    let residual = data.map(|s| rms_error(d, s, &b));
    Ok(FullStateWeights { b, exact, residual })
}

fn exact_weights(d: &Dictionary, data: Option<&SnapshotSet>) -> Option<ComplexMatrix> {
    let n = d.state_dim();
    let k = d.len();
    let unit = |i: usize| -> Vec<u32> { (0..n).map(|a| (a == i) as u32).collect() };
    match d {
        Dictionary::State(_) => Some(Mat::from_fn(n, n, |i, j| c64::new((i == j) as u8 as f64, 0.0))),
        Dictionary::Hermite(h) => {
            let rows: Option<Vec<usize>> = (0..n).map(|i| h.index_of(&unit(i))).collect();
            let rows = rows?;
            let mut b = Mat::zeros(k, n);
            for (i, r) in rows.into_iter().enumerate() {
                // x = H_1(x) / 2
                b[(r, i)] = c64::new(0.5, 0.0);
            }
            Some(b)
        }
        Dictionary::SpectralElement(s) => {
            let constant = s.index_of(&vec![0; n])?;
            let linear: Vec<usize> = (0..n).map(|i| s.index_of(&unit(i))).collect::<Option<_>>()?;
            if let Some(data) = data {
                let covered = (0..data.len()).all(|j| s.tree.locate(&data.x_col(j)).is_some());
                if !covered {
                    return None;
                }
            }
            let p = s.per_leaf();
            let mut b = Mat::zeros(k, n);
            for leaf in 0..s.tree.leaves.len() {
                let bounds = s.tree.leaf_bounds(leaf);
                let (c, h) = (bounds.center(), bounds.half_width());
                for i in 0..n {
                    b[(leaf * p + constant, i)] = c64::new(c[i], 0.0);
                    b[(leaf * p + linear[i], i)] = c64::new(h[i], 0.0);
                }
            }
            Some(b)
        }
        _ => None,
    }
}

fn least_squares(d: &Dictionary, s: &SnapshotSet, rtol: f64) -> Result<ComplexMatrix> {
    let g = gram_matrix(d, s.x.as_ref())?;
    let k = d.len();
    let n = s.state_dim();
    let m = s.len() as f64;
    let mut rhs = Mat::<c64>::zeros(k, n);
    let mut row = vec![c64::new(0.0, 0.0); k];
    for j in 0..s.len() {
        let x = s.x_col(j);
        d.eval(&x, &mut row);
        for (r, psi) in row.iter().enumerate() {
            let c = psi.conj();
            for (a, &xa) in x.iter().enumerate() {
                rhs[(r, a)] += c * (xa / m);
            }
        }
    }
    let ginv = truncated_pinv(g.as_ref(), rtol)?;
    Ok(&ginv * &rhs)
}

fn rms_error(d: &Dictionary, s: &SnapshotSet, b: &ComplexMatrix) -> f64 {
    let mut row = vec![c64::new(0.0, 0.0); d.len()];
    let mut total = 0.0;
    for j in 0..s.len() {
        let x = s.x_col(j);
        d.eval(&x, &mut row);
        for (a, &xa) in x.iter().enumerate() {
            let fit: c64 = row.iter().enumerate().map(|(r, psi)| psi * b[(r, a)]).sum();
            total += (fit - xa).norm_sqr();
        }
    }
    (total / s.len() as f64).sqrt()
}
