use faer::{Mat, MatRef};

use super::{as_real, ensure_finite};
use crate::{c64, Error, Result};

/// Relative distance under which a right and a left eigenvalue are matched.
const PAIRING_RTOL: f64 = 1e-8;
/// Smallest acceptable |w^H xi| (unit vectors) before a pair counts as defective.
const DEFECT_TOL: f64 = 1e-12;

/// Eigenvalues with matched right and left eigenvectors.
///
/// Column `j` of `right` satisfies `m xi_j = mu_j xi_j` and has unit norm.
/// Column `j` of `left` satisfies `w_j^H m = mu_j w_j^H`; when `paired[j]` is
/// set it is scaled so that `w_j^H xi_j = 1`. Values come in solver order.
#[derive(Debug, Clone)]
pub struct TwoSidedEigen {
    pub values: Vec<c64>,
    pub right: Mat<c64>,
    pub left: Mat<c64>,
    pub paired: Vec<bool>,
}

fn solve(m: MatRef<'_, c64>) -> Result<(Vec<c64>, Mat<c64>, Vec<c64>, Mat<c64>)> {
    let err = |e| Error::numerical(format!("eigensolver failed: {e:?}"));
    if let Some(re) = as_real(m) {
        let r = re.eigen().map_err(err)?;
        let l = re.transpose().eigen().map_err(err)?;
        Ok((
            r.S().column_vector().iter().copied().collect(),
            r.U().to_owned(),
            l.S().column_vector().iter().copied().collect(),
            l.U().to_owned(),
        ))
    } else {
        let r = m.eigen().map_err(err)?;
        let l = m.adjoint().eigen().map_err(err)?;
        Ok((
            r.S().column_vector().iter().copied().collect(),
            r.U().to_owned(),
            l.S().column_vector().iter().copied().collect(),
            l.U().to_owned(),
        ))
    }
}

fn normalize_columns(m: &mut Mat<c64>) {
    for j in 0..m.ncols() {
        let n = m.col(j).norm_l2();
        if n > 0.0 {
            for i in 0..m.nrows() {
                m[(i, j)] /= n;
            }
        }
    }
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Two-sided eigendecomposition of a square matrix.
///
/// Left eigenvectors come from the eigendecomposition of `m^H`. Right and left
/// eigenvalues are grouped into clusters of (near-)equal values; inside each
/// cluster the left vectors are recombined so that `W^H Xi = I` on that
/// cluster. A cluster whose counts differ or whose cross-Gram matrix is
/// numerically singular is left unpaired (`paired[j] == false`).
pub fn eig_two_sided(m: MatRef<'_, c64>) -> Result<TwoSidedEigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::input(format!("eigendecomposition needs a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    ensure_finite(m, "matrix")?;
    let n = m.nrows();
    let (values, mut right, left_values, mut left_raw) = solve(m)?;
    normalize_columns(&mut right);
    normalize_columns(&mut left_raw);

    // Nodes 0..n are right eigenvalues, n..2n are conjugated left eigenvalues.
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = PAIRING_RTOL * scale;
    let node_value = |k: usize| if k < n { values[k] } else { left_values[k - n].conj() };
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| node_value(a).re.total_cmp(&node_value(b).re));
    let mut sets = DisjointSet((0..2 * n).collect());
    for (pos, &a) in order.iter().enumerate() {
        let va = node_value(a);
        for &b in &order[pos + 1..] {
            let vb = node_value(b);
            if vb.re - va.re > tol {
                break;
            }
            if (va - vb).norm() <= tol {
                sets.union(a, b);
            }
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for k in 0..2 * n {
        let root = sets.find(k);
        let entry = clusters.entry(root).or_default();
        if k < n {
            entry.0.push(k);
        } else {
            entry.1.push(k - n);
        }
    }

    let mut left = Mat::<c64>::zeros(n, n);
    let mut paired = vec![false; n];
    for (rights, lefts) in clusters.values() {
        if rights.is_empty() {
            continue;
        }
        let fallback = |left: &mut Mat<c64>, j: usize, src: Option<usize>| {
            if let Some(s) = src {
                for i in 0..n {
                    left[(i, j)] = left_raw[(i, s)];
                }
            }
        };
        if rights.len() != lefts.len() {
            for (t, &j) in rights.iter().enumerate() {
                fallback(&mut left, j, lefts.get(t).copied());
            }
            continue;
        }
        let c = rights.len();
        let r_block = Mat::from_fn(n, c, |i, t| right[(i, rights[t])]);
        let l_block = Mat::from_fn(n, c, |i, t| left_raw[(i, lefts[t])]);
        let cross = l_block.adjoint() * r_block.as_ref();
        if c == 1 {
            let s = cross[(0, 0)];
            if s.norm() > DEFECT_TOL {
                for i in 0..n {
                    left[(i, rights[0])] = l_block[(i, 0)] / s.conj();
                }
                paired[rights[0]] = true;
            } else {
                fallback(&mut left, rights[0], Some(lefts[0]));
            }
            continue;
        }
        let d = cross
            .thin_svd()
            .map_err(|e| Error::numerical(format!("svd did not converge: {e:?}")))?;
        let s: Vec<f64> = d.S().column_vector().iter().map(|z| z.re).collect();
        if s[c - 1] <= DEFECT_TOL {
            for (t, &j) in rights.iter().enumerate() {
                fallback(&mut left, j, Some(lefts[t]));
            }
            continue;
        }
        // W_c = L_c (cross)^{-H} = L_c U diag(1/s) V^H
        let u_scaled = Mat::from_fn(c, c, |i, k| d.U()[(i, k)] / s[k]);
        let mix = u_scaled.as_ref() * d.V().adjoint();
        let w = l_block.as_ref() * mix.as_ref();
        for (t, &j) in rights.iter().enumerate() {
            for i in 0..n {
                left[(i, j)] = w[(i, t)];
            }
            paired[j] = true;
        }
    }
    Ok(TwoSidedEigen { values, right, left, paired })
}
