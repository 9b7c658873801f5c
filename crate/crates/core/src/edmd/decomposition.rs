use std::f64::consts::PI;

use faer::{Mat, MatRef};

use super::{accumulate_gram, GramPair, SnapshotSet};
use crate::dictionaries::{full_state_weights, Basis, Dictionary, FullStateWeights};
use crate::numerics::{as_real, eig_two_sided, to_complex, truncated_pinv, truncated_pinv_real, ComplexMatrix};
use crate::{c64, Error, Result};

/// Eigenvalues, eigenvectors and modes of a finite Koopman approximation,
/// sorted by decreasing `|mu|` with ties broken by increasing argument.
#[derive(Debug, Clone)]
pub struct KoopmanDecomposition {
    pub mu: Vec<c64>,
    /// `ln(mu) / delta_t` on the principal branch; `-inf` where `mu = 0`.
    pub lambda: Option<Vec<c64>>,
    /// Right eigenvectors of `K` as columns (unit norm).
    pub xi: ComplexMatrix,
    /// Left eigenvectors, scaled so `w_j^H xi_j = 1` where `paired[j]`.
    pub w: ComplexMatrix,
    /// Koopman modes as columns (`N x K`); columns of unpaired eigenvalues are zero.
    pub modes: Option<ComplexMatrix>,
    pub paired: Vec<bool>,
    pub dictionary: Option<Dictionary>,
    pub rtol: f64,
    pub delta_t: Option<f64>,
    pub m_count: usize,
}

impl KoopmanDecomposition {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn state_dim(&self) -> Option<usize> {
        self.modes.as_ref().map(|m| m.nrows())
    }

    /// Mode `j`, or `None` when modes are absent or the eigenvalue is unpaired.
    pub fn mode(&self, j: usize) -> Option<Vec<c64>> {
        let m = self.modes.as_ref()?;
        self.paired[j].then(|| (0..m.nrows()).map(|i| m[(i, j)]).collect())
    }

    pub fn mode_norm(&self, j: usize) -> Option<f64> {
        self.mode(j).map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    }

    /// Continuous-time eigenvalue `j` when `delta_t` is known, else `mu_j`.
    pub fn rate_or_mu(&self, j: usize) -> c64 {
        self.lambda.as_ref().map_or(self.mu[j], |l| l[j])
    }
}

/// `K = G^+ A` with singular values of `G` below `rtol * s_max` discarded.
pub fn koopman_matrix(gp: &GramPair, rtol: f64) -> Result<ComplexMatrix> {
    if gp.g.norm_l2() == 0.0 {
        return Err(Error::numerical("G vanishes on the data; the dictionary is degenerate"));
    }
    match (as_real(gp.g.as_ref()), as_real(gp.a.as_ref())) {
        (Some(g), Some(a)) => {
            let p = truncated_pinv_real(g.as_ref(), rtol)?;
            Ok(to_complex((&p * &a).as_ref()))
        }
        _ => {
            let p = truncated_pinv(gp.g.as_ref(), rtol)?;
            Ok(&p * &gp.a)
        }
    }
}

fn principal_arg(z: c64) -> f64 {
    let a = z.arg();
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// Permutation sorting `values` by decreasing modulus, then increasing
/// argument in `(-pi, pi]` among values of equal modulus.
pub fn spectral_order(values: &[c64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].norm().total_cmp(&values[a].norm()).then(a.cmp(&b)));
    let mut out = Vec::with_capacity(idx.len());
    let mut start = 0;
    while start < idx.len() {
        let top = values[idx[start]].norm();
        let tol = 1e-12 * top.max(1e-300);
        let mut end = start + 1;
        while end < idx.len() && top - values[idx[end]].norm() <= tol {
            end += 1;
        }
        let mut group = idx[start..end].to_vec();
        group.sort_by(|&a, &b| principal_arg(values[a]).total_cmp(&principal_arg(values[b])).then(a.cmp(&b)));
        out.extend(group);
        start = end;
    }
    out
}

fn continuous(mu: c64, dt: f64) -> c64 {
    if mu == c64::new(0.0, 0.0) {
        return c64::new(f64::NEG_INFINITY, 0.0);
    }
    let l = mu.ln();
    let im = if l.im <= -PI { PI } else { l.im };
    c64::new(l.re, im) / dt
}

/// Eigendecomposition of `k`, with modes `V = (W^H B)^T` when `b` is given.
pub fn decompose(
    k: MatRef<'_, c64>,
    b: Option<&FullStateWeights>,
    delta_t: Option<f64>,
    rtol: f64,
) -> Result<KoopmanDecomposition> {
    let eig = eig_two_sided(k)?;
    let n = eig.values.len();
    if let Some(b) = b {
        if b.b.nrows() != n {
            return Err(Error::input(format!("weights have {} rows but K is {n}x{n}", b.b.nrows())));
        }
    }
    if let Some(dt) = delta_t {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::input(format!("delta_t must be positive, got {dt}")));
        }
    }
    let order = spectral_order(&eig.values);
    let mu: Vec<c64> = order.iter().map(|&j| eig.values[j]).collect();
    let paired: Vec<bool> = order.iter().map(|&j| eig.paired[j]).collect();
    let xi = Mat::from_fn(n, n, |i, j| eig.right[(i, order[j])]);
    let w = Mat::from_fn(n, n, |i, j| eig.left[(i, order[j])]);
    let modes = b.map(|b| {
        // column j of V is (w_j^H B)^T
        let wb = w.adjoint() * &b.b;
        Mat::from_fn(b.b.ncols(), n, |i, j| if paired[j] { wb[(j, i)] } else { c64::new(0.0, 0.0) })
    });
    let lambda = delta_t.map(|dt| mu.iter().map(|&m| continuous(m, dt)).collect());
    Ok(KoopmanDecomposition {
        mu,
        lambda,
        xi,
        w,
        modes,
        paired,
        dictionary: None,
        rtol,
        delta_t,
        m_count: 0,
    })
}

/// End-to-end EDMD: Gram accumulation, least squares and decomposition.
/// Modes are computed from full-state weights when `with_modes` is set.
pub fn fit(s: &SnapshotSet, d: &Dictionary, rtol: f64, with_modes: bool) -> Result<KoopmanDecomposition> {
    let gp = accumulate_gram(s, d)?;
    let k = koopman_matrix(&gp, rtol)?;
    let weights = if with_modes { Some(full_state_weights(d, Some(s), rtol)?) } else { None };
    let mut dec = decompose(k.as_ref(), weights.as_ref(), s.delta_t, rtol)?;
    dec.dictionary = Some(d.clone());
    dec.m_count = s.len();
    Ok(dec)
}

/// Divide by the entry of largest modulus, so that entry becomes `1`.
pub fn sup_normalize(values: &mut [c64]) {
    let Some(pivot) = values.iter().copied().reduce(|a, b| if b.norm() > a.norm() { b } else { a }) else {
        return;
    };
    if pivot.norm() > 0.0 {
        for v in values.iter_mut() {
            *v /= pivot;
        }
    }
}

fn inner(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[c64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `v` rotated by the unit phase that best aligns it with `reference`.
pub fn align_phase(reference: &[c64], v: &[c64]) -> Vec<c64> {
    let p = inner(v, reference);
    let rot = if p.norm() > 0.0 { p / p.norm() } else { c64::new(1.0, 0.0) };
    v.iter().map(|z| z * rot).collect()
}

/// `|<a, b>| / (|a| |b|)`; 1 exactly when the vectors are complex multiples.
pub fn correlation_modulus(a: &[c64], b: &[c64]) -> f64 {
    let d = norm(a) * norm(b);
    if d == 0.0 {
        0.0
    } else {
        inner(a, b).norm() / d
    }
}

/// Modulus of the complex Pearson correlation (means removed first).
pub fn pearson_modulus(a: &[c64], b: &[c64]) -> f64 {
    let center = |v: &[c64]| {
        let m = v.iter().sum::<c64>() / v.len() as f64;
        v.iter().map(|z| z - m).collect::<Vec<_>>()
    };
    correlation_modulus(&center(a), &center(b))
}

/// Eigenfunction values `Psi(p) xi_j` at the columns `p` of `points`
/// (rows of the result) for each requested index (columns). With
/// `normalize`, every column is divided by its entry of largest modulus.
pub fn evaluate_eigenfunctions(
    dec: &KoopmanDecomposition,
    d: &dyn Basis,
    points: MatRef<'_, f64>,
    indices: &[usize],
    normalize: bool,
) -> Result<ComplexMatrix> {
    if d.len() != dec.xi.nrows() {
        return Err(Error::input(format!("dictionary has {} functions but the decomposition {}", d.len(), dec.xi.nrows())));
    }
    if points.nrows() != d.state_dim() {
        return Err(Error::input(format!("points have dimension {} but the dictionary expects {}", points.nrows(), d.state_dim())));
    }
    if let Some(&bad) = indices.iter().find(|&&j| j >= dec.len()) {
        return Err(Error::input(format!("eigenfunction index {bad} out of range (K = {})", dec.len())));
    }
    let k = d.len();
    let sub = Mat::from_fn(k, indices.len(), |i, j| dec.xi[(i, indices[j])]);
    let p = points.ncols();
    let mut out = Mat::<c64>::zeros(p, indices.len());
    const ROWS: usize = 1024;
    let mut x = vec![0.0; points.nrows()];
    let mut row = vec![c64::new(0.0, 0.0); k];
    for start in (0..p).step_by(ROWS) {
        let end = (start + ROWS).min(p);
        let mut psi = Mat::<c64>::zeros(end - start, k);
        for r in start..end {
            for (a, v) in x.iter_mut().enumerate() {
                *v = points[(a, r)];
            }
            d.eval(&x, &mut row);
            for (c, v) in row.iter().enumerate() {
                psi[(r - start, c)] = *v;
            }
        }
        out.as_mut().subrows_mut(start, end - start).copy_from(&psi * &sub);
    }
    if normalize {
        for j in 0..indices.len() {
            let mut col: Vec<c64> = (0..p).map(|i| out[(i, j)]).collect();
            sup_normalize(&mut col);
            for (i, v) in col.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
    }
    Ok(out)
}

/// Least-squares objective `1/2 sum_m |(Psi(y_m) - Psi(x_m) K) a|^2`.
pub fn residual(s: &SnapshotSet, d: &dyn Basis, k: MatRef<'_, c64>, a: &[c64]) -> Result<f64> {
    let n = d.len();
    if a.len() != n || k.nrows() != n || k.ncols() != n {
        return Err(Error::input(format!("coefficient vector and K must match the dictionary size {n}")));
    }
    let ka: Vec<c64> = (0..n).map(|i| (0..n).map(|j| k[(i, j)] * a[j]).sum()).collect();
    let mut rx = vec![c64::new(0.0, 0.0); n];
    let mut ry = vec![c64::new(0.0, 0.0); n];
    let mut total = 0.0;
    for m in 0..s.len() {
        d.eval(&s.x_col(m), &mut rx);
        d.eval(&s.y_col(m), &mut ry);
        let r: c64 = ry.iter().zip(a).map(|(p, c)| p * c).sum::<c64>() - rx.iter().zip(&ka).map(|(p, c)| p * c).sum::<c64>();
        total += r.norm_sqr();
    }
    Ok(0.5 * total)
}

/// `sum_k mu_k^steps v_k phi_k(x0)` over paired eigenvalues.
pub fn predict(dec: &KoopmanDecomposition, d: &dyn Basis, x0: &[f64], steps: u32) -> Result<Vec<c64>> {
    let modes = dec.modes.as_ref().ok_or_else(|| Error::input("decomposition has no modes"))?;
    if x0.len() != d.state_dim() || d.len() != dec.len() {
        return Err(Error::input("state, dictionary and decomposition sizes disagree"));
    }
    let psi = d.row(x0);
    let mut out = vec![c64::new(0.0, 0.0); modes.nrows()];
    for j in (0..dec.len()).filter(|&j| dec.paired[j]) {
        let phi: c64 = psi.iter().enumerate().map(|(i, p)| p * dec.xi[(i, j)]).sum();
        let scale = dec.mu[j].powu(steps) * phi;
        for (i, o) in out.iter_mut().enumerate() {
            *o += modes[(i, j)] * scale;
        }
    }
    Ok(out)
}
