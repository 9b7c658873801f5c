use std::ops::Range;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};

use super::SnapshotSet;
use crate::dictionaries::Basis;
use crate::numerics::{as_real, ComplexMatrix};
use crate::{c64, Error, Result};

/// Snapshots per accumulation chunk. Chunk sums are combined by a fixed
/// pairwise tree, so the result does not depend on the number of workers.
pub const CHUNK_SIZE: usize = 1024;

/// Data-averaged products `G = <Psi(x)^H Psi(x)>` and `A = <Psi(x)^H Psi(y)>`.
#[derive(Debug, Clone)]
pub struct GramPair {
    pub g: ComplexMatrix,
    pub a: ComplexMatrix,
    /// Number of averaged pairs; zero for closed-form matrices.
    pub m_count: usize,
}

impl GramPair {
    pub fn size(&self) -> usize {
        self.g.nrows()
    }

    /// Check that `G` is Hermitian and positive semidefinite.
    pub fn validate(&self) -> Result<()> {
        let k = self.size();
        if (self.g.ncols(), self.a.nrows(), self.a.ncols()) != (k, k, k) {
            return Err(Error::input("G and A must both be K x K"));
        }
        let scale = self.g.norm_l2().max(f64::MIN_POSITIVE);
        let asym = (&self.g - self.g.adjoint()).norm_l2();
        if asym > 1e-12 * scale {
            return Err(Error::numerical(format!("G is not Hermitian (relative defect {:.3e})", asym / scale)));
        }
        let herm = Mat::from_fn(k, k, |i, j| 0.5 * (self.g[(i, j)] + self.g[(j, i)].conj()));
        let ev = herm
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::numerical(format!("eigensolver failed: {e:?}")))?;
        let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo < -1e-10 * hi.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::numerical(format!("G is not positive semidefinite (eigenvalue {lo:.3e})")));
        }
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        as_real(self.g.as_ref()).is_some() && as_real(self.a.as_ref()).is_some()
    }
}

enum Partial {
    Real(Mat<f64>, Option<Mat<f64>>),
    Complex(Mat<c64>, Option<Mat<c64>>),
}

impl Partial {
    fn add(self, other: Partial) -> Partial {
        fn sum<T: Copy + std::ops::Add<Output = T>>(mut a: Mat<T>, b: &Mat<T>) -> Mat<T> {
            for j in 0..a.ncols() {
                for i in 0..a.nrows() {
                    a[(i, j)] = a[(i, j)] + b[(i, j)];
                }
            }
            a
        }
        match (self, other) {
            (Partial::Real(g, a), Partial::Real(g2, a2)) => {
                Partial::Real(sum(g, &g2), a.zip(a2).map(|(a, a2)| sum(a, &a2)))
            }
            (Partial::Complex(g, a), Partial::Complex(g2, a2)) => {
                Partial::Complex(sum(g, &g2), a.zip(a2).map(|(a, a2)| sum(a, &a2)))
            }
            _ => unreachable!("chunks share one representation"),
        }
    }
}

struct Job<'a> {
    d: &'a dyn Basis,
    x: MatRef<'a, f64>,
    y: Option<MatRef<'a, f64>>,
}

impl Job<'_> {
    fn point(&self, m: MatRef<'_, f64>, j: usize, buf: &mut [f64]) {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = m[(i, j)];
        }
    }

    fn nonfinite(&self, j: usize, side: &str) -> Error {
        Error::numerical(format!("dictionary produced a non-finite value at snapshot {j} ({side})"))
    }

    fn real_rows(&self, m: MatRef<'_, f64>, cols: Range<usize>, side: &str) -> Result<Mat<f64>> {
        let k = self.d.len();
        let mut out = Mat::<f64>::zeros(cols.len(), k);
        let mut x = vec![0.0; m.nrows()];
        let mut row = vec![0.0; k];
        for (r, j) in cols.enumerate() {
            self.point(m, j, &mut x);
            self.d.eval_real(&x, &mut row);
            if row.iter().any(|v| !v.is_finite()) {
                return Err(self.nonfinite(j, side));
            }
            for (c, v) in row.iter().enumerate() {
                out[(r, c)] = *v;
            }
        }
        Ok(out)
    }

    fn complex_rows(&self, m: MatRef<'_, f64>, cols: Range<usize>, side: &str) -> Result<Mat<c64>> {
        let k = self.d.len();
        let mut out = Mat::<c64>::zeros(cols.len(), k);
        let mut x = vec![0.0; m.nrows()];
        let mut row = vec![c64::new(0.0, 0.0); k];
        for (r, j) in cols.enumerate() {
            self.point(m, j, &mut x);
            self.d.eval(&x, &mut row);
            if row.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(self.nonfinite(j, side));
            }
            for (c, v) in row.iter().enumerate() {
                out[(r, c)] = *v;
            }
        }
        Ok(out)
    }

    /// Block-sparse accumulation: each row is nonzero only on `block(x)`.
    fn block_chunk(&self, cols: Range<usize>) -> Result<Partial> {
        let k = self.d.len();
        let mut g = Mat::<f64>::zeros(k, k);
        let mut a = self.y.map(|_| Mat::<f64>::zeros(k, k));
        let n = self.x.nrows();
        let (mut px, mut py) = (vec![0.0; n], vec![0.0; n]);
        let (mut rx, mut ry) = (vec![0.0; k], vec![0.0; k]);
        for j in cols {
            self.point(self.x, j, &mut px);
            let bx = self.d.block(&px).unwrap_or(0..k);
            self.d.eval_real(&px, &mut rx);
            if rx[bx.clone()].iter().any(|v| !v.is_finite()) {
                return Err(self.nonfinite(j, "x"));
            }
            for r in bx.clone() {
                for c in bx.clone() {
                    g[(r, c)] += rx[r] * rx[c];
                }
            }
            if let (Some(a), Some(y)) = (a.as_mut(), self.y) {
                self.point(y, j, &mut py);
                let by = self.d.block(&py).unwrap_or(0..k);
                self.d.eval_real(&py, &mut ry);
                if ry[by.clone()].iter().any(|v| !v.is_finite()) {
                    return Err(self.nonfinite(j, "y"));
                }
                for r in bx.clone() {
                    for c in by.clone() {
                        a[(r, c)] += rx[r] * ry[c];
                    }
                }
            }
        }
        Ok(Partial::Real(g, a))
    }

    fn chunk(&self, index: usize) -> Result<Partial> {
        let m = self.x.ncols();
        let cols = index * CHUNK_SIZE..((index + 1) * CHUNK_SIZE).min(m);
        let k = self.d.len();
        let probe = vec![0.0; self.x.nrows()];
        if self.d.is_real() && self.d.block(&probe).is_some() {
            return self.block_chunk(cols);
        }
        if self.d.is_real() {
            let px = self.real_rows(self.x, cols.clone(), "x")?;
            let mut g = Mat::<f64>::zeros(k, k);
            matmul(g.as_mut(), Accum::Replace, px.transpose(), px.as_ref(), 1.0, Par::Seq);
            let a = match self.y {
                Some(y) => {
                    let py = self.real_rows(y, cols, "y")?;
                    let mut a = Mat::<f64>::zeros(k, k);
                    matmul(a.as_mut(), Accum::Replace, px.transpose(), py.as_ref(), 1.0, Par::Seq);
                    Some(a)
                }
                None => None,
            };
            Ok(Partial::Real(g, a))
        } else {
            let one = c64::new(1.0, 0.0);
            let px = self.complex_rows(self.x, cols.clone(), "x")?;
            let mut g = Mat::<c64>::zeros(k, k);
            matmul(g.as_mut(), Accum::Replace, px.adjoint(), px.as_ref(), one, Par::Seq);
            let a = match self.y {
                Some(y) => {
                    let py = self.complex_rows(y, cols, "y")?;
                    let mut a = Mat::<c64>::zeros(k, k);
                    matmul(a.as_mut(), Accum::Replace, px.adjoint(), py.as_ref(), one, Par::Seq);
                    Some(a)
                }
                None => None,
            };
            Ok(Partial::Complex(g, a))
        }
    }

    fn reduce(&self, chunks: Range<usize>) -> Result<Partial> {
        if chunks.len() == 1 {
            return self.chunk(chunks.start);
        }
        let mid = chunks.start + chunks.len() / 2;
        let (left, right) = rayon::join(|| self.reduce(chunks.start..mid), || self.reduce(mid..chunks.end));
        Ok(left?.add(right?))
    }

    fn run(&self) -> Result<(ComplexMatrix, Option<ComplexMatrix>)> {
        let m = self.x.ncols();
        if m == 0 {
            return Err(Error::input("no snapshots"));
        }
        if self.x.nrows() != self.d.state_dim() {
            return Err(Error::input(format!(
                "snapshots have dimension {} but the dictionary expects {}",
                self.x.nrows(),
                self.d.state_dim()
            )));
        }
        let total = self.reduce(0..m.div_ceil(CHUNK_SIZE))?;
        let inv = 1.0 / m as f64;
        let (g, a) = match total {
            Partial::Real(g, a) => {
                let cx = |t: &Mat<f64>| Mat::from_fn(t.nrows(), t.ncols(), |i, j| c64::new(t[(i, j)] * inv, 0.0));
                (cx(&g), a.as_ref().map(cx))
            }
            Partial::Complex(g, a) => {
                let sc = |t: &Mat<c64>| Mat::from_fn(t.nrows(), t.ncols(), |i, j| t[(i, j)] * inv);
                (sc(&g), a.as_ref().map(sc))
            }
        };
        // exact Hermitian symmetry
        let k = g.nrows();
        let g = Mat::from_fn(k, k, |i, j| 0.5 * (g[(i, j)] + g[(j, i)].conj()));
        Ok((g, a))
    }
}

/// Accumulate `G` and `A` over all snapshot pairs.
pub fn accumulate_gram(s: &SnapshotSet, d: &dyn Basis) -> Result<GramPair> {
    let (g, a) = Job { d, x: s.x.as_ref(), y: Some(s.y.as_ref()) }.run()?;
    Ok(GramPair { g, a: a.expect("A requested"), m_count: s.len() })
}

/// `G` alone, for the columns of `points`.
pub fn gram_matrix(d: &dyn Basis, points: MatRef<'_, f64>) -> Result<ComplexMatrix> {
    Ok(Job { d, x: points, y: None }.run()?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionaries::{spectral_element_dictionary, BoxBounds, BoxTree, Dictionary};
    use crate::numerics::from_columns;

    fn affine() -> Dictionary {
        // {1, x} on [-10, 10]
        let tree = BoxTree::uniform(BoxBounds::new(vec![-10.0], vec![10.0]).unwrap(), 0).unwrap();
        spectral_element_dictionary(tree, 1, true).unwrap().into()
    }

    /// Dense real wrapper of a dictionary, to exercise the matmul path.
    struct Dense<'a>(&'a Dictionary);

    impl Basis for Dense<'_> {
        fn len(&self) -> usize {
            self.0.len()
        }
        fn state_dim(&self) -> usize {
            self.0.state_dim()
        }
        fn eval(&self, x: &[f64], out: &mut [c64]) {
            self.0.eval(x, out)
        }
    }

    /// {1, x} evaluated directly.
    struct OneX;

    impl Basis for OneX {
        fn len(&self) -> usize {
            2
        }
        fn state_dim(&self) -> usize {
            1
        }
        fn eval(&self, x: &[f64], out: &mut [c64]) {
            out[0] = c64::new(1.0, 0.0);
            out[1] = c64::new(x[0], 0.0);
        }
    }

    fn re(m: &ComplexMatrix) -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect()
    }

    #[test]
    fn single_pair_outer_product() {
        let s = SnapshotSet::new(from_columns(&[vec![2.0]]), from_columns(&[vec![3.0]]), None).unwrap();
        let gp = accumulate_gram(&s, &OneX).unwrap();
        assert_eq!(re(&gp.g), vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(re(&gp.a), vec![vec![1.0, 3.0], vec![2.0, 6.0]]);
    }

    #[test]
    fn two_pairs_average() {
        let s = SnapshotSet::new(from_columns(&[vec![0.0], vec![1.0]]), from_columns(&[vec![1.0], vec![0.0]]), None)
            .unwrap();
        let gp = accumulate_gram(&s, &OneX).unwrap();
        assert_eq!(re(&gp.g), vec![vec![1.0, 0.5], vec![0.5, 0.5]]);
        assert_eq!(re(&gp.a), vec![vec![1.0, 0.5], vec![0.5, 0.0]]);
        gp.validate().unwrap();
    }

    #[test]
    fn identity_dynamics_give_a_equal_g() {
        let pts: Vec<Vec<f64>> = (0..2500).map(|i| vec![(i as f64 * 0.731).sin() * 3.0]).collect();
        let x = from_columns(&pts);
        let s = SnapshotSet::new(x.clone(), x, None).unwrap();
        let gp = accumulate_gram(&s, &OneX).unwrap();
        assert_eq!(gp.g, gp.a);
    }

    #[test]
    fn block_and_dense_paths_agree() {
        let d = affine();
        let pts: Vec<Vec<f64>> = (0..3000).map(|i| vec![(i as f64 * 0.37).sin() * 9.0]).collect();
        let ys: Vec<Vec<f64>> = pts.iter().map(|p| vec![0.5 * p[0]]).collect();
        let s = SnapshotSet::new(from_columns(&pts), from_columns(&ys), None).unwrap();
        let sparse = accumulate_gram(&s, &d).unwrap();
        let dense = accumulate_gram(&s, &Dense(&d)).unwrap();
        let scale = dense.g.norm_l2();
        assert!((&sparse.g - &dense.g).norm_l2() < 1e-13 * scale);
        assert!((&sparse.a - &dense.a).norm_l2() < 1e-13 * scale);
    }

    #[test]
    fn nonfinite_output_names_the_snapshot() {
        struct Log;
        impl Basis for Log {
            fn len(&self) -> usize {
                1
            }
            fn state_dim(&self) -> usize {
                1
            }
            fn eval(&self, x: &[f64], out: &mut [c64]) {
                out[0] = c64::new(x[0].ln(), 0.0);
            }
        }
        let s = SnapshotSet::new(from_columns(&[vec![1.0], vec![-1.0]]), from_columns(&[vec![1.0], vec![1.0]]), None)
            .unwrap();
        let err = accumulate_gram(&s, &Log).unwrap_err();
        assert!(err.to_string().contains("snapshot 1"), "{err}");
    }
}
