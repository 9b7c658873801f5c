//! One-dimensional double-well diffusion and its finite-difference generator.

use std::sync::Arc;

use faer::Mat;

use super::sde::SdeSpec;
use crate::dictionaries::{spectral_element_dictionary, BoxBounds, BoxTree, Dictionary};
use crate::edmd::{convergence_study, ConvergenceReport, ReferenceEigenpair, SnapshotSet};
use crate::numerics::DEFAULT_RTOL;
use crate::{c64, Error, Result};

/// Macro time step between snapshot pairs (100 steps of `1e-3`).
pub const DOUBLE_WELL_DELTA_T: f64 = 0.1;
const EM_STEP: f64 = 1e-3;
const EM_STEPS: usize = 100;

/// `U(x) = -2 (x^2 - 1)^2 x^2`
pub fn double_well_potential(x: f64) -> f64 {
    -2.0 * (x * x - 1.0).powi(2) * x * x
}

/// `-U'(x) = 4 x (x^2 - 1)(3 x^2 - 1)`
pub fn double_well_drift(x: f64) -> f64 {
    4.0 * x * (x * x - 1.0) * (3.0 * x * x - 1.0)
}

fn spec(sigma: f64) -> SdeSpec {
    SdeSpec {
        drift: Arc::new(|x: &[f64], out: &mut [f64]| out[0] = double_well_drift(x[0])),
        diffusion: vec![sigma],
        lo: vec![-1.0],
        hi: vec![1.0],
        reflecting: vec![true],
        dt: EM_STEP,
    }
}

/// Uniform initial states on `[-1, 1]` and their positions after
/// [`DOUBLE_WELL_DELTA_T`], reflected at `+-1`.
pub fn double_well_generate(sigma: f64, m_count: usize, seed: u64) -> Result<SnapshotSet> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::input(format!("sigma must be nonnegative, got {sigma}")));
    }
    if m_count == 0 {
        return Err(Error::input("m_count must be at least 1"));
    }
    let (x, y) = spec(sigma).sample_pairs(m_count, EM_STEPS, seed)?;
    SnapshotSet::new(x, y, Some(DOUBLE_WELL_DELTA_T))
}

/// Four equal elements on `[-1, 1]` with Legendre degrees 0..=9 each (40 functions).
pub fn double_well_dictionary() -> Result<Dictionary> {
    let tree = BoxTree::uniform(BoxBounds::new(vec![-1.0], vec![1.0])?, 2)?;
    Ok(spectral_element_dictionary(tree, 9, true)?.into())
}

/// Tridiagonal discretization of `f(x) phi' + (sigma^2 / 2) phi''` on `n`
/// cell centers of `[-1, 1]` with ghost-cell Neumann closure.
#[derive(Debug, Clone)]
pub struct FdOperator {
    pub grid: Vec<f64>,
    pub sigma: f64,
    /// `sub[i]` multiplies `phi_{i-1}` in row `i` (`sub[0]` unused).
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    /// `sup[i]` multiplies `phi_{i+1}` in row `i` (`sup[n-1]` unused).
    pub sup: Vec<f64>,
}

impl FdOperator {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.sub[i] } else { 0.0 };
                let r = if i + 1 < n { self.sup[i] } else { 0.0 };
                l + self.diag[i] + r
            })
            .collect()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.len();
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if j + 1 == i {
                self.sub[i]
            } else if i + 1 == j {
                self.sup[i]
            } else {
                0.0
            }
        })
    }
}

pub fn fd_operator(drift: &dyn Fn(f64) -> f64, sigma: f64, n: usize) -> Result<FdOperator> {
    if n < 3 {
        return Err(Error::input(format!("need at least 3 grid points, got {n}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::input(format!("sigma must be nonnegative, got {sigma}")));
    }
    let h = 2.0 / n as f64;
    let grid: Vec<f64> = (0..n).map(|i| -1.0 + (i as f64 + 0.5) * h).collect();
    let diff = 0.5 * sigma * sigma / (h * h);
    let mut sub = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut diag = vec![-2.0 * diff; n];
    for (i, &x) in grid.iter().enumerate() {
        let adv = drift(x) / (2.0 * h);
        sub[i] = diff - adv;
        sup[i] = diff + adv;
    }
    // ghost values phi_{-1} = phi_0 and phi_n = phi_{n-1}
    diag[0] += sub[0];
    diag[n - 1] += sup[n - 1];
    sub[0] = 0.0;
    sup[n - 1] = 0.0;
    Ok(FdOperator { grid, sigma, sub, diag, sup })
}

/// Eigenpairs of an [`FdOperator`], sorted by decreasing eigenvalue.
#[derive(Debug, Clone)]
pub struct FdSpectrum {
    pub grid: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// Unit-norm eigenvectors as columns, sign fixed so the largest entry is positive.
    pub eigenvectors: Mat<f64>,
    /// Largest imaginary part met when the nonsymmetric solver was needed.
    pub max_imag: f64,
}

impl FdSpectrum {
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.eigenvectors[(i, k)]).collect()
    }
}

pub fn fd_spectrum(op: &FdOperator) -> Result<FdSpectrum> {
    let n = op.len();
    let err = |e| Error::numerical(format!("eigensolver failed: {e:?}"));
    let symmetrizable = (0..n - 1).all(|i| op.sup[i] * op.sub[i + 1] > 0.0);
    let (values, vectors, max_imag) = if symmetrizable {
        // D T D^-1 is symmetric for d_{i+1}^2 / d_i^2 = sup_i / sub_{i+1}
        let mut logd = vec![0.0; n];
        for i in 0..n - 1 {
            logd[i + 1] = logd[i] + 0.5 * (op.sup[i] / op.sub[i + 1]).ln();
        }
        let sym = Mat::from_fn(n, n, |i, j| {
            if i == j {
                op.diag[i]
            } else if i + 1 == j {
                (op.sup[i] * op.sub[j]).sqrt()
            } else if j + 1 == i {
                (op.sup[j] * op.sub[i]).sqrt()
            } else {
                0.0
            }
        });
        let e = sym.self_adjoint_eigen(faer::Side::Lower).map_err(err)?;
        let vals: Vec<f64> = e.S().column_vector().iter().copied().collect();
        let shift = logd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let u = e.U();
        let vecs = Mat::from_fn(n, n, |i, j| u[(i, j)] * (shift - logd[i]).exp());
        (vals, vecs, 0.0)
    } else {
        let e = op.to_dense().eigen().map_err(err)?;
        let s = e.S().column_vector();
        let vals: Vec<f64> = s.iter().map(|z| z.re).collect();
        let max_imag = s.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let u = e.U();
        (vals, Mat::from_fn(n, n, |i, j| u[(i, j)].re), max_imag)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut eigenvectors = Mat::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    for j in 0..n {
        let norm = eigenvectors.col(j).norm_l2();
        let pivot = (0..n).map(|i| eigenvectors[(i, j)]).fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        let scale = if pivot < 0.0 { -1.0 / norm } else { 1.0 / norm };
        for i in 0..n {
            eigenvectors[(i, j)] *= scale;
        }
    }
    Ok(FdSpectrum {
        grid: op.grid.clone(),
        eigenvalues: order.iter().map(|&j| values[j]).collect(),
        eigenvectors,
        max_imag,
    })
}

/// Reference spectrum of the double-well generator on `n` interior points.
pub fn double_well_fd_oracle(sigma: f64, n: usize) -> Result<FdSpectrum> {
    fd_spectrum(&fd_operator(&double_well_drift, sigma, n)?)
}

/// Monte-Carlo convergence of the leading nontrivial eigenpair against the
/// `fd_points` finite-difference oracle, with `replicates` data sets per `M`.
/// Replicate `r` uses seed `seed + r * 2^32`.
pub fn double_well_convergence(
    sigma: f64,
    m_values: &[usize],
    replicates: usize,
    seed: u64,
    fd_points: usize,
) -> Result<ConvergenceReport> {
    let fd = double_well_fd_oracle(sigma, fd_points)?;
    let probes = Mat::from_fn(1, fd.grid.len(), |_, j| fd.grid[j]);
    let phi = fd.eigenvector(1);
    let reference = ReferenceEigenpair { value: c64::new(fd.eigenvalues[1], 0.0), probes: probes.as_ref(), phi: &phi };
    let d = double_well_dictionary()?;
    let mut generator =
        |m: usize, rep: usize| double_well_generate(sigma, m, seed.wrapping_add((rep as u64) << 32));
    convergence_study(&mut generator, &d, m_values, replicates, DEFAULT_RTOL, &reference)
}
