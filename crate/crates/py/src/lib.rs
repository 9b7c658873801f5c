//! Python bindings. Snapshots travel as lists of points (one list of floats
//! per snapshot); complex values map to Python `complex`.

use std::path::PathBuf;

use faer::Mat;
use koopman_core::benchmarks as bench;
use koopman_core::dictionaries::{self as dicts, Basis, BoxBounds};
use koopman_core::edmd::{self, KoopmanDecomposition};
use koopman_core::io::{self as kio, DecompositionArchive, ExperimentConfig, Provenance};
use koopman_core::numerics::{from_columns, DEFAULT_RTOL};
use koopman_core::{c64, Error};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Numerical(m) => PyArithmeticError::new_err(m),
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn columns(points: &[Vec<f64>], what: &str) -> PyResult<Mat<f64>> {
    let n = points.first().map(Vec::len).unwrap_or(0);
    if points.is_empty() || n == 0 || points.iter().any(|p| p.len() != n) {
        return Err(PyValueError::new_err(format!("{what} must be a nonempty list of equal-length points")));
    }
    Ok(from_columns(points))
}

fn points_of(m: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)]).collect()).collect()
}

/// Snapshot pairs `(x_m, y_m)`.
#[pyclass(name = "SnapshotSet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySnapshots {
    inner: edmd::SnapshotSet,
}

#[pymethods]
impl PySnapshots {
    #[new]
    #[pyo3(signature = (x, y, delta_t=None))]
    fn new(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>, delta_t: Option<f64>) -> PyResult<Self> {
        let inner = edmd::SnapshotSet::new(columns(&x, "x")?, columns(&y, "y")?, delta_t).map_err(to_py)?;
        Ok(PySnapshots { inner })
    }

    #[staticmethod]
    fn read_csv(path: PathBuf) -> PyResult<Self> {
        Ok(PySnapshots { inner: kio::read_snapshots(&path).map_err(to_py)? })
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        kio::write_snapshots(&self.inner, &path).map_err(to_py)
    }

    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        points_of(&self.inner.x)
    }

    #[getter]
    fn y(&self) -> Vec<Vec<f64>> {
        points_of(&self.inner.y)
    }

    #[getter]
    fn delta_t(&self) -> Option<f64> {
        self.inner.delta_t
    }

    #[getter]
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("SnapshotSet(state_dim={}, pairs={})", self.inner.state_dim(), self.inner.len())
    }
}

/// One of the built-in observable dictionaries.
#[pyclass(name = "Dictionary", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDictionary {
    inner: dicts::Dictionary,
}

#[pymethods]
impl PyDictionary {
    #[staticmethod]
    #[pyo3(signature = (dim, max_order, extra_terms=Vec::new()))]
    fn hermite(dim: usize, max_order: usize, extra_terms: Vec<Vec<u32>>) -> PyResult<Self> {
        let d = dicts::hermite_dictionary(dim, max_order).and_then(|d| d.with_terms(extra_terms)).map_err(to_py)?;
        Ok(PyDictionary { inner: d.into() })
    }

    #[staticmethod]
    fn state(dim: usize) -> PyResult<Self> {
        Ok(PyDictionary { inner: dicts::state_dictionary(dim).map_err(to_py)?.into() })
    }

    #[staticmethod]
    #[pyo3(signature = (centers, include_constant=true))]
    fn thin_plate(centers: Vec<Vec<f64>>, include_constant: bool) -> PyResult<Self> {
        let c = columns(&centers, "centers")?;
        Ok(PyDictionary { inner: dicts::thin_plate_rbf_dictionary(c.as_ref(), include_constant).map_err(to_py)?.into() })
    }

    /// Piecewise Legendre elements on a box tree over `data`, with root `[lo, hi]`.
    #[staticmethod]
    #[pyo3(signature = (data, lo, hi, order, max_points, max_depth, tensor=None))]
    fn spectral_element(
        data: Vec<Vec<f64>>,
        lo: Vec<f64>,
        hi: Vec<f64>,
        order: usize,
        max_points: usize,
        max_depth: u32,
        tensor: Option<bool>,
    ) -> PyResult<Self> {
        let pts = columns(&data, "data")?;
        let dim = pts.nrows();
        let root = BoxBounds::new(lo, hi).map_err(to_py)?;
        let tree = dicts::build_box_tree(pts.as_ref(), root, max_points, max_depth).map_err(to_py)?;
        let tensor = tensor.unwrap_or_else(|| dicts::default_tensor(dim));
        Ok(PyDictionary { inner: dicts::spectral_element_dictionary(tree, order, tensor).map_err(to_py)?.into() })
    }

    #[staticmethod]
    fn fourier_pair(k_param: usize) -> PyResult<Self> {
        Ok(PyDictionary { inner: dicts::fourier_pair_dictionary(k_param).map_err(to_py)?.into() })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyDictionary { inner: dicts::Dictionary::from_json(text).map_err(to_py)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    /// `Psi(x)` as a list of complex numbers.
    fn eval(&self, x: Vec<f64>) -> PyResult<Vec<c64>> {
        if x.len() != self.inner.state_dim() {
            return Err(PyValueError::new_err(format!("expected a point of dimension {}", self.inner.state_dim())));
        }
        Ok(self.inner.row(&x))
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family()
    }

    #[getter]
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Dictionary(family={:?}, len={})", self.inner.family(), self.inner.len())
    }
}

/// Eigenvalues, eigenvectors and modes of a fitted Koopman matrix.
#[pyclass(name = "Decomposition", frozen)]
struct PyDecomposition {
    inner: KoopmanDecomposition,
}

impl PyDecomposition {
    fn dictionary(&self) -> PyResult<&dicts::Dictionary> {
        self.inner.dictionary.as_ref().ok_or_else(|| PyValueError::new_err("decomposition carries no dictionary"))
    }
}

#[pymethods]
impl PyDecomposition {
    /// Discrete-time eigenvalues sorted by decreasing modulus.
    #[getter]
    fn eigenvalues(&self) -> Vec<c64> {
        self.inner.mu.clone()
    }

    /// `ln(mu) / delta_t`, when the data carry a time step.
    #[getter]
    fn continuous_eigenvalues(&self) -> Option<Vec<c64>> {
        self.inner.lambda.clone()
    }

    #[getter]
    fn paired(&self) -> Vec<bool> {
        self.inner.paired.clone()
    }

    #[getter]
    fn rtol(&self) -> f64 {
        self.inner.rtol
    }

    /// Mode vectors, one per eigenvalue, or `None` without full-state weights.
    #[getter]
    fn modes(&self) -> Option<Vec<Vec<c64>>> {
        self.inner.modes.as_ref().map(|_| (0..self.inner.len()).map(|j| self.inner.mode(j).unwrap_or_default()).collect())
    }

    /// Eigenfunction values at `points`: one row per point, one column per index.
    #[pyo3(signature = (points, indices, normalize=true))]
    fn eigenfunctions(&self, points: Vec<Vec<f64>>, indices: Vec<usize>, normalize: bool) -> PyResult<Vec<Vec<c64>>> {
        let d = self.dictionary()?;
        let p = columns(&points, "points")?;
        let v = edmd::evaluate_eigenfunctions(&self.inner, d, p.as_ref(), &indices, normalize).map_err(to_py)?;
        Ok((0..v.nrows()).map(|i| (0..v.ncols()).map(|j| v[(i, j)]).collect()).collect())
    }

    /// State estimate `steps` applications of the map after `x0`.
    fn predict(&self, x0: Vec<f64>, steps: u32) -> PyResult<Vec<c64>> {
        edmd::predict(&self.inner, self.dictionary()?, &x0, steps).map_err(to_py)
    }

    /// Archive JSON.
    #[pyo3(signature = (seed=None))]
    fn to_json(&self, seed: Option<u64>) -> PyResult<String> {
        let a = DecompositionArchive::from_decomposition(&self.inner, Provenance { seed, ..Provenance::default() })
            .map_err(to_py)?;
        a.to_json().map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let a = DecompositionArchive::from_json(text).map_err(to_py)?;
        Ok(PyDecomposition { inner: a.to_decomposition().map_err(to_py)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let a = DecompositionArchive::load(&path).map_err(to_py)?;
        Ok(PyDecomposition { inner: a.to_decomposition().map_err(to_py)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Decomposition(len={}, rtol={:e})", self.inner.len(), self.inner.rtol)
    }
}

/// Fit EDMD to `snapshots` in the span of `dictionary`.
#[pyfunction]
#[pyo3(signature = (snapshots, dictionary, rtol=DEFAULT_RTOL, modes=true))]
fn fit(
    py: Python<'_>,
    snapshots: &PySnapshots,
    dictionary: &PyDictionary,
    rtol: f64,
    modes: bool,
) -> PyResult<PyDecomposition> {
    let (s, d) = (&snapshots.inner, &dictionary.inner);
    let inner = py.detach(|| edmd::fit(s, d, rtol, modes)).map_err(to_py)?;
    Ok(PyDecomposition { inner })
}

/// Exact DMD: eigenvalues and unit-norm modes of `Y X^+`.
#[pyfunction]
#[pyo3(signature = (snapshots, rtol=DEFAULT_RTOL))]
fn dmd(snapshots: &PySnapshots, rtol: f64) -> PyResult<(Vec<c64>, Vec<Vec<c64>>)> {
    let r = edmd::dmd(&snapshots.inner, rtol).map_err(to_py)?;
    let modes = (0..r.modes.ncols()).map(|j| (0..r.modes.nrows()).map(|i| r.modes[(i, j)]).collect()).collect();
    Ok((r.values, modes))
}

#[pyfunction]
fn lti_generate(m: usize, seed: u64) -> PyResult<PySnapshots> {
    Ok(PySnapshots { inner: bench::lti_generate(m, seed).map_err(to_py)? })
}

#[pyfunction]
#[pyo3(signature = (n_traj=1000, samples_per_traj=11, delta_t=0.25, seed=0))]
fn duffing_generate(n_traj: usize, samples_per_traj: usize, delta_t: f64, seed: u64) -> PyResult<PySnapshots> {
    Ok(PySnapshots { inner: bench::duffing_generate(n_traj, samples_per_traj, delta_t, seed).map_err(to_py)? })
}

#[pyfunction]
fn double_well_generate(sigma: f64, m: usize, seed: u64) -> PyResult<PySnapshots> {
    Ok(PySnapshots { inner: bench::double_well_generate(sigma, m, seed).map_err(to_py)? })
}

/// Embedded and intrinsic swiss-roll snapshots.
#[pyfunction]
#[pyo3(signature = (m, seed, epsilon=None))]
fn swiss_roll_generate(m: usize, seed: u64, epsilon: Option<f64>) -> PyResult<(PySnapshots, PySnapshots)> {
    let (a, b) = bench::swiss_roll_generate(epsilon, m, seed).map_err(to_py)?;
    Ok((PySnapshots { inner: a }, PySnapshots { inner: b }))
}

/// Grid, eigenvalues and the first `count` eigenvectors of the double-well
/// finite-difference generator.
#[pyfunction]
#[pyo3(signature = (sigma, n=1024, count=3))]
fn double_well_fd_oracle(sigma: f64, n: usize, count: usize) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let fd = bench::double_well_fd_oracle(sigma, n).map_err(to_py)?;
    let count = count.min(fd.grid.len());
    let vectors = (0..count).map(|k| fd.eigenvector(k)).collect();
    Ok((fd.grid, fd.eigenvalues[..count].to_vec(), vectors))
}

/// `(size, rank, nullity, eigenvalues)` for the closed-form Fourier-pair fixture.
#[pyfunction]
#[pyo3(signature = (k_param=8, rtol=DEFAULT_RTOL))]
fn appendix_check(k_param: usize, rtol: f64) -> PyResult<(usize, usize, usize, Vec<c64>)> {
    let r = bench::appendix_check(k_param, rtol).map_err(to_py)?;
    Ok((r.size, r.rank, r.nullity, r.eigenvalues))
}

#[pyfunction]
fn bundled_config(name: &str) -> PyResult<String> {
    kio::bundled_config(name)
        .map(str::to_string)
        .ok_or_else(|| PyValueError::new_err(format!("no bundled config named {name:?}")))
}

/// Run a TOML experiment config; returns the archive and report paths.
#[pyfunction]
#[pyo3(signature = (config, output_dir=None))]
fn run_experiment(py: Python<'_>, config: &str, output_dir: Option<PathBuf>) -> PyResult<(String, String)> {
    let mut cfg = ExperimentConfig::from_toml(config).map_err(to_py)?;
    cfg.apply_env();
    if let Some(dir) = output_dir {
        cfg.output.dir = dir;
    }
    let out = py.detach(|| kio::run_experiment(&cfg)).map_err(to_py)?;
    Ok((out.archive_path.display().to_string(), out.report_path.display().to_string()))
}

#[pymodule]
fn koopman(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySnapshots>()?;
    m.add_class::<PyDictionary>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(dmd, m)?)?;
    m.add_function(wrap_pyfunction!(lti_generate, m)?)?;
    m.add_function(wrap_pyfunction!(duffing_generate, m)?)?;
    m.add_function(wrap_pyfunction!(double_well_generate, m)?)?;
    m.add_function(wrap_pyfunction!(swiss_roll_generate, m)?)?;
    m.add_function(wrap_pyfunction!(double_well_fd_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(appendix_check, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("DEFAULT_RTOL", DEFAULT_RTOL)?;
    Ok(())
}
