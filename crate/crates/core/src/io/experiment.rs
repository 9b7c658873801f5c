//! Config-driven runs, oracle comparisons and grid evaluation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use faer::Mat;

use super::archive::{DecompositionArchive, Provenance};
use super::config::{DictionaryConfig, ExperimentConfig, SystemConfig};
use super::csv::{fmt_f64, read_snapshots, write_snapshots};
use crate::benchmarks::{
    double_well_fd_oracle, double_well_generate, duffing_generate, lti_generate, lti_true_eigen, swiss_embed,
    swiss_roll_generate,
};
use crate::dictionaries::{
    build_box_tree, build_occupied_tree, default_tensor, hermite_dictionary, spectral_element_dictionary, state_dictionary,
    thin_plate_rbf_dictionary, fourier_pair_dictionary, Basis, BoxBounds, Dictionary,
};
use crate::edmd::{correlation_modulus, evaluate_eigenfunctions, fit, KoopmanDecomposition, SnapshotSet};
use crate::numerics::kmeans;
use crate::{c64, Error, Result};

/// Generate or load the snapshot pairs described by `system`.
pub fn load_system(system: &SystemConfig) -> Result<SnapshotSet> {
    match system {
        SystemConfig::Lti { m, seed } => lti_generate(*m, *seed),
        SystemConfig::Duffing { n_traj, samples_per_traj, delta_t, seed } => {
            duffing_generate(*n_traj, *samples_per_traj, *delta_t, *seed)
        }
        SystemConfig::DoubleWell { sigma, m, seed } => double_well_generate(*sigma, *m, *seed),
        SystemConfig::SwissRoll { epsilon, m, seed } => Ok(swiss_roll_generate(*epsilon, *m, *seed)?.0),
        SystemConfig::ExternalFile { path, delta_t } => {
            let mut s = read_snapshots(path)?;
            s.delta_t = *delta_t;
            Ok(s)
        }
    }
}

/// Columns of `X` followed by the columns of `Y`.
fn stacked(s: &SnapshotSet) -> Mat<f64> {
    let m = s.len();
    Mat::from_fn(s.state_dim(), 2 * m, |i, j| if j < m { s.x[(i, j)] } else { s.y[(i, j - m)] })
}

/// Data bounding box, widened by a relative margin so boundary points are interior.
fn bounding_box(points: &Mat<f64>) -> Result<BoxBounds> {
    let n = points.nrows();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for j in 0..points.ncols() {
        for i in 0..n {
            lo[i] = lo[i].min(points[(i, j)]);
            hi[i] = hi[i].max(points[(i, j)]);
        }
    }
    for i in 0..n {
        let pad = 1e-9 * (hi[i] - lo[i]).abs().max(1.0);
        lo[i] -= pad;
        hi[i] += pad;
    }
    BoxBounds::new(lo, hi)
}

/// Build the dictionary for `cfg`, using the data where the family is
/// data-dependent (k-means centers, box subdivision).
pub fn build_dictionary(cfg: &DictionaryConfig, s: &SnapshotSet, seed: u64) -> Result<Dictionary> {
    let n = s.state_dim();
    Ok(match cfg {
        DictionaryConfig::Hermite { max_order, extra_terms } => {
            hermite_dictionary(n, *max_order)?.with_terms(extra_terms.iter().cloned())?.into()
        }
        DictionaryConfig::ThinPlate { centers, include_constant, kmeans_seed } => {
            let pts = stacked(s);
            let km = kmeans(pts.as_ref(), *centers, kmeans_seed.unwrap_or(seed))?;
            thin_plate_rbf_dictionary(km.centers.as_ref(), *include_constant)?.into()
        }
        DictionaryConfig::SpectralElement { order, max_points, max_depth, uniform, lo, hi, tensor } => {
            let pts = stacked(s);
            let root = match (lo, hi) {
                (Some(lo), Some(hi)) => BoxBounds::new(lo.clone(), hi.clone())?,
                _ => bounding_box(&pts)?,
            };
            let tree = if *uniform {
                build_occupied_tree(pts.as_ref(), root, *max_depth)?
            } else {
                build_box_tree(pts.as_ref(), root, max_points.unwrap_or(1), *max_depth)?
            };
            spectral_element_dictionary(tree, *order, tensor.unwrap_or_else(|| default_tensor(n)))?.into()
        }
        DictionaryConfig::State => state_dictionary(n)?.into(),
        DictionaryConfig::FourierPair { k_param } => fourier_pair_dictionary(*k_param)?.into(),
    })
}

/// One row per eigenvalue: index, |mu|, mu, lambda, mode norm, pairing flag.
pub fn report_csv(dec: &KoopmanDecomposition) -> String {
    let mut out = String::from("index,abs_mu,mu_re,mu_im,lambda_re,lambda_im,mode_norm,paired\n");
    for j in 0..dec.len() {
        let mu = dec.mu[j];
        let (lre, lim) = match &dec.lambda {
            Some(l) if l[j].re.is_finite() => (fmt_f64(l[j].re), fmt_f64(l[j].im)),
            Some(_) => ("-inf".to_string(), fmt_f64(0.0)),
            None => (String::new(), String::new()),
        };
        let norm = dec.mode_norm(j).map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{j},{},{},{},{lre},{lim},{norm},{}",
            fmt_f64(mu.norm()),
            fmt_f64(mu.re),
            fmt_f64(mu.im),
            dec.paired[j]
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub archive: DecompositionArchive,
    pub report: String,
    pub archive_path: PathBuf,
    pub report_path: PathBuf,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Run a configured experiment end to end and write the archive and report
/// into `output.dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let ctx = |stage: &str| format!("{} experiment, {stage}", cfg.system.name());
    let seed = cfg.system.seed();
    let s = load_system(&cfg.system).map_err(|e| e.context(&ctx("data")))?;
    let d = build_dictionary(&cfg.dictionary, &s, seed.unwrap_or(0)).map_err(|e| e.context(&ctx("dictionary")))?;
    let dec = fit(&s, &d, cfg.edmd.rtol, cfg.edmd.modes).map_err(|e| e.context(&ctx("fit")))?;
    let provenance = Provenance { system: Some(cfg.system.name().to_string()), seed, config_hash: Some(cfg.hash()?) };
    let archive = DecompositionArchive::from_decomposition(&dec, provenance)?;
    let report = report_csv(&dec);

    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let archive_path = dir.join(&cfg.output.archive);
    let report_path = dir.join(&cfg.output.report);
    archive.save(&archive_path)?;
    write_text(&report_path, &report)?;
    if let Some(name) = &cfg.output.snapshots {
        write_snapshots(&s, &dir.join(name))?;
    }
    Ok(ExperimentOutput { archive, report, archive_path, report_path })
}

/// Reference spectrum to compare an archive against.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleSpec {
    /// Closed-form eigenpairs `mu = 0.9^i 0.8^j` of the linear map.
    Lti { pairs: Vec<(u32, u32)> },
    /// The leading `count` eigenpairs of the `n`-point finite-difference generator.
    DoubleWellFd { sigma: f64, n: usize, count: usize },
    /// Cosine eigenpairs of the swiss-roll diffusion, probed on an
    /// intrinsic grid of `grid[0] x grid[1]` points.
    SwissRoll { epsilon: Option<f64>, pairs: Vec<(u32, u32)>, grid: [usize; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    /// Index of the matched computed eigenvalue.
    pub index: usize,
    pub reference: c64,
    pub computed: c64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// `|<phi_ref, phi>| / (|phi_ref| |phi|)` on the oracle's probe points.
    pub correlation: f64,
}

fn nearest(dec: &KoopmanDecomposition, target: c64, taken: &[bool]) -> usize {
    (0..dec.len())
        .filter(|&j| !taken[j] && dec.rate_or_mu(j).re.is_finite())
        .min_by(|&a, &b| (dec.rate_or_mu(a) - target).norm().total_cmp(&(dec.rate_or_mu(b) - target).norm()))
        .unwrap_or(0)
}

struct Reference {
    label: String,
    value: c64,
    phi: Vec<f64>,
}

fn match_references(
    dec: &KoopmanDecomposition,
    d: &Dictionary,
    probes: &Mat<f64>,
    refs: Vec<Reference>,
) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::with_capacity(refs.len());
    let mut taken = vec![false; dec.len()];
    for r in refs {
        let j = nearest(dec, r.value, &taken);
        taken[j] = true;
        let computed = dec.rate_or_mu(j);
        let vals = evaluate_eigenfunctions(dec, d, probes.as_ref(), &[j], false)?;
        let col: Vec<c64> = (0..vals.nrows()).map(|i| vals[(i, 0)]).collect();
        let reference: Vec<c64> = r.phi.iter().map(|&v| c64::new(v, 0.0)).collect();
        let abs_err = (computed - r.value).norm();
        let scale = r.value.norm();
        rows.push(ComparisonRow {
            label: r.label,
            index: j,
            reference: r.value,
            computed,
            abs_err,
            rel_err: if scale > 0.0 { abs_err / scale } else { abs_err },
            correlation: correlation_modulus(&reference, &col),
        });
    }
    Ok(rows)
}

/// Match each oracle eigenvalue, in order, to the nearest computed one not
/// already matched and report the errors and eigenfunction correlation.
pub fn compare_to_oracle(archive: &DecompositionArchive, oracle: &OracleSpec) -> Result<Vec<ComparisonRow>> {
    let dec = archive.to_decomposition()?;
    let d = dec.dictionary.clone().ok_or_else(|| Error::input("archive carries no dictionary"))?;
    if dec.is_empty() {
        return Err(Error::input("archive holds no eigenvalues"));
    }
    match oracle {
        OracleSpec::Lti { pairs } => {
            if d.state_dim() != 2 {
                return Err(Error::input(format!("LTI oracle needs a 2D dictionary, found {}D", d.state_dim())));
            }
            if pairs.len() > dec.len() {
                return Err(Error::input(format!("oracle index out of range: {} pairs for {} eigenvalues", pairs.len(), dec.len())));
            }
            let probes = GridSpec { lo: vec![-2.0; 2], hi: vec![2.0; 2], counts: vec![21, 21] }.points()?;
            let refs = pairs
                .iter()
                .map(|&(i, j)| {
                    let e = lti_true_eigen(i, j);
                    let phi = (0..probes.ncols()).map(|c| e.phi(&[probes[(0, c)], probes[(1, c)]])).collect();
                    Reference { label: format!("{i}:{j}"), value: c64::new(e.mu, 0.0), phi }
                })
                .collect();
            match_references(&dec, &d, &probes, refs)
        }
        OracleSpec::DoubleWellFd { sigma, n, count } => {
            if d.state_dim() != 1 {
                return Err(Error::input("double-well oracle needs a 1D dictionary"));
            }
            if dec.lambda.is_none() {
                return Err(Error::input("double-well comparison needs delta_t in the archive"));
            }
            if *count > *n || *count > dec.len() {
                return Err(Error::input(format!("oracle index out of range: {count} eigenpairs requested")));
            }
            let fd = double_well_fd_oracle(*sigma, *n)?;
            let probes = Mat::from_fn(1, fd.grid.len(), |_, j| fd.grid[j]);
            let refs = (0..*count)
                .map(|k| Reference { label: format!("fd{k}"), value: c64::new(fd.eigenvalues[k], 0.0), phi: fd.eigenvector(k) })
                .collect();
            match_references(&dec, &d, &probes, refs)
        }
        OracleSpec::SwissRoll { epsilon, pairs, grid } => {
            if d.state_dim() != 3 {
                return Err(Error::input("swiss-roll oracle needs a 3D dictionary"));
            }
            if dec.lambda.is_none() {
                return Err(Error::input("swiss-roll comparison needs delta_t in the archive"));
            }
            if pairs.len() > dec.len() {
                return Err(Error::input(format!("oracle index out of range: {} pairs for {} eigenvalues", pairs.len(), dec.len())));
            }
            let pi = std::f64::consts::PI;
            let intrinsic = GridSpec { lo: vec![0.0, 0.0], hi: vec![3.0 * pi, 2.0 * pi], counts: grid.to_vec() }.points()?;
            let probes = Mat::from_fn(3, intrinsic.ncols(), |a, c| swiss_embed(&[intrinsic[(0, c)], intrinsic[(1, c)]])[a]);
            let stretch = epsilon.map_or(1.0, |e| 1.0 / (e * e));
            let refs = pairs
                .iter()
                .map(|&(i, j)| {
                    let (fi, fj) = (i as f64, j as f64);
                    let value = -2.0 * (stretch * fi * fi / 9.0 + fj * fj / 4.0);
                    let phi = (0..intrinsic.ncols())
                        .map(|c| (fi * intrinsic[(0, c)] / 3.0).cos() * (fj * intrinsic[(1, c)] / 2.0).cos())
                        .collect();
                    Reference { label: format!("{i}:{j}"), value: c64::new(value, 0.0), phi }
                })
                .collect();
            match_references(&dec, &d, &probes, refs)
        }
    }
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("label,index,ref_re,ref_im,computed_re,computed_im,abs_err,rel_err,correlation\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.label,
            r.index,
            fmt_f64(r.reference.re),
            fmt_f64(r.reference.im),
            fmt_f64(r.computed.re),
            fmt_f64(r.computed.im),
            fmt_f64(r.abs_err),
            fmt_f64(r.rel_err),
            fmt_f64(r.correlation)
        );
    }
    out
}

/// Tensor grid with `counts[i]` equispaced points on `[lo[i], hi[i]]`; a
/// count of one places the point at `lo[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points as columns, first coordinate varying fastest.
    pub fn points(&self) -> Result<Mat<f64>> {
        let n = self.dim();
        if self.hi.len() != n || self.counts.len() != n || n == 0 {
            return Err(Error::input("grid lo, hi and counts must have the same nonzero length"));
        }
        if self.counts.contains(&0) {
            return Err(Error::input("grid counts must be positive"));
        }
        if self.lo.iter().zip(&self.hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::input("grid bounds must be finite with lo <= hi"));
        }
        let coord = |i: usize, k: usize| {
            let c = self.counts[i];
            if c == 1 {
                self.lo[i]
            } else {
                self.lo[i] + (self.hi[i] - self.lo[i]) * k as f64 / (c - 1) as f64
            }
        };
        Ok(Mat::from_fn(n, self.len(), |i, j| {
            let stride: usize = self.counts[..i].iter().product();
            coord(i, (j / stride) % self.counts[i])
        }))
    }
}

/// Sup-normalized eigenfunction values on a grid. Columns are the grid
/// coordinates followed by `re`, `im` per requested index.
pub fn eval_grid(archive: &DecompositionArchive, grid: &GridSpec, indices: &[usize]) -> Result<String> {
    let dec = archive.to_decomposition()?;
    let d = dec.dictionary.as_ref().ok_or_else(|| Error::input("archive carries no dictionary"))?;
    if grid.dim() != d.state_dim() {
        return Err(Error::input(format!("grid has dimension {} but the dictionary expects {}", grid.dim(), d.state_dim())));
    }
    let points = grid.points()?;
    if let Dictionary::SpectralElement(se) = d {
        let root = &se.tree.root;
        if !root.contains(&grid.lo) || !root.contains(&grid.hi) {
            return Err(Error::input("grid extends outside the dictionary domain"));
        }
    }
    let vals = evaluate_eigenfunctions(&dec, d, points.as_ref(), indices, true)?;
    let mut out = String::new();
    let header: Vec<String> = (1..=grid.dim())
        .map(|i| format!("x{i}"))
        .chain(indices.iter().flat_map(|j| [format!("phi{j}_re"), format!("phi{j}_im")]))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in 0..points.ncols() {
        let fields: Vec<String> = (0..grid.dim())
            .map(|i| fmt_f64(points[(i, r)]))
            .chain((0..indices.len()).flat_map(|c| [fmt_f64(vals[(r, c)].re), fmt_f64(vals[(r, c)].im)]))
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::bundled_config;

    fn lti_archive() -> DecompositionArchive {
        let s = lti_generate(100, 7).unwrap();
        let d: Dictionary = hermite_dictionary(2, 4).unwrap().into();
        let dec = fit(&s, &d, 1e-10, true).unwrap();
        DecompositionArchive::from_decomposition(&dec, Provenance::default()).unwrap()
    }

    #[test]
    fn grid_points_first_coordinate_fastest() {
        let g = GridSpec { lo: vec![0.0, 10.0], hi: vec![1.0, 12.0], counts: vec![2, 3] };
        let p = g.points().unwrap();
        assert_eq!(p.ncols(), 6);
        assert_eq!((p[(0, 1)], p[(1, 1)]), (1.0, 10.0));
        assert_eq!((p[(0, 2)], p[(1, 2)]), (0.0, 11.0));
        let one = GridSpec { lo: vec![0.5], hi: vec![0.5], counts: vec![1] };
        assert_eq!(one.points().unwrap().ncols(), 1);
    }

    #[test]
    fn constant_eigenfunction_evaluates_to_one() {
        let a = lti_archive();
        let g = GridSpec { lo: vec![-2.0; 2], hi: vec![2.0; 2], counts: vec![5, 5] };
        let csv = eval_grid(&a, &g, &[0]).unwrap();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], "x1,x2,phi0_re,phi0_im");
        assert_eq!(rows.len(), 26);
        for row in &rows[1..] {
            let f: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
            assert!((f[2] - 1.0).abs() < 1e-6 && f[3].abs() < 1e-6, "{row}");
        }
        let single = GridSpec { lo: vec![0.3, 0.1], hi: vec![0.3, 0.1], counts: vec![1, 1] };
        assert_eq!(eval_grid(&a, &single, &[0, 1]).unwrap().lines().count(), 2);
    }

    #[test]
    fn lti_comparison_and_range_errors() {
        let a = lti_archive();
        let pairs = vec![(0, 0), (1, 0), (0, 1), (2, 0)];
        let rows = compare_to_oracle(&a, &OracleSpec::Lti { pairs }).unwrap();
        for r in &rows {
            assert!(r.rel_err < 1e-6, "{r:?}");
            assert!(r.correlation > 1.0 - 1e-8, "{r:?}");
        }
        let too_many = vec![(0, 0); 26];
        assert!(matches!(compare_to_oracle(&a, &OracleSpec::Lti { pairs: too_many }), Err(Error::Input(_))));
        let csv = comparison_csv(&rows);
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn lti_experiment_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::from_toml(bundled_config("lti").unwrap()).unwrap();
        cfg.output.dir = dir.path().to_path_buf();
        let first = run_experiment(&cfg).unwrap();
        let text = fs::read_to_string(&first.archive_path).unwrap();
        let second = run_experiment(&cfg).unwrap();
        assert_eq!(fs::read_to_string(&second.archive_path).unwrap(), text);
        let abs: Vec<f64> = first.report.lines().skip(1).take(4).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        for (got, want) in abs.iter().zip([1.0, 0.9, 0.81, 0.8]) {
            assert!((got - want).abs() < 1e-8, "{abs:?}");
        }
    }
}
