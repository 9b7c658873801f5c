use faer::MatRef;

use super::{align_phase, evaluate_eigenfunctions, fit, KoopmanDecomposition, SnapshotSet};
use crate::dictionaries::{Basis, Dictionary};
use crate::numerics::fit_loglog_slope;
use crate::{c64, Error, Result};

/// Reference eigenpair: a value comparable with [`KoopmanDecomposition::rate_or_mu`]
/// and the eigenfunction sampled at probe points (columns of `probes`).
#[derive(Debug, Clone, Copy)]
pub struct ReferenceEigenpair<'a> {
    pub value: c64,
    pub probes: MatRef<'a, f64>,
    pub phi: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub m_values: Vec<usize>,
    pub eigenvalue_errors: Vec<f64>,
    pub eigenfunction_errors: Vec<f64>,
    /// Log-log slope of eigenfunction error against `M`.
    pub slope: f64,
    /// Errors sit at round-off level, so the slope carries no information.
    pub floor_limited: bool,
}

/// Index of the first eigenvalue, in sorted order, other than the one whose
/// eigenfunction is closest to a constant on the probe points.
pub fn leading_nontrivial(dec: &KoopmanDecomposition, d: &dyn Basis, probes: MatRef<'_, f64>) -> Result<Option<usize>> {
    if dec.len() < 2 {
        return Ok(None);
    }
    let head: Vec<usize> = (0..dec.len().min(3)).collect();
    let vals = evaluate_eigenfunctions(dec, d, probes, &head, false)?;
    let constancy = |j: usize| {
        let col: Vec<c64> = (0..vals.nrows()).map(|i| vals[(i, j)]).collect();
        let mean = col.iter().sum::<c64>() / col.len() as f64;
        let rms = (col.iter().map(|z| z.norm_sqr()).sum::<f64>() / col.len() as f64).sqrt();
        if rms == 0.0 {
            0.0
        } else {
            mean.norm() / rms
        }
    };
    let trivial = head.iter().copied().max_by(|&a, &b| constancy(a).total_cmp(&constancy(b))).unwrap_or(0);
    Ok((0..dec.len()).find(|&j| j != trivial))
}

/// Relative L2 distance between two sampled functions after both are scaled
/// to unit norm and phase aligned.
pub(crate) fn normalized_l2_error(reference: &[f64], computed: &[c64]) -> f64 {
    let rnorm = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    let cnorm = computed.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if rnorm == 0.0 || cnorm == 0.0 {
        return f64::INFINITY;
    }
    let r: Vec<c64> = reference.iter().map(|&v| c64::new(v / rnorm, 0.0)).collect();
    let c: Vec<c64> = computed.iter().map(|z| z / cnorm).collect();
    let c = align_phase(&r, &c);
    r.iter().zip(&c).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// Run EDMD for each `M` (averaging `replicates` independent data sets) and
/// record the error of the leading nontrivial eigenpair against `reference`.
pub fn convergence_study(
    generator: &mut dyn FnMut(usize, usize) -> Result<SnapshotSet>,
    d: &Dictionary,
    m_values: &[usize],
    replicates: usize,
    rtol: f64,
    reference: &ReferenceEigenpair<'_>,
) -> Result<ConvergenceReport> {
    if m_values.windows(2).any(|w| w[0] >= w[1]) || m_values.is_empty() {
        return Err(Error::input("m_values must be nonempty and strictly increasing"));
    }
    if replicates == 0 {
        return Err(Error::input("need at least one replicate"));
    }
    if reference.phi.len() != reference.probes.ncols() {
        return Err(Error::input("reference eigenfunction and probe counts differ"));
    }
    let mut eigenvalue_errors = Vec::new();
    let mut eigenfunction_errors = Vec::new();
    for &m in m_values {
        let (mut ev, mut ef) = (0.0, 0.0);
        for rep in 0..replicates {
            let s = generator(m, rep)?;
            let dec = fit(&s, d, rtol, false)?;
            let j = leading_nontrivial(&dec, d, reference.probes)?
                .ok_or_else(|| Error::numerical("no nontrivial eigenvalue"))?;
            ev += (dec.rate_or_mu(j) - reference.value).norm();
            let vals = evaluate_eigenfunctions(&dec, d, reference.probes, &[j], false)?;
            let col: Vec<c64> = (0..vals.nrows()).map(|i| vals[(i, 0)]).collect();
            ef += normalized_l2_error(reference.phi, &col);
        }
        eigenvalue_errors.push(ev / replicates as f64);
        eigenfunction_errors.push(ef / replicates as f64);
    }
    let floor_limited = eigenfunction_errors.iter().all(|&e| e < 1e-10);
    let xs: Vec<f64> = m_values.iter().map(|&m| m as f64).collect();
    let ys: Vec<f64> = eigenfunction_errors.iter().map(|&e| e.max(f64::MIN_POSITIVE)).collect();
    let slope = if xs.len() >= 3 { fit_loglog_slope(&xs, &ys)? } else { f64::NAN };
    Ok(ConvergenceReport { m_values: m_values.to_vec(), eigenvalue_errors, eigenfunction_errors, slope, floor_limited })
}
