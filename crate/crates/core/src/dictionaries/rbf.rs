use faer::MatRef;
use serde::{Deserialize, Serialize};

use super::Basis;
use crate::{c64, Error, Result};

/// `r^2 ln r`, continuously extended by 0 at `r = 0`.
pub fn thin_plate(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * r * r.ln()
    }
}

/// Thin-plate spline radial basis functions, optionally preceded by the constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinPlateDictionary {
    pub dim: usize,
    pub centers: Vec<Vec<f64>>,
    pub include_constant: bool,
    /// Number of centers that repeat an earlier one (the dictionary is then redundant).
    pub duplicate_centers: usize,
}

/// Build from a `dim x n_centers` matrix of centers (one per column).
pub fn thin_plate_rbf_dictionary(centers: MatRef<'_, f64>, include_constant: bool) -> Result<ThinPlateDictionary> {
    if centers.ncols() == 0 || centers.nrows() == 0 {
        return Err(Error::input("thin-plate dictionary needs at least one center"));
    }
    crate::numerics::ensure_finite_real(centers, "centers")?;
    let cols: Vec<Vec<f64>> = (0..centers.ncols()).map(|j| crate::numerics::column(centers, j)).collect();
    let mut sorted = cols.clone();
    sorted.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    let duplicate_centers = sorted.windows(2).filter(|w| w[0] == w[1]).count();
    Ok(ThinPlateDictionary { dim: centers.nrows(), centers: cols, include_constant, duplicate_centers })
}

impl Basis for ThinPlateDictionary {
    fn len(&self) -> usize {
        self.centers.len() + self.include_constant as usize
    }
    fn state_dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], out: &mut [c64]) {
        let mut re = vec![0.0; self.len()];
        self.eval_real(x, &mut re);
        for (o, v) in out.iter_mut().zip(re) {
            *o = c64::new(v, 0.0);
        }
    }
    fn eval_real(&self, x: &[f64], out: &mut [f64]) {
        let offset = self.include_constant as usize;
        if self.include_constant {
            out[0] = 1.0;
        }
        for (o, c) in out[offset..].iter_mut().zip(&self.centers) {
            let r2: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            // r^2 ln r = r^2 ln(r^2) / 2
            *o = if r2 == 0.0 { 0.0 } else { 0.5 * r2 * r2.ln() };
        }
    }
}
