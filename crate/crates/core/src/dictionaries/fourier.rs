use serde::{Deserialize, Serialize};

use super::Basis;
use crate::{c64, Error, Result};

/// Redundant planar Fourier dictionary `psi_k(x, y) = exp(i m x + i n y)` with
/// `m = (k mod p) - p/2`, `n = floor(k / p) - p/2` for `k = 0 ..= p^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierPairDictionary {
    pub k_param: usize,
}

pub fn fourier_pair_dictionary(k_param: usize) -> Result<FourierPairDictionary> {
    if k_param < 2 || k_param % 2 != 0 {
        return Err(Error::input(format!("k_param must be even and >= 2, got {k_param}")));
    }
    Ok(FourierPairDictionary { k_param })
}

impl FourierPairDictionary {
    /// Wavenumbers `(m, n)` of observable `k`.
    pub fn wavenumbers(&self, k: usize) -> (i64, i64) {
        let p = self.k_param as i64;
        let k = k as i64;
        (k % p - p / 2, k / p - p / 2)
    }
}

impl Basis for FourierPairDictionary {
    fn len(&self) -> usize {
        self.k_param * self.k_param + 1
    }
    fn state_dim(&self) -> usize {
        2
    }
    fn is_real(&self) -> bool {
        false
    }
    fn eval(&self, x: &[f64], out: &mut [c64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let (m, n) = self.wavenumbers(k);
            *o = c64::from_polar(1.0, m as f64 * x[0] + n as f64 * x[1]);
        }
    }
}
