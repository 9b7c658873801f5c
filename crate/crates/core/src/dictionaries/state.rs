use serde::{Deserialize, Serialize};

use super::Basis;
use crate::{c64, Error, Result};

/// Coordinate projections `psi_i(x) = x_i`; EDMD with this dictionary is DMD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDictionary {
    pub n: usize,
}

pub fn state_dictionary(n: usize) -> Result<StateDictionary> {
    if n == 0 {
        return Err(Error::input("state dictionary needs n >= 1"));
    }
    Ok(StateDictionary { n })
}

impl Basis for StateDictionary {
    fn len(&self) -> usize {
        self.n
    }
    fn state_dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[f64], out: &mut [c64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = c64::new(v, 0.0);
        }
    }
    fn eval_real(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&x[..self.n]);
    }
}
