use serde::{Deserialize, Serialize};

use super::Basis;
use crate::{c64, Error, Result};

/// Physicists' Hermite polynomials `H_0(x) ..= H_n(x)`.
pub fn hermite_values(x: f64, n: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n >= 1 {
        out.push(2.0 * x);
    }
    for k in 1..n {
        let next = 2.0 * x * out[k] - 2.0 * k as f64 * out[k - 1];
        out.push(next);
    }
}

/// Tensor products `prod_d H_{terms[k][d]}(x_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteDictionary {
    pub dim: usize,
    /// One multi-index per observable, in dictionary order.
    pub terms: Vec<Vec<u32>>,
}

/// All `(max_order + 1)^dim` products with each per-coordinate order at most
/// `max_order`; the first coordinate's order varies fastest.
pub fn hermite_dictionary(dim: usize, max_order: usize) -> Result<HermiteDictionary> {
    if dim == 0 {
        return Err(Error::input("hermite dictionary needs dim >= 1"));
    }
    let per = max_order + 1;
    let count = per
        .checked_pow(dim as u32)
        .filter(|&c| c <= 1 << 24)
        .ok_or_else(|| Error::input("hermite dictionary too large"))?;
    let terms = (0..count)
        .map(|mut k| {
            (0..dim)
                .map(|_| {
                    let o = (k % per) as u32;
                    k /= per;
                    o
                })
                .collect()
        })
        .collect();
    Ok(HermiteDictionary { dim, terms })
}

impl HermiteDictionary {
    /// Append further products (e.g. `H_5(x) H_0(y)`) after the existing terms.
    pub fn with_terms(mut self, extra: impl IntoIterator<Item = Vec<u32>>) -> Result<Self> {
        for t in extra {
            if t.len() != self.dim {
                return Err(Error::input(format!("multi-index {t:?} does not have {} entries", self.dim)));
            }
            if self.terms.contains(&t) {
                return Err(Error::input(format!("multi-index {t:?} already present")));
            }
            self.terms.push(t);
        }
        Ok(self)
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().flatten().copied().max().unwrap_or(0) as usize
    }

    /// Position of the product with the given multi-index.
    pub fn index_of(&self, term: &[u32]) -> Option<usize> {
        self.terms.iter().position(|t| t == term)
    }
}

impl Basis for HermiteDictionary {
    fn len(&self) -> usize {
        self.terms.len()
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
        let n = self.max_degree();
        let mut buf = Vec::with_capacity(n + 1);
        let tables: Vec<Vec<f64>> = x[..self.dim]
            .iter()
            .map(|&v| {
                hermite_values(v, n, &mut buf);
                buf.clone()
            })
            .collect();
        for (o, t) in out.iter_mut().zip(&self.terms) {
            *o = t.iter().zip(&tables).map(|(&k, tab)| tab[k as usize]).product();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_ordering() {
        let d = hermite_dictionary(2, 4).unwrap();
        assert_eq!(d.len(), 25);
        assert_eq!(d.terms[1], vec![1, 0]);
        assert_eq!(d.terms[5], vec![0, 1]);
        assert_eq!(d.terms[24], vec![4, 4]);
    }

    #[test]
    fn one_dimensional_values() {
        // H_2(1) = 4 - 2 = 2
        let d = hermite_dictionary(1, 2).unwrap();
        let r: Vec<f64> = d.row(&[1.0]).iter().map(|z| z.re).collect();
        assert_eq!(r, vec![1.0, 2.0, 2.0]);
    }

    #[test]
    fn order_zero_is_constant() {
        let d = hermite_dictionary(3, 0).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.row(&[0.3, -7.0, 2.0])[0], c64::new(1.0, 0.0));
    }

    #[test]
    fn closed_forms() {
        let mut v = Vec::new();
        for &x in &[-1.3, 0.0, 0.4, 2.2] {
            hermite_values(x, 5, &mut v);
            let x2 = x * x;
            let want = [
                1.0,
                2.0 * x,
                4.0 * x2 - 2.0,
                8.0 * x2 * x - 12.0 * x,
                16.0 * x2 * x2 - 48.0 * x2 + 12.0,
                32.0 * x2 * x2 * x - 160.0 * x2 * x + 120.0 * x,
            ];
            for (a, b) in v.iter().zip(want) {
                assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn augmenting() {
        let d = hermite_dictionary(2, 4).unwrap().with_terms([vec![5, 0], vec![0, 5]]).unwrap();
        assert_eq!(d.len(), 27);
        assert_eq!(d.index_of(&[5, 0]), Some(25));
        assert!(hermite_dictionary(2, 1).unwrap().with_terms([vec![1, 0]]).is_err());
    }
}
