use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{Basis, BoxTree};
use crate::{c64, Error, Result};

/// Legendre polynomials `P_0(t) ..= P_order(t)` into `out`.
pub fn legendre_values(t: f64, order: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if order >= 1 {
        out.push(t);
    }
    for n in 1..order {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * t * out[n] - nf * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
}

/// Piecewise Legendre polynomials, one block per leaf of a [`BoxTree`].
///
/// Inside a leaf each coordinate is mapped affinely onto `[-1, 1]`; all
/// functions of other leaves vanish there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralElementDictionary {
    pub tree: BoxTree,
    pub order: usize,
    pub tensor: bool,
    /// Per-leaf multi-indices of Legendre degrees, shared by every leaf.
    pub exponents: Vec<Vec<u32>>,
}

/// Default product rule: full tensor in 1D, total degree otherwise.
pub fn default_tensor(dim: usize) -> bool {
    dim == 1
}

pub fn spectral_element_dictionary(tree: BoxTree, order: usize, tensor: bool) -> Result<SpectralElementDictionary> {
    if tree.leaves.is_empty() {
        return Err(Error::input("box tree has no leaves"));
    }
    let n = tree.dim();
    let side = order + 1;
    let total = side.checked_pow(n as u32).ok_or_else(|| Error::input("polynomial order too large"))?;
    let mut exponents: Vec<Vec<u32>> = (0..total)
        .map(|mut flat| {
            (0..n)
                .map(|_| {
                    let e = flat % side;
                    flat /= side;
                    e as u32
                })
                .collect::<Vec<u32>>()
        })
        .filter(|e| tensor || e.iter().sum::<u32>() as usize <= order)
        .collect();
    if !tensor {
        exponents.sort_by_key(|e| e.iter().sum::<u32>());
    }
    Ok(SpectralElementDictionary { tree, order, tensor, exponents })
}

impl SpectralElementDictionary {
    pub fn per_leaf(&self) -> usize {
        self.exponents.len()
    }

    pub fn index_of(&self, exponent: &[u32]) -> Option<usize> {
        self.exponents.iter().position(|e| e == exponent)
    }

    fn local(&self, leaf: usize, x: &[f64], out: &mut [f64]) {
        let b = self.tree.leaf_bounds(leaf);
        let mut tables = Vec::with_capacity(x.len());
        let mut buf = Vec::with_capacity(self.order + 1);
        for (a, v) in x.iter().enumerate() {
            let t = 2.0 * (v - b.lo[a]) / (b.hi[a] - b.lo[a]) - 1.0;
            legendre_values(t, self.order, &mut buf);
            tables.push(buf.clone());
        }
        for (o, e) in out.iter_mut().zip(&self.exponents) {
            *o = e.iter().enumerate().map(|(a, &k)| tables[a][k as usize]).product();
        }
    }
}

impl Basis for SpectralElementDictionary {
    fn len(&self) -> usize {
        self.tree.leaves.len() * self.per_leaf()
    }
    fn state_dim(&self) -> usize {
        self.tree.dim()
    }
    fn eval(&self, x: &[f64], out: &mut [c64]) {
        let mut re = vec![0.0; self.len()];
        self.eval_real(x, &mut re);
        for (o, v) in out.iter_mut().zip(re) {
            *o = c64::new(v, 0.0);
        }
    }
    fn eval_real(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        if let Some(leaf) = self.tree.locate(x) {
            let p = self.per_leaf();
            self.local(leaf, x, &mut out[leaf * p..(leaf + 1) * p]);
        }
    }
    fn block(&self, x: &[f64]) -> Option<Range<usize>> {
        let p = self.per_leaf();
        Some(match self.tree.locate(x) {
            Some(leaf) => leaf * p..(leaf + 1) * p,
            None => 0..0,
        })
    }
}
