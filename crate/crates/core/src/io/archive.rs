//! Versioned JSON archive of a decomposition.

use std::fs;
use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::dictionaries::Dictionary;
use crate::edmd::KoopmanDecomposition;
use crate::numerics::ComplexMatrix;
use crate::{c64, Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// `[re, im]`
pub type Complex2 = [f64; 2];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub system: Option<String>,
    pub seed: Option<u64>,
    /// SHA-256 of the canonical experiment configuration.
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub state_dim: Option<usize>,
    pub dictionary_size: usize,
    pub snapshots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionArchive {
    pub schema_version: u32,
    pub eigenvalues: Vec<Complex2>,
    /// `null` entries mark `mu = 0`, whose rate is undefined.
    pub continuous_eigenvalues: Option<Vec<Option<Complex2>>>,
    /// Columns of the right eigenvector matrix.
    pub right_eigenvectors: Vec<Vec<Complex2>>,
    pub left_eigenvectors: Vec<Vec<Complex2>>,
    /// One entry per eigenvalue; `null` where the pairing failed.
    pub modes: Option<Vec<Option<Vec<Complex2>>>>,
    pub paired: Vec<bool>,
    pub dictionary: Dictionary,
    pub rtol: f64,
    pub delta_t: Option<f64>,
    pub counts: Counts,
    pub provenance: Provenance,
}

fn pack(z: c64) -> Complex2 {
    [z.re, z.im]
}

fn unpack(z: Complex2) -> c64 {
    c64::new(z[0], z[1])
}

fn columns(m: &ComplexMatrix) -> Vec<Vec<Complex2>> {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| pack(m[(i, j)])).collect()).collect()
}

fn from_columns(cols: &[Vec<Complex2>], rows: usize, what: &str) -> Result<ComplexMatrix> {
    if cols.iter().any(|c| c.len() != rows) {
        return Err(Error::Serde(format!("{what}: every column must have {rows} entries")));
    }
    Ok(Mat::from_fn(rows, cols.len(), |i, j| unpack(cols[j][i])))
}

impl DecompositionArchive {
    pub fn from_decomposition(dec: &KoopmanDecomposition, provenance: Provenance) -> Result<Self> {
        let dictionary =
            dec.dictionary.clone().ok_or_else(|| Error::input("decomposition carries no dictionary"))?;
        let modes = dec.modes.as_ref().map(|m| {
            (0..dec.len())
                .map(|j| dec.paired[j].then(|| (0..m.nrows()).map(|i| pack(m[(i, j)])).collect()))
                .collect()
        });
        Ok(DecompositionArchive {
            schema_version: SCHEMA_VERSION,
            eigenvalues: dec.mu.iter().copied().map(pack).collect(),
            continuous_eigenvalues: dec
                .lambda
                .as_ref()
                .map(|l| l.iter().map(|z| z.re.is_finite().then(|| pack(*z))).collect()),
            right_eigenvectors: columns(&dec.xi),
            left_eigenvectors: columns(&dec.w),
            modes,
            paired: dec.paired.clone(),
            dictionary,
            rtol: dec.rtol,
            delta_t: dec.delta_t,
            counts: Counts { state_dim: dec.state_dim(), dictionary_size: dec.len(), snapshots: dec.m_count },
            provenance,
        })
    }

    pub fn to_decomposition(&self) -> Result<KoopmanDecomposition> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Serde(format!("unsupported schema_version {}", self.schema_version)));
        }
        let k = self.eigenvalues.len();
        if self.paired.len() != k || self.right_eigenvectors.len() != k || self.left_eigenvectors.len() != k {
            return Err(Error::Serde("eigenvalue and eigenvector counts differ".into()));
        }
        let modes = match &self.modes {
            None => None,
            Some(cols) => {
                let n = self.counts.state_dim.ok_or_else(|| Error::Serde("modes without state_dim".into()))?;
                if cols.len() != k {
                    return Err(Error::Serde("one mode entry per eigenvalue expected".into()));
                }
                let mut m = Mat::<c64>::zeros(n, k);
                for (j, col) in cols.iter().enumerate() {
                    if let Some(col) = col {
                        if col.len() != n {
                            return Err(Error::Serde(format!("mode {j} has {} entries, expected {n}", col.len())));
                        }
                        for (i, z) in col.iter().enumerate() {
                            m[(i, j)] = unpack(*z);
                        }
                    }
                }
                Some(m)
            }
        };
        let mut dictionary = self.dictionary.clone();
        dictionary.rebuild();
        Ok(KoopmanDecomposition {
            mu: self.eigenvalues.iter().copied().map(unpack).collect(),
            lambda: self
                .continuous_eigenvalues
                .as_ref()
                .map(|l| l.iter().map(|z| z.map_or(c64::new(f64::NEG_INFINITY, 0.0), unpack)).collect()),
            xi: from_columns(&self.right_eigenvectors, k, "right_eigenvectors")?,
            w: from_columns(&self.left_eigenvectors, k, "left_eigenvectors")?,
            modes,
            paired: self.paired.clone(),
            dictionary: Some(dictionary),
            rtol: self.rtol,
            delta_t: self.delta_t,
            m_count: self.counts.snapshots,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut a: DecompositionArchive = serde_json::from_str(text)?;
        a.dictionary.rebuild();
        Ok(a)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| e.context(&path.display().to_string()))
    }
}
