use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;

use super::sde::SdeSpec;
use crate::edmd::SnapshotSet;
use crate::{Error, Result};

pub const SWISS_DELTA_T: f64 = 0.1;

/// `(s1, s2) -> ((s1 + 0.1) cos s1, s2, (s1 + 0.1) sin s1)`
pub fn swiss_embed(s: &[f64]) -> [f64; 3] {
    let r = s[0] + 0.1;
    [r * s[0].cos(), s[1], r * s[0].sin()]
}

/// Diffusion on `[0, 3 pi] x [0, 2 pi]` with amplitudes `(2, 2)`, or
/// `(2 / epsilon, 2)` when `epsilon` is given, reflected at the edges.
/// Returns the embedded pairs and the intrinsic pairs.
pub fn swiss_roll_generate(epsilon: Option<f64>, m_count: usize, seed: u64) -> Result<(SnapshotSet, SnapshotSet)> {
    if m_count == 0 {
        return Err(Error::input("m_count must be at least 1"));
    }
    let a1 = match epsilon {
        None => 2.0,
        Some(e) if e > 0.0 && e.is_finite() => 2.0 / e,
        Some(e) => return Err(Error::input(format!("epsilon must be positive, got {e}"))),
    };
    let spec = SdeSpec {
        drift: Arc::new(|_: &[f64], out: &mut [f64]| out.fill(0.0)),
        diffusion: vec![a1, 2.0],
        lo: vec![0.0, 0.0],
        hi: vec![3.0 * PI, 2.0 * PI],
        reflecting: vec![true, true],
        dt: 1e-3,
    };
    let (x, y) = spec.sample_pairs(m_count, 100, seed)?;
    let embed = |m: &Mat<f64>| {
        let pts: Vec<[f64; 3]> = (0..m.ncols()).map(|j| swiss_embed(&[m[(0, j)], m[(1, j)]])).collect();
        Mat::from_fn(3, m.ncols(), |a, j| pts[j][a])
    };
    let x3 = embed(&x);
    let y3 = embed(&y);
    Ok((SnapshotSet::new(x3, y3, Some(SWISS_DELTA_T))?, SnapshotSet::new(x, y, Some(SWISS_DELTA_T))?))
}

/// `-2 (i^2 / 9 + j^2 / 4)`
pub fn swiss_true_eigenvalue(i: u32, j: u32) -> f64 {
    let (i, j) = (i as f64, j as f64);
    -2.0 * (i * i / 9.0 + j * j / 4.0)
}

/// `cos(i s1 / 3) cos(j s2 / 2)`
pub fn swiss_eigenfunction(i: u32, j: u32, s: &[f64]) -> f64 {
    (i as f64 * s[0] / 3.0).cos() * (j as f64 * s[1] / 2.0).cos()
}
