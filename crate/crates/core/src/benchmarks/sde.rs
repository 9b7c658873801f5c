use std::sync::Arc;

use faer::{Mat, MatRef};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::{Error, Result};

pub type DriftFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Generator for trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fold `x` back into `[lo, hi]` by repeated mirroring about the violated bound.
pub fn reflect(mut x: f64, lo: f64, hi: f64) -> f64 {
    for _ in 0..64 {
        if x < lo {
            x = 2.0 * lo - x;
        } else if x > hi {
            x = 2.0 * hi - x;
        } else {
            return x;
        }
    }
    // far outside: fold by the period instead
    let w = hi - lo;
    let t = (x - lo).rem_euclid(2.0 * w);
    (lo + if t > w { 2.0 * w - t } else { t }).clamp(lo, hi)
}

/// `dx = f(x) dt + diag(diffusion) dW` on a box, with reflection on the
/// flagged coordinates.
#[derive(Clone)]
pub struct SdeSpec {
    pub drift: Arc<DriftFn>,
    pub diffusion: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub reflecting: Vec<bool>,
    pub dt: f64,
}

impl std::fmt::Debug for SdeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdeSpec")
            .field("diffusion", &self.diffusion)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("reflecting", &self.reflecting)
            .field("dt", &self.dt)
            .finish_non_exhaustive()
    }
}

impl SdeSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.diffusion.len();
        if n == 0 || self.lo.len() != n || self.hi.len() != n || self.reflecting.len() != n {
            return Err(Error::input("SDE dimensions disagree"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::input(format!("SDE step must be positive, got {}", self.dt)));
        }
        if self.lo.iter().zip(&self.hi).any(|(a, b)| !(a < b)) {
            return Err(Error::input("SDE bounds are not well ordered"));
        }
        if self.diffusion.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::input("diffusion amplitudes must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.diffusion.len()
    }

    /// One Euler-Maruyama step in place.
    pub fn step(&self, x: &mut [f64], rng: &mut ChaCha8Rng, scratch: &mut [f64]) {
        (self.drift)(x, scratch);
        let sq = self.dt.sqrt();
        for i in 0..x.len() {
            let z: f64 = StandardNormal.sample(rng);
            x[i] += scratch[i] * self.dt + self.diffusion[i] * sq * z;
            if self.reflecting[i] {
                x[i] = reflect(x[i], self.lo[i], self.hi[i]);
            }
        }
    }

    /// Draw initial conditions uniformly in the box, run `steps` steps, and
    /// return `(x0, x_end)` as `N x count` matrices.
    pub fn sample_pairs(&self, count: usize, steps: usize, seed: u64) -> Result<(Mat<f64>, Mat<f64>)> {
        self.validate()?;
        let n = self.dim();
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = trajectory_rng(seed, i as u64);
                let x0: Vec<f64> =
                    (0..n).map(|a| rand::Rng::random_range(&mut rng, self.lo[a]..=self.hi[a])).collect();
                let mut x = x0.clone();
                let mut scratch = vec![0.0; n];
                for _ in 0..steps {
                    self.step(&mut x, &mut rng, &mut scratch);
                }
                (x0, x)
            })
            .collect();
        Ok((
            Mat::from_fn(n, count, |a, j| pairs[j].0[a]),
            Mat::from_fn(n, count, |a, j| pairs[j].1[a]),
        ))
    }

    /// Evolve given initial conditions (columns of `x0`) by `steps` steps.
    pub fn evolve(&self, x0: MatRef<'_, f64>, steps: usize, seed: u64) -> Result<Mat<f64>> {
        self.validate()?;
        let n = self.dim();
        if x0.nrows() != n {
            return Err(Error::input("initial conditions have the wrong dimension"));
        }
        let out: Vec<Vec<f64>> = (0..x0.ncols())
            .into_par_iter()
            .map(|j| {
                let mut rng = trajectory_rng(seed, j as u64);
                let mut x: Vec<f64> = (0..n).map(|a| x0[(a, j)]).collect();
                let mut scratch = vec![0.0; n];
                for _ in 0..steps {
                    self.step(&mut x, &mut rng, &mut scratch);
                }
                x
            })
            .collect();
        Ok(Mat::from_fn(n, x0.ncols(), |a, j| out[j][a]))
    }
}
