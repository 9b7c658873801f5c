//! Unforced Duffing oscillator `x'' = -delta x' - x (beta + alpha x^2)`.

use faer::Mat;
use rand::Rng;
use rayon::prelude::*;

use super::sde::trajectory_rng;
use crate::edmd::SnapshotSet;
use crate::{c64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuffingParams {
    pub delta: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl Default for DuffingParams {
    fn default() -> Self {
        DuffingParams { delta: 0.5, beta: -1.0, alpha: 1.0 }
    }
}

/// Linearized rate `-delta/2 + i sqrt(2 - delta^2/4)` of the default oscillator at `(+-1, 0)`.
pub const DUFFING_SPIRAL_RATE: (f64, f64) = (-0.25, 1.391_941_090_707_505);

const STEP: f64 = 0.01;

pub fn duffing_field(p: &DuffingParams, s: [f64; 2]) -> [f64; 2] {
    let [x, v] = s;
    [v, -p.delta * v - x * (p.beta + p.alpha * x * x)]
}

fn rk4(p: &DuffingParams, s: [f64; 2], h: f64) -> [f64; 2] {
    let add = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * b[0], a[1] + t * b[1]];
    let k1 = duffing_field(p, s);
    let k2 = duffing_field(p, add(s, k1, h / 2.0));
    let k3 = duffing_field(p, add(s, k2, h / 2.0));
    let k4 = duffing_field(p, add(s, k3, h));
    [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Advance by `t` using classical fourth-order steps of at most 0.01.
pub fn duffing_flow(p: &DuffingParams, s: [f64; 2], t: f64) -> [f64; 2] {
    let n = (t / STEP).round().max(1.0) as usize;
    let h = t / n as f64;
    (0..n).fold(s, |s, _| rk4(p, s, h))
}

/// `n_traj` trajectories of `samples_per_traj` samples spaced `delta_t`
/// apart, from initial conditions uniform on `[-2, 2]^2`. Consecutive
/// samples form the pairs, trajectory by trajectory.
pub fn duffing_generate(n_traj: usize, samples_per_traj: usize, delta_t: f64, seed: u64) -> Result<SnapshotSet> {
    if n_traj == 0 || samples_per_traj < 2 {
        return Err(Error::input("need at least one trajectory with two samples"));
    }
    if !(delta_t > 0.0 && delta_t.is_finite()) {
        return Err(Error::input(format!("delta_t must be positive, got {delta_t}")));
    }
    let p = DuffingParams::default();
    let trajs: Vec<Vec<[f64; 2]>> = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(seed, i as u64);
            let mut s = [rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0)];
            let mut out = vec![s];
            for _ in 1..samples_per_traj {
                s = duffing_flow(&p, s, delta_t);
                out.push(s);
            }
            out
        })
        .collect();
    let per = samples_per_traj - 1;
    let m = n_traj * per;
    let x = Mat::from_fn(2, m, |a, j| trajs[j / per][j % per][a]);
    let y = Mat::from_fn(2, m, |a, j| trajs[j / per][j % per + 1][a]);
    SnapshotSet::new(x, y, Some(delta_t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasinLabel {
    Left,
    Right,
    Unresolved,
}

/// Integrate from `x0` until it is within `1e-3` of `(+-1, 0)`, for at most 200 time units.
pub fn duffing_basin_oracle(x0: [f64; 2]) -> BasinLabel {
    let p = DuffingParams::default();
    let mut s = x0;
    let near = |s: [f64; 2], c: f64| ((s[0] - c).powi(2) + s[1] * s[1]).sqrt() < 1e-3;
    for _ in 0..=(200.0 / STEP) as usize {
        if near(s, 1.0) {
            return BasinLabel::Right;
        }
        if near(s, -1.0) {
            return BasinLabel::Left;
        }
        s = rk4(&p, s, STEP);
    }
    BasinLabel::Unresolved
}

/// Two-way split of points by an eigenfunction's real part about its mean.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinSplit {
    pub threshold: f64,
    /// `true` where the real part exceeds the threshold.
    pub above: Vec<bool>,
    /// Every point landed on the same side.
    pub degenerate: bool,
}

pub fn classify_basins(phi: &[c64]) -> Result<BasinSplit> {
    if phi.is_empty() {
        return Err(Error::input("no eigenfunction values"));
    }
    if phi.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::input("eigenfunction values must be finite"));
    }
    let threshold = phi.iter().map(|z| z.re).sum::<f64>() / phi.len() as f64;
    let above: Vec<bool> = phi.iter().map(|z| z.re > threshold).collect();
    let ups = above.iter().filter(|&&b| b).count();
    Ok(BasinSplit { threshold, degenerate: ups == 0 || ups == above.len(), above })
}
