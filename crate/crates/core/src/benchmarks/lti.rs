use std::f64::consts::SQRT_2;

use faer::Mat;
use rand_distr::{Distribution, StandardNormal};

use super::sde::trajectory_rng;
use crate::edmd::SnapshotSet;
use crate::{Error, Result};

/// The linear map `x -> J x`.
pub const LTI_MATRIX: [[f64; 2]; 2] = [[0.9, -0.1], [0.0, 0.8]];

pub fn lti_map(x: &[f64]) -> [f64; 2] {
    let j = LTI_MATRIX;
    [j[0][0] * x[0] + j[0][1] * x[1], j[1][0] * x[0] + j[1][1] * x[1]]
}

/// `m_count` standard normal states and their images under [`LTI_MATRIX`].
pub fn lti_generate(m_count: usize, seed: u64) -> Result<SnapshotSet> {
    if m_count == 0 {
        return Err(Error::input("m_count must be at least 1"));
    }
    let cols: Vec<[f64; 2]> = (0..m_count)
        .map(|j| {
            let mut rng = trajectory_rng(seed, j as u64);
            [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)]
        })
        .collect();
    let x = Mat::from_fn(2, m_count, |i, j| cols[j][i]);
    let y = Mat::from_fn(2, m_count, |i, j| lti_map(&cols[j])[i]);
    SnapshotSet::new(x, y, None)
}

/// Closed-form eigenpair with eigenvalue `0.9^i 0.8^j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtiEigenpair {
    pub i: u32,
    pub j: u32,
    pub mu: f64,
}

impl LtiEigenpair {
    /// `((x - y) / sqrt 2)^i y^j`
    pub fn phi(&self, x: &[f64]) -> f64 {
        ((x[0] - x[1]) / SQRT_2).powi(self.i as i32) * x[1].powi(self.j as i32)
    }
}

pub fn lti_true_eigen(i: u32, j: u32) -> LtiEigenpair {
    LtiEigenpair { i, j, mu: 0.9f64.powi(i as i32) * 0.8f64.powi(j as i32) }
}
