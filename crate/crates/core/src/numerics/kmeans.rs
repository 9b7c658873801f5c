use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ensure_finite_real;
use crate::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 300;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// `dim x k`, one center per column.
    pub centers: Mat<f64>,
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares after each assignment step.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Fewer than `k` distinct points were available, so some centers coincide.
    pub degenerate: bool,
}

fn sq_dist(points: MatRef<'_, f64>, p: usize, centers: &[Vec<f64>], c: usize) -> f64 {
    let ctr = &centers[c];
    (0..points.nrows()).map(|d| {
        let t = points[(d, p)] - ctr[d];
        t * t
    }).sum()
}

fn nearest(points: MatRef<'_, f64>, p: usize, centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.len() {
        let d = sq_dist(points, p, centers, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's algorithm from a k-means++ start, with the default iteration cap.
///
/// `points` holds one point per column.
pub fn kmeans(points: MatRef<'_, f64>, k: usize, seed: u64) -> Result<KMeansResult> {
    kmeans_with_cap(points, k, seed, DEFAULT_MAX_ITER)
}

pub fn kmeans_with_cap(points: MatRef<'_, f64>, k: usize, seed: u64, max_iter: usize) -> Result<KMeansResult> {
    ensure_finite_real(points, "points")?;
    let (dim, n) = (points.nrows(), points.ncols());
    if k == 0 || k > n {
        return Err(Error::input(format!("k must lie in 1..={n}, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ seeding
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    centers.push((0..dim).map(|d| points[(d, first)]).collect());
    let mut d2: Vec<f64> = (0..n).map(|p| sq_dist(points, p, &centers, 0)).collect();
    let mut degenerate = false;
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (p, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = p;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            degenerate = true;
            rng.random_range(0..n)
        };
        centers.push((0..dim).map(|d| points[(d, pick)]).collect());
        let c = centers.len() - 1;
        d2.par_iter_mut().enumerate().for_each(|(p, v)| *v = v.min(sq_dist(points, p, &centers, c)));
    }

    let mut assignments = vec![usize::MAX; n];
    let mut objective = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let nearest_all: Vec<(usize, f64)> = (0..n).into_par_iter().map(|p| nearest(points, p, &centers)).collect();
        let changed = nearest_all.iter().zip(&assignments).any(|(a, b)| a.0 != *b);
        for (slot, (c, _)) in assignments.iter_mut().zip(&nearest_all) {
            *slot = *c;
        }
        objective.push(nearest_all.iter().map(|x| x.1).sum());
        if !changed {
            converged = true;
            break;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for p in 0..n {
            let c = assignments[p];
            counts[c] += 1;
            for d in 0..dim {
                sums[c][d] += points[(d, p)];
            }
        }
        let mut empty = Vec::new();
        for c in 0..k {
            if counts[c] == 0 {
                empty.push(c);
            } else {
                for d in 0..dim {
                    centers[c][d] = sums[c][d] / counts[c] as f64;
                }
            }
        }
        // An empty cluster is re-seeded at the point farthest from its own center.
        for c in empty {
            let far = (0..n)
                .map(|p| (p, sq_dist(points, p, &centers, assignments[p])))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|x| x.0)
                .unwrap_or(0);
            centers[c] = (0..dim).map(|d| points[(d, far)]).collect();
            assignments[far] = c;
        }
    }

    let centers = Mat::from_fn(dim, k, |d, c| centers[c][d]);
    Ok(KMeansResult { centers, assignments, objective, iterations, converged, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::from_columns;

    fn centers_sorted(r: &KMeansResult) -> Vec<Vec<f64>> {
        let mut v: Vec<Vec<f64>> = (0..r.centers.ncols())
            .map(|c| (0..r.centers.nrows()).map(|d| r.centers[(d, c)]).collect())
            .collect();
        v.sort_by(|a, b| a[0].total_cmp(&b[0]));
        v
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let pts = from_columns(&[vec![-1.0, 0.0], vec![1.0, 0.0]]);
        let r = kmeans(pts.as_ref(), 1, 3).unwrap();
        assert_eq!(centers_sorted(&r), vec![vec![0.0, 0.0]]);
    }

    /// Enumerate every 2-partition and keep the one with the smallest
    /// within-cluster sum of squares.
    fn brute_force_two_means(pts: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = pts.len();
        let mut best = (f64::INFINITY, vec![]);
        for mask in 1..(1u32 << n) - 1 {
            let mut groups = [vec![], vec![]];
            for (i, p) in pts.iter().enumerate() {
                groups[((mask >> i) & 1) as usize].push(p.clone());
            }
            let mut cost = 0.0;
            let mut ctrs = vec![];
            for g in &groups {
                let m: Vec<f64> = (0..2).map(|d| g.iter().map(|p| p[d]).sum::<f64>() / g.len() as f64).collect();
                cost += g.iter().map(|p| (p[0] - m[0]).powi(2) + (p[1] - m[1]).powi(2)).sum::<f64>();
                ctrs.push(m);
            }
            if cost < best.0 {
                ctrs.sort_by(|a, b| a[0].total_cmp(&b[0]));
                best = (cost, ctrs);
            }
        }
        best.1
    }

    #[test]
    fn two_separated_pairs() {
        let cols = vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![10.0, 0.0], vec![10.1, 0.0]];
        let expected = brute_force_two_means(&cols);
        let r = kmeans(from_columns(&cols).as_ref(), 2, 42).unwrap();
        let got = centers_sorted(&r);
        for (g, e) in got.iter().zip(&expected) {
            assert!((g[0] - e[0]).abs() < 1e-12 && (g[1] - e[1]).abs() < 1e-12);
        }
        assert!((got[0][0] - 0.05).abs() < 1e-12 && (got[1][0] - 10.05).abs() < 1e-12);
    }

    #[test]
    fn identical_points_are_degenerate() {
        let pts = from_columns(&vec![vec![2.0, 3.0]; 5]);
        let r = kmeans(pts.as_ref(), 2, 0).unwrap();
        assert!(r.degenerate);
        assert_eq!(centers_sorted(&r), vec![vec![2.0, 3.0], vec![2.0, 3.0]]);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let pts = Mat::from_fn(2, 200, |d, p| ((p * 37 + d * 11) % 101) as f64 / 7.0);
        let a = kmeans(pts.as_ref(), 7, 9).unwrap();
        let b = kmeans(pts.as_ref(), 7, 9).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.centers, b.centers);
    }

    #[test]
    fn rejects_too_many_clusters() {
        let pts = from_columns(&[vec![0.0], vec![1.0]]);
        assert!(kmeans(pts.as_ref(), 3, 0).is_err());
        assert!(kmeans(pts.as_ref(), 0, 0).is_err());
    }
}
