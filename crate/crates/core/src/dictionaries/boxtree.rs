//! Adaptive bisection of an axis-aligned box, used to place spectral elements.
//!
//! Leaves are addressed by `(depth, cell)` where `cell[i]` is the integer
//! coordinate of the box along axis `i` on the uniform `2^depth` grid of the
//! root. Every axis is bisected at once, so each split creates `2^N`
//! children; children without data are dropped.

use std::collections::HashMap;

use faer::MatRef;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::input("box bounds need matching nonempty lo/hi"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::input(format!("box bounds not well ordered: {lo:?} .. {hi:?}")));
        }
        Ok(BoxBounds { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn half_width(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (b - a)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub depth: u32,
    pub cell: Vec<u64>,
    /// Number of training points that fell in this leaf.
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxTree {
    pub root: BoxBounds,
    pub max_points: usize,
    pub max_depth: u32,
    pub leaves: Vec<Leaf>,
    #[serde(skip)]
    index: HashMap<(u32, Vec<u64>), usize>,
}

impl PartialEq for BoxTree {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
            && self.max_points == other.max_points
            && self.max_depth == other.max_depth
            && self.leaves == other.leaves
    }
}

/// Bisect `root` until no box holds more than `max_points` columns of `data`
/// or `max_depth` is reached.
pub fn build_box_tree(data: MatRef<'_, f64>, root: BoxBounds, max_points: usize, max_depth: u32) -> Result<BoxTree> {
    if max_points == 0 {
        return Err(Error::input("max_points must be at least 1"));
    }
    subdivide(data, root, max_points, max_depth)
}

/// Uniform subdivision to `depth`, keeping only boxes that contain data.
pub fn build_occupied_tree(data: MatRef<'_, f64>, root: BoxBounds, depth: u32) -> Result<BoxTree> {
    subdivide(data, root, 0, depth)
}

fn subdivide(data: MatRef<'_, f64>, root: BoxBounds, max_points: usize, max_depth: u32) -> Result<BoxTree> {
    if data.nrows() != root.dim() {
        return Err(Error::input(format!("data has {} rows but the root box is {}-dimensional", data.nrows(), root.dim())));
    }
    if max_depth > 60 / root.dim() as u32 {
        return Err(Error::input(format!("max_depth {max_depth} too large for dimension {}", root.dim())));
    }
    let points: Vec<Vec<f64>> = (0..data.ncols()).map(|j| crate::numerics::column(data, j)).collect();
    let outside: Vec<usize> = points.iter().enumerate().filter(|(_, p)| !root.contains(p)).map(|(i, _)| i).collect();
    if !outside.is_empty() {
        let shown: Vec<String> = outside.iter().take(20).map(|i| i.to_string()).collect();
        let more = if outside.len() > 20 { format!(" (and {} more)", outside.len() - 20) } else { String::new() };
        return Err(Error::input(format!("points outside the root box: {}{more}", shown.join(", "))));
    }

    let mut tree = BoxTree { root, max_points, max_depth, leaves: Vec::new(), index: HashMap::new() };
    let all: Vec<usize> = (0..points.len()).collect();
    let origin = vec![0u64; tree.root.dim()];
    tree.split(&points, all, 0, origin);
    tree.rebuild_index();
    Ok(tree)
}

impl BoxTree {
    /// Complete uniform subdivision to `depth`, with zero counts.
    pub fn uniform(root: BoxBounds, depth: u32) -> Result<BoxTree> {
        let n = root.dim();
        if depth as usize * n > 24 {
            return Err(Error::input("uniform tree too large"));
        }
        let side = 1u64 << depth;
        let total = (side as usize).pow(n as u32);
        let leaves = (0..total)
            .map(|mut flat| {
                let cell = (0..n)
                    .map(|_| {
                        let c = flat as u64 % side;
                        flat /= side as usize;
                        c
                    })
                    .collect();
                Leaf { depth, cell, count: 0 }
            })
            .collect();
        let mut tree = BoxTree { root, max_points: usize::MAX, max_depth: depth, leaves, index: HashMap::new() };
        tree.rebuild_index();
        Ok(tree)
    }

    fn split(&mut self, points: &[Vec<f64>], members: Vec<usize>, depth: u32, cell: Vec<u64>) {
        if members.is_empty() {
            return;
        }
        if members.len() <= self.max_points || depth >= self.max_depth {
            self.leaves.push(Leaf { depth, cell, count: members.len() });
            return;
        }
        let n = self.root.dim();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); 1 << n];
        for i in members {
            let c = self.cell_of(&points[i], depth + 1);
            let child: usize = (0..n).map(|a| ((c[a] - 2 * cell[a]) as usize) << a).sum();
            children[child].push(i);
        }
        for (child, members) in children.into_iter().enumerate() {
            let sub: Vec<u64> = (0..n).map(|a| 2 * cell[a] + ((child >> a) & 1) as u64).collect();
            self.split(points, members, depth + 1, sub);
        }
    }

    fn cell_of(&self, x: &[f64], depth: u32) -> Vec<u64> {
        let side = (1u64 << depth) as f64;
        x.iter()
            .zip(self.root.lo.iter().zip(&self.root.hi))
            .map(|(v, (a, b))| {
                let t = ((v - a) / (b - a) * side).floor();
                t.clamp(0.0, side - 1.0) as u64
            })
            .collect()
    }

    pub fn rebuild_index(&mut self) {
        self.index = self.leaves.iter().enumerate().map(|(i, l)| ((l.depth, l.cell.clone()), i)).collect();
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    pub fn total_count(&self) -> usize {
        self.leaves.iter().map(|l| l.count).sum()
    }

    /// Index of the leaf containing `x`, if any.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if !self.root.contains(x) {
            return None;
        }
        let deepest = self.leaves.iter().map(|l| l.depth).max()?;
        (0..=deepest).find_map(|d| self.index.get(&(d, self.cell_of(x, d))).copied())
    }

    pub fn leaf_bounds(&self, leaf: usize) -> BoxBounds {
        let l = &self.leaves[leaf];
        let side = (1u64 << l.depth) as f64;
        let (lo, hi) = l
            .cell
            .iter()
            .zip(self.root.lo.iter().zip(&self.root.hi))
            .map(|(&c, (a, b))| {
                let w = (b - a) / side;
                (a + c as f64 * w, a + (c + 1) as f64 * w)
            })
            .unzip();
        BoxBounds { lo, hi }
    }
}
