//! Property checks shared by the proptest suite and the acceptance runner.
//! Each check draws its inputs from a ChaCha stream keyed by `seed`.
#![allow(dead_code)]

use faer::Mat;
use koopman_core::c64;
use koopman_core::dictionaries::{
    build_box_tree, fourier_pair_dictionary, full_state_weights, hermite_dictionary, spectral_element_dictionary,
    state_dictionary, thin_plate_rbf_dictionary, Basis, BoxBounds, Dictionary,
};
use koopman_core::edmd::{
    accumulate_gram, correlation_modulus, decompose, dmd, evaluate_eigenfunctions, fit, koopman_matrix, predict,
    residual, SnapshotSet,
};
use koopman_core::numerics::{eig_two_sided, kmeans, to_complex, truncated_pinv};
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Check = Result<(), TestCaseError>;

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| r.random_range(lo..hi))
}

pub fn normal_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| r.sample(StandardNormal))
}

pub fn complex_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat<c64> {
    Mat::from_fn(rows, cols, |_, _| c64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

fn max_abs(m: &Mat<c64>) -> f64 {
    let mut out: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

/// Snapshot pairs of the map `y = (0.8 x1 + 0.1 x2^2, 0.6 x2 - 0.2 x1 x2, ...)`
/// on normal samples: smooth, nonlinear and coordinate-coupled.
pub fn nonlinear_pairs(r: &mut ChaCha8Rng, dim: usize, m: usize) -> SnapshotSet {
    let x = normal_matrix(r, dim, m);
    let y = Mat::from_fn(dim, m, |i, j| {
        let xi = x[(i, j)];
        let xn = x[((i + 1) % dim, j)];
        (0.8 - 0.15 * i as f64) * xi + 0.1 * (xn * xn - 1.0) - 0.05 * xi * xn
    });
    SnapshotSet::new(x, y, Some(0.5)).unwrap()
}

/// A small dictionary of the family chosen by `which`, fitted to `s` when
/// the family needs data.
pub fn sample_dictionary(r: &mut ChaCha8Rng, which: usize, s: &SnapshotSet) -> Dictionary {
    let n = s.state_dim();
    match which % 5 {
        0 => hermite_dictionary(n, 2).unwrap().into(),
        1 => {
            let centers = normal_matrix(r, n, 6);
            thin_plate_rbf_dictionary(centers.as_ref(), true).unwrap().into()
        }
        2 => {
            let (lo, hi) = bounds(s);
            let tree = build_box_tree(s.x.as_ref(), BoxBounds::new(lo, hi).unwrap(), s.len() / 3 + 1, 3).unwrap();
            spectral_element_dictionary(tree, 2, n == 1).unwrap().into()
        }
        3 => state_dictionary(n).unwrap().into(),
        _ if n == 2 => fourier_pair_dictionary(4).unwrap().into(),
        _ => hermite_dictionary(n, 1).unwrap().into(),
    }
}

/// Bounding box of `X` and `Y`, slightly widened.
pub fn bounds(s: &SnapshotSet) -> (Vec<f64>, Vec<f64>) {
    let n = s.state_dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for m in [&s.x, &s.y] {
        for j in 0..m.ncols() {
            for i in 0..n {
                lo[i] = lo[i].min(m[(i, j)]);
                hi[i] = hi[i].max(m[(i, j)]);
            }
        }
    }
    (lo.iter().map(|v| v - 1e-6).collect(), hi.iter().map(|v| v + 1e-6).collect())
}

// ---- numerics ----

/// The four Penrose identities for a well-conditioned full-rank input.
pub fn pinv_penrose(seed: u64, rows: usize, cols: usize) -> Check {
    let mut r = rng(seed);
    let mut a = complex_matrix(&mut r, rows, cols);
    for i in 0..rows.min(cols) {
        a[(i, i)] += c64::new(3.0, 0.0);
    }
    let p = truncated_pinv(a.as_ref(), 1e-10).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let ap = &a * &p;
    let pa = &p * &a;
    let scale = max_abs(&a).max(max_abs(&p));
    let checks = [
        ("A P A = A", max_abs(&(&ap * &a - &a))),
        ("P A P = P", max_abs(&(&pa * &p - &p))),
        ("(A P)^H = A P", max_abs(&(ap.adjoint().to_owned() - &ap))),
        ("(P A)^H = P A", max_abs(&(pa.adjoint().to_owned() - &pa))),
    ];
    for (name, err) in checks {
        ensure(err <= 1e-10 * scale, || format!("{name}: defect {err:.3e} ({rows}x{cols})"))?;
    }
    Ok(())
}

/// The pseudoinverse of a Hermitian PSD matrix is Hermitian PSD.
pub fn pinv_hermitian_psd(seed: u64, n: usize, rank: usize) -> Check {
    let mut r = rng(seed);
    let b = complex_matrix(&mut r, n, rank.min(n));
    let bb = &b * b.adjoint();
    let h = Mat::from_fn(n, n, |i, j| 0.5 * (bb[(i, j)] + bb[(j, i)].conj()));
    let p = truncated_pinv(h.as_ref(), 1e-10).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let scale = max_abs(&p).max(f64::MIN_POSITIVE);
    let asym = max_abs(&(p.adjoint().to_owned() - &p));
    ensure(asym <= 1e-12 * scale, || format!("pinv not Hermitian: {asym:.3e}"))?;
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (p[(i, j)] + p[(j, i)].conj()));
    let ev = sym.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
    let hi = ev.iter().copied().fold(0.0, f64::max);
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(lo >= -1e-10 * hi.max(f64::MIN_POSITIVE), || format!("pinv has eigenvalue {lo:.3e}"))
}

/// `|w_i^H xi_j - delta_ij| <= 1e-8` over paired indices.
pub fn eig_biorthogonality(seed: u64, n: usize, complex: bool) -> Check {
    let mut r = rng(seed);
    let m = if complex { complex_matrix(&mut r, n, n) } else { to_complex(uniform_matrix(&mut r, n, n, -1.0, 1.0).as_ref()) };
    let e = eig_two_sided(m.as_ref()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let cross = e.left.adjoint() * &e.right;
    for i in (0..n).filter(|&i| e.paired[i]) {
        for j in (0..n).filter(|&j| e.paired[j]) {
            let want = if i == j { 1.0 } else { 0.0 };
            let err = (cross[(i, j)] - want).norm();
            ensure(err <= 1e-8, || format!("w_{i}^H xi_{j} off by {err:.3e}"))?;
        }
    }
    Ok(())
}

/// True when every value has a distinct partner within `tol` of its conjugate.
pub fn conjugate_closed(values: &[c64], tol: f64) -> bool {
    let mut used = vec![false; values.len()];
    for v in values {
        let target = v.conj();
        let best = (0..values.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (values[a] - target).norm().total_cmp(&(values[b] - target).norm()));
        match best {
            Some(j) if (values[j] - target).norm() <= tol => used[j] = true,
            _ => return false,
        }
    }
    true
}

pub fn eig_conjugate_closure(seed: u64, n: usize) -> Check {
    let mut r = rng(seed);
    let m = uniform_matrix(&mut r, n, n, -1.0, 1.0);
    let e = eig_two_sided(to_complex(m.as_ref()).as_ref()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    ensure(conjugate_closed(&e.values, 1e-9), || format!("spectrum not conjugate closed: {:?}", e.values))
}

pub fn kmeans_monotone(seed: u64, points: usize, k: usize) -> Check {
    let mut r = rng(seed);
    let p = normal_matrix(&mut r, 2, points);
    let res = kmeans(p.as_ref(), k.min(points), seed).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for w in res.objective.windows(2) {
        ensure(w[1] <= w[0] * (1.0 + 1e-12), || format!("objective rose: {:?}", res.objective))?;
    }
    Ok(())
}

// ---- edmd ----

/// `G` is Hermitian PSD for any data set and dictionary family.
pub fn gram_hermitian_psd(seed: u64, dim: usize, which: usize) -> Check {
    let mut r = rng(seed);
    let s = nonlinear_pairs(&mut r, dim, 120);
    let d = sample_dictionary(&mut r, which, &s);
    let gp = accumulate_gram(&s, &d).map_err(|e| TestCaseError::fail(e.to_string()))?;
    gp.validate().map_err(|e| TestCaseError::fail(format!("{}: {e}", d.family())))
}

/// Real data and a real dictionary give a conjugate-closed spectrum.
pub fn edmd_conjugate_closure(seed: u64, dim: usize, which: usize) -> Check {
    let mut r = rng(seed);
    let s = nonlinear_pairs(&mut r, dim, 200);
    let d = sample_dictionary(&mut r, which, &s);
    if !d.is_real() {
        return Ok(());
    }
    let dec = fit(&s, &d, 1e-10, false).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let scale = dec.mu.iter().map(|z| z.norm()).fold(1.0, f64::max);
    ensure(conjugate_closed(&dec.mu, 1e-9 * scale), || format!("{}: spectrum not conjugate closed", d.family()))
}

/// Biorthogonality of the sorted left and right eigenvectors.
pub fn edmd_biorthogonality(seed: u64, dim: usize) -> Check {
    let mut r = rng(seed);
    let s = nonlinear_pairs(&mut r, dim, 200);
    let d: Dictionary = hermite_dictionary(dim, 2).unwrap().into();
    let dec = fit(&s, &d, 1e-10, false).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let cross = dec.w.adjoint() * &dec.xi;
    let k = dec.len();
    for i in (0..k).filter(|&i| dec.paired[i]) {
        for j in (0..k).filter(|&j| dec.paired[j]) {
            let want = if i == j { 1.0 } else { 0.0 };
            let err = (cross[(i, j)] - want).norm();
            ensure(err <= 1e-8, || format!("w_{i}^H xi_{j} off by {err:.3e}"))?;
        }
    }
    Ok(())
}

/// `Psi'(x) = Psi(x) T` for a fixed invertible `T`.
pub struct Transformed<'a> {
    pub inner: &'a dyn Basis,
    pub t: Mat<c64>,
}

impl Basis for Transformed<'_> {
    fn len(&self) -> usize {
        self.inner.len()
    }
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }
    fn is_real(&self) -> bool {
        false
    }
    fn eval(&self, x: &[f64], out: &mut [c64]) {
        let row = self.inner.row(x);
        for (j, o) in out.iter_mut().enumerate() {
            *o = row.iter().enumerate().map(|(i, v)| v * self.t[(i, j)]).sum();
        }
    }
}

/// Eigenvalues and eigenfunctions do not depend on the basis of the span.
pub fn basis_change_invariance(seed: u64, dim: usize) -> Check {
    let mut r = rng(seed);
    let s = nonlinear_pairs(&mut r, dim, 300);
    let d: Dictionary = hermite_dictionary(dim, 2).unwrap().into();
    let k = d.len();
    // T = I + E with |E|_F = 1/2 keeps cond(T) <= 3.
    let e = complex_matrix(&mut r, k, k);
    let scale = 0.5 / e.norm_l2();
    let t = Mat::from_fn(k, k, |i, j| e[(i, j)] * scale + if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
    let td = Transformed { inner: &d, t };
    let fail = |e: koopman_core::Error| TestCaseError::fail(e.to_string());
    let base = decompose(koopman_matrix(&accumulate_gram(&s, &d).map_err(fail)?, 1e-10).map_err(fail)?.as_ref(), None, None, 1e-10)
        .map_err(fail)?;
    let other = decompose(koopman_matrix(&accumulate_gram(&s, &td).map_err(fail)?, 1e-10).map_err(fail)?.as_ref(), None, None, 1e-10)
        .map_err(fail)?;
    let probes = uniform_matrix(&mut r, dim, 50, -1.5, 1.5);
    let mut taken = vec![false; k];
    for j in 0..k {
        let (best, dist) = (0..k)
            .filter(|&c| !taken[c])
            .map(|c| (c, (other.mu[c] - base.mu[j]).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        taken[best] = true;
        ensure(dist <= 1e-8, || format!("eigenvalue {} moved by {dist:.3e}", base.mu[j]))?;
        // Eigenfunctions of clustered eigenvalues are not individually determined.
        let gap = (0..k).filter(|&c| c != j).map(|c| (base.mu[c] - base.mu[j]).norm()).fold(f64::INFINITY, f64::min);
        if gap < 1e-3 {
            continue;
        }
        let a = evaluate_eigenfunctions(&base, &d, probes.as_ref(), &[j], false).map_err(fail)?;
        let b = evaluate_eigenfunctions(&other, &td, probes.as_ref(), &[best], false).map_err(fail)?;
        let ca: Vec<c64> = (0..a.nrows()).map(|i| a[(i, 0)]).collect();
        let cb: Vec<c64> = (0..b.nrows()).map(|i| b[(i, 0)]).collect();
        let corr = correlation_modulus(&ca, &cb);
        ensure(corr >= 1.0 - 1e-8, || format!("eigenfunction {j} correlation {corr}"))?;
    }
    Ok(())
}

/// The constant function is reproduced exactly by `K`.
pub fn constant_zero_residual(seed: u64, dim: usize, which: usize) -> Check {
    let mut r = rng(seed);
    let s = nonlinear_pairs(&mut r, dim, 150);
    let d: Dictionary = match which % 2 {
        0 => hermite_dictionary(dim, 2).unwrap().into(),
        _ => {
            let (lo, hi) = bounds(&s);
            let pts = Mat::from_fn(dim, 2 * s.len(), |i, j| if j < s.len() { s.x[(i, j)] } else { s.y[(i, j - s.len())] });
            let tree = build_box_tree(pts.as_ref(), BoxBounds::new(lo, hi).unwrap(), 60, 2).unwrap();
            spectral_element_dictionary(tree, 1, dim == 1).unwrap().into()
        }
    };
    let fail = |e: koopman_core::Error| TestCaseError::fail(e.to_string());
    let gp = accumulate_gram(&s, &d).map_err(fail)?;
    let k = koopman_matrix(&gp, 1e-10).map_err(fail)?;
    // Coefficients of the constant: e_0 for Hermite, the per-leaf constants for elements.
    let a: Vec<c64> = match &d {
        Dictionary::SpectralElement(se) => (0..d.len()).map(|i| if i % se.per_leaf() == 0 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }).collect(),
        _ => (0..d.len()).map(|i| if i == 0 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }).collect(),
    };
    let res = residual(&s, &d, k.as_ref(), &a).map_err(fail)?;
    ensure(res <= 1e-18 * s.len() as f64, || format!("{}: constant residual {res:.3e}", d.family()))
}

/// DMD and EDMD with the state dictionary share their eigenvalues.
pub fn dmd_equivalence(seed: u64, n: usize, m: usize) -> Check {
    let mut r = rng(seed);
    let x = normal_matrix(&mut r, n, m);
    let y = normal_matrix(&mut r, n, m);
    let s = SnapshotSet::new(x, y, None).unwrap();
    let fail = |e: koopman_core::Error| TestCaseError::fail(e.to_string());
    let a = dmd(&s, 1e-10).map_err(fail)?;
    let b = fit(&s, &state_dictionary(n).unwrap().into(), 1e-10, false).map_err(fail)?;
    let mut taken = vec![false; n];
    for v in &a.values {
        let (j, dist) = (0..n)
            .filter(|&j| !taken[j])
            .map(|j| (j, (b.mu[j] - v).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        taken[j] = true;
        ensure(dist <= 1e-10, || format!("eigenvalue {v} differs by {dist:.3e}"))?;
    }
    Ok(())
}

/// `sum_k v_k phi_k(x_m) = x_m` at the training points when the weights are exact.
pub fn reconstruction(seed: u64, dim: usize, state: bool) -> Check {
    let mut r = rng(seed);
    let s = nonlinear_pairs(&mut r, dim, 150);
    let d: Dictionary = if state { state_dictionary(dim).unwrap().into() } else { hermite_dictionary(dim, 2).unwrap().into() };
    let fail = |e: koopman_core::Error| TestCaseError::fail(e.to_string());
    let w = full_state_weights(&d, Some(&s), 1e-10).map_err(fail)?;
    ensure(w.exact, || "weights should be exact".into())?;
    let dec = fit(&s, &d, 1e-10, true).map_err(fail)?;
    if dec.paired.iter().any(|p| !p) {
        return Ok(());
    }
    for m in 0..s.len() {
        let x = s.x_col(m);
        let back = predict(&dec, &d, &x, 0).map_err(fail)?;
        for (i, v) in back.iter().enumerate() {
            let err = (v - x[i]).norm();
            ensure(err <= 1e-8, || format!("snapshot {m} coordinate {i} off by {err:.3e}"))?;
        }
    }
    Ok(())
}

// ---- dictionaries ----

/// Every family evaluates to exactly `len()` finite values.
pub fn eval_length(seed: u64, dim: usize, which: usize) -> Check {
    let mut r = rng(seed);
    let s = nonlinear_pairs(&mut r, dim, 60);
    let d = sample_dictionary(&mut r, which, &s);
    for m in 0..s.len() {
        let row = d.row(&s.x_col(m));
        ensure(row.len() == d.len(), || format!("{}: row has {} entries, len is {}", d.family(), row.len(), d.len()))?;
        ensure(row.iter().all(|z| z.re.is_finite() && z.im.is_finite()), || format!("{}: non-finite value", d.family()))?;
    }
    Ok(())
}

/// Points in different leaves have disjoint supports; each support sits
/// inside the declared block.
pub fn spectral_block_disjoint(seed: u64, dim: usize, order: usize) -> Check {
    let mut r = rng(seed);
    let pts = uniform_matrix(&mut r, dim, 80, -1.0, 1.0);
    let root = BoxBounds::new(vec![-1.0; dim], vec![1.0; dim]).unwrap();
    let tree = build_box_tree(pts.as_ref(), root, 10, 4).unwrap();
    let d = spectral_element_dictionary(tree, order, dim == 1).unwrap();
    let support = |x: &[f64]| -> Vec<usize> { d.row(x).iter().enumerate().filter(|(_, z)| z.norm() > 0.0).map(|(i, _)| i).collect() };
    let cols: Vec<Vec<f64>> = (0..pts.ncols()).map(|j| (0..dim).map(|i| pts[(i, j)]).collect()).collect();
    for a in 0..cols.len() {
        let sa = support(&cols[a]);
        let block = d.block(&cols[a]).unwrap();
        ensure(sa.iter().all(|i| block.contains(i)), || format!("support of point {a} leaves its block"))?;
        for b in (a + 1)..cols.len() {
            if d.tree.locate(&cols[a]) == d.tree.locate(&cols[b]) {
                continue;
            }
            let sb = support(&cols[b]);
            ensure(sa.iter().all(|i| !sb.contains(i)), || format!("points {a} and {b} share support"))?;
        }
    }
    Ok(())
}

/// Leaf counts sum to the number of points; a leaf exceeds the threshold
/// only at the depth limit.
pub fn boxtree_counts(seed: u64, dim: usize, n: usize, max_points: usize, max_depth: u32) -> Check {
    let mut r = rng(seed);
    let pts = normal_matrix(&mut r, dim, n);
    let root = BoxBounds::new(vec![-10.0; dim], vec![10.0; dim]).unwrap();
    let tree = build_box_tree(pts.as_ref(), root, max_points, max_depth).map_err(|e| TestCaseError::fail(e.to_string()))?;
    ensure(tree.total_count() == n, || format!("counts sum to {} not {n}", tree.total_count()))?;
    for leaf in &tree.leaves {
        ensure(leaf.count <= max_points || leaf.depth == max_depth, || format!("leaf {:?} holds {} points", leaf.cell, leaf.count))?;
    }
    Ok(())
}

/// `H_{k+1} = 2 x H_k - 2 k H_{k-1}` against the one-dimensional dictionary.
pub fn hermite_recurrence(seed: u64, order: usize) -> Check {
    let mut r = rng(seed);
    let d = hermite_dictionary(1, order).unwrap();
    for _ in 0..50 {
        let x: f64 = r.random_range(-3.0..3.0);
        let row = d.row(&[x]);
        let mut h = vec![1.0, 2.0 * x];
        for k in 1..order {
            h.push(2.0 * x * h[k] - 2.0 * k as f64 * h[k - 1]);
        }
        for k in 0..=order {
            let idx = d.index_of(&[k as u32]).unwrap();
            let err = (row[idx].re - h[k]).abs();
            ensure(err <= 1e-9 * h[k].abs().max(1.0), || format!("H_{k}({x}) off by {err:.3e}"))?;
        }
    }
    Ok(())
}

/// A JSON round trip of the descriptor reproduces every evaluation.
pub fn descriptor_roundtrip(seed: u64, dim: usize, which: usize) -> Check {
    let mut r = rng(seed);
    let s = nonlinear_pairs(&mut r, dim, 60);
    let d = sample_dictionary(&mut r, which, &s);
    let back = Dictionary::from_json(&d.to_json().unwrap()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for m in 0..s.len() {
        let x = s.x_col(m);
        ensure(d.row(&x) == back.row(&x), || format!("{}: evaluation changed at snapshot {m}", d.family()))?;
    }
    Ok(())
}

// ---- benchmarks ----

fn within(m: &Mat<f64>, lo: &[f64], hi: &[f64]) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)] >= lo[i] && m[(i, j)] <= hi[i]))
}

/// Reflected trajectories stay in their domains.
pub fn sde_bounds(seed: u64, sigma: f64, m: usize) -> Check {
    let dw = koopman_core::benchmarks::double_well_generate(sigma, m, seed).map_err(|e| TestCaseError::fail(e.to_string()))?;
    ensure(within(&dw.x, &[-1.0], &[1.0]) && within(&dw.y, &[-1.0], &[1.0]), || "double-well sample left [-1, 1]".into())?;
    let (_, intrinsic) = koopman_core::benchmarks::swiss_roll_generate(Some(0.5), m, seed).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let (lo, hi) = ([0.0, 0.0], [3.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI]);
    ensure(within(&intrinsic.x, &lo, &hi) && within(&intrinsic.y, &lo, &hi), || "swiss-roll sample left its rectangle".into())
}

/// Generators are pure functions of their seed.
pub fn seeded_reproducible(seed: u64, m: usize) -> Check {
    use koopman_core::benchmarks::{double_well_generate, duffing_generate, lti_generate, swiss_roll_generate};
    ensure(lti_generate(m, seed).unwrap() == lti_generate(m, seed).unwrap(), || "lti differs".into())?;
    ensure(double_well_generate(0.5, m, seed).unwrap() == double_well_generate(0.5, m, seed).unwrap(), || "double-well differs".into())?;
    ensure(swiss_roll_generate(None, m, seed).unwrap() == swiss_roll_generate(None, m, seed).unwrap(), || "swiss-roll differs".into())?;
    ensure(duffing_generate(m, 3, 0.25, seed).unwrap() == duffing_generate(m, 3, 0.25, seed).unwrap(), || "duffing differs".into())
}

/// The generator annihilates constants and has a real spectrum. Central
/// differences are symmetrizable only when `h |f| < sigma^2`, so `n` is
/// raised to resolve the drift.
pub fn fd_constants(sigma: f64, n: usize) -> Check {
    use koopman_core::benchmarks::{double_well_drift, fd_operator, fd_spectrum};
    let fmax = (0..=2000).map(|i| double_well_drift(-1.0 + i as f64 / 1000.0).abs()).fold(0.0, f64::max);
    let n = n.max((2.0 * fmax / (sigma * sigma)).ceil() as usize + 2);
    let op = fd_operator(&double_well_drift, sigma, n).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let worst = op.row_sums().iter().map(|v| v.abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-10, || format!("row sum {worst:.3e}"))?;
    let spec = fd_spectrum(&op).map_err(|e| TestCaseError::fail(e.to_string()))?;
    ensure(spec.max_imag <= 1e-8, || format!("imaginary part {:.3e}", spec.max_imag))
}

/// `phi(J x) = mu phi(x)` for the closed-form linear eigenpairs.
pub fn lti_oracle(seed: u64, i: u32, j: u32) -> Check {
    use koopman_core::benchmarks::{lti_map, lti_true_eigen};
    let mut r = rng(seed);
    let e = lti_true_eigen(i, j);
    for _ in 0..100 {
        let x = [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)];
        let lhs = e.phi(&lti_map(&x));
        let rhs = e.mu * e.phi(&x);
        ensure((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0), || format!("({i},{j}) at {x:?}: {lhs} vs {rhs}"))?;
    }
    Ok(())
}

// ---- io ----

/// Snapshot CSV text parses back to bitwise-identical matrices.
pub fn csv_roundtrip(seed: u64, n: usize, m: usize) -> Check {
    use koopman_core::io::{parse_snapshots, snapshots_to_csv};
    let mut r = rng(seed);
    let scale = 10f64.powi(r.random_range(-8..8));
    let x = Mat::from_fn(n, m, |_, _| scale * r.sample::<f64, _>(StandardNormal));
    let y = Mat::from_fn(n, m, |_, _| scale * r.sample::<f64, _>(StandardNormal));
    let s = SnapshotSet::new(x, y, None).unwrap();
    let back = parse_snapshots(&snapshots_to_csv(&s), std::path::Path::new("mem.csv")).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for (a, b) in [(&s.x, &back.x), (&s.y, &back.y)] {
        for j in 0..m {
            for i in 0..n {
                ensure(a[(i, j)].to_bits() == b[(i, j)].to_bits(), || format!("entry ({i},{j}) changed"))?;
            }
        }
    }
    Ok(())
}

/// Archive JSON reproduces eigenvalues and eigenfunction evaluations to 1e-12.
pub fn archive_roundtrip(seed: u64, dim: usize, which: usize) -> Check {
    use koopman_core::io::{DecompositionArchive, Provenance};
    let mut r = rng(seed);
    let s = nonlinear_pairs(&mut r, dim, 120);
    let d = sample_dictionary(&mut r, which, &s);
    let fail = |e: koopman_core::Error| TestCaseError::fail(e.to_string());
    let dec = fit(&s, &d, 1e-10, true).map_err(fail)?;
    let arch = DecompositionArchive::from_decomposition(&dec, Provenance { seed: Some(seed), ..Provenance::default() }).map_err(fail)?;
    let back = DecompositionArchive::from_json(&arch.to_json().map_err(fail)?).map_err(fail)?.to_decomposition().map_err(fail)?;
    let bd = back.dictionary.as_ref().unwrap();
    for (a, b) in dec.mu.iter().zip(&back.mu) {
        ensure((a - b).norm() <= 1e-12 * a.norm().max(1.0), || format!("eigenvalue {a} came back as {b}"))?;
    }
    let idx: Vec<usize> = (0..dec.len()).collect();
    let before = evaluate_eigenfunctions(&dec, &d, s.x.as_ref(), &idx, false).map_err(fail)?;
    let after = evaluate_eigenfunctions(&back, bd, s.x.as_ref(), &idx, false).map_err(fail)?;
    for j in 0..idx.len() {
        for i in 0..s.len() {
            let (p, q) = (before[(i, j)], after[(i, j)]);
            ensure((p - q).norm() <= 1e-12 * p.norm().max(1.0), || format!("phi_{j} at snapshot {i}: {p} vs {q}"))?;
        }
    }
    Ok(())
}
