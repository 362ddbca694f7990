mod common;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use spikelab::geometry::{
    christoffel, geodesic_distance, laplace_beltrami_apply, scalar_curvature, sqrt_g, ConformalMetric, MetricKind,
};
use spikelab::grid::{Grid, GridField};

use common::{d6, Lcg};

fn cosine(n: usize) -> ConformalMetric {
    ConformalMetric::new(Grid::cube(3, n, 1.0).unwrap(), MetricKind::Cosine { amplitude: 0.2, mode: vec![1, 2, 0] }).unwrap()
}

fn cosine_psi(x: &[f64]) -> f64 {
    0.2 * (2.0 * PI * (x[0] + 2.0 * x[1])).cos()
}

fn bump(n: usize) -> ConformalMetric {
    let kind = MetricKind::Bump { amplitude: 0.1, center: vec![0.5; 3], sharpness: 12.0 };
    ConformalMetric::new(Grid::cube(3, n, 1.0).unwrap(), kind).unwrap()
}

#[test]
fn sqrt_g_matches_determinant() {
    let m = cosine(16);
    let mut rng = Lcg(7);
    for _ in 0..10 {
        let x: Vec<f64> = (0..3).map(|_| rng.next()).collect();
        let g = DMatrix::<f64>::from_diagonal_element(3, 3, (2.0 * cosine_psi(&x)).exp());
        let det = g.determinant().sqrt();
        assert_relative_eq!(sqrt_g(&m, &x), det, max_relative = 1e-12);
    }
    let flat = ConformalMetric::flat(Grid::cube(3, 8, 1.0).unwrap());
    assert_eq!(sqrt_g(&flat, &[0.3, 0.1, 0.7]), 1.0);
    let c = ConformalMetric::new(Grid::cube(3, 8, 1.0).unwrap(), MetricKind::Constant { value: 0.3 }).unwrap();
    assert_relative_eq!(sqrt_g(&c, &[0.3, 0.1, 0.7]), (0.9f64).exp(), max_relative = 1e-15);
}

/// `Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)` from differences
/// of the assembled metric components.
fn christoffel_fd(psi: impl Fn(&[f64]) -> f64 + Copy, x: &[f64], h: f64) -> Vec<Vec<Vec<f64>>> {
    let n = x.len();
    let g = |y: &[f64], i: usize, j: usize| if i == j { (2.0 * psi(y)).exp() } else { 0.0 };
    let dg = |a: usize, i: usize, j: usize| d6(|y| g(y, i, j), x, a, h);
    let ginv = (-2.0 * psi(x)).exp();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|i| (0..n).map(|j| 0.5 * ginv * (dg(i, j, k) + dg(j, i, k) - dg(k, i, j))).collect())
                .collect()
        })
        .collect()
}

#[test]
fn christoffel_matches_finite_differences() {
    let m = cosine(128);
    let mut rng = Lcg(11);
    for _ in 0..5 {
        let x: Vec<f64> = (0..3).map(|_| rng.next()).collect();
        let exact = christoffel(&m, &x);
        let fd = christoffel_fd(cosine_psi, &x, 1.0 / 128.0);
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert!((exact[k][i][j] - fd[k][i][j]).abs() < 1e-6, "{k}{i}{j}: {} vs {}", exact[k][i][j], fd[k][i][j]);
                }
            }
        }
    }
    let flat = ConformalMetric::flat(Grid::cube(3, 8, 1.0).unwrap());
    assert!(christoffel(&flat, &[0.1, 0.2, 0.3]).iter().flatten().flatten().all(|v| *v == 0.0));
}

#[test]
fn scalar_curvature_matches_ricci_trace() {
    let m = bump(128);
    let h = 1.0 / 128.0;
    let gamma = |y: &[f64], k: usize, i: usize, j: usize| christoffel(&m, y)[k][i][j];
    for x in [[0.5, 0.5, 0.5], [0.55, 0.47, 0.6], [0.3, 0.7, 0.45], [0.62, 0.5, 0.5]] {
        let g = christoffel(&m, &x);
        let mut ric_trace = 0.0;
        for i in 0..3 {
            let mut r = 0.0;
            for k in 0..3 {
                r += d6(|y| gamma(y, k, i, i), &x, k, h) - d6(|y| gamma(y, k, i, k), &x, i, h);
                for l in 0..3 {
                    r += g[k][k][l] * g[l][i][i] - g[k][i][l] * g[l][i][k];
                }
            }
            ric_trace += r;
        }
        let oracle = (-2.0 * m.psi_at(&x)).exp() * ric_trace;
        let s = scalar_curvature(&m, &x);
        assert!(((s - oracle) / s).abs() < 1e-4, "S = {s}, Ricci trace = {oracle}");
    }
}

#[test]
fn flat_and_constant_curvature_vanish() {
    let g = Grid::cube(3, 8, 1.0).unwrap();
    let flat = ConformalMetric::flat(g.clone());
    assert_eq!(scalar_curvature(&flat, &[0.2, 0.4, 0.1]), 0.0);
    for c in [-1.0, 0.0, 0.7, 2.5] {
        let m = ConformalMetric::new(g.clone(), MetricKind::Constant { value: c }).unwrap();
        assert!(scalar_curvature(&m, &[0.2, 0.4, 0.1]).abs() < 1e-12);
        assert!(christoffel(&m, &[0.2, 0.4, 0.1]).iter().flatten().flatten().all(|v| *v == 0.0));
    }
}

#[test]
fn laplace_beltrami_of_fourier_mode_and_constant() {
    let g = Grid::cube(3, 16, 2.0).unwrap();
    let flat = ConformalMetric::flat(g.clone());
    let u = g.sample(|x| (2.0 * PI * x[0] / 2.0).cos());
    let lu = laplace_beltrami_apply(&flat, &u);
    let k2 = (PI).powi(2);
    for (a, b) in lu.values().iter().zip(u.values()) {
        assert!((a + k2 * b).abs() < 1e-11);
    }
    let m = ConformalMetric::new(g.clone(), MetricKind::Cosine { amplitude: 0.3, mode: vec![1, 0, 1] }).unwrap();
    let one = GridField::constant(&g, 3.0);
    assert!(laplace_beltrami_apply(&m, &one).max_abs() < 1e-11);
}

/// Second-order finite-difference assembly of `e^{-2 psi}(Lap u + (N-2) grad psi . grad u)`.
fn laplace_beltrami_fd(n: usize) -> f64 {
    let m = cosine(n);
    let g = m.grid().clone();
    let h = 1.0 / n as f64;
    let uf = |x: &[f64]| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[2]).cos() + 0.5 * (4.0 * PI * x[1]).cos();
    let u = g.sample(uf);
    let exact = laplace_beltrami_apply(&m, &u);
    let psi = m.psi_values();
    let uv = u.values();
    let mut err: f64 = 0.0;
    let mut multi = vec![0usize; 3];
    for idx in 0..g.len() {
        g.unravel(idx, &mut multi);
        let nb = |axis: usize, s: i64| {
            let mut w: Vec<i64> = multi.iter().map(|&i| i as i64).collect();
            w[axis] += s;
            g.ravel_wrapped(&w)
        };
        let mut lap = 0.0;
        let mut cross = 0.0;
        for a in 0..3 {
            let (p, q) = (nb(a, 1), nb(a, -1));
            lap += (uv[p] - 2.0 * uv[idx] + uv[q]) / (h * h);
            cross += (psi[p] - psi[q]) / (2.0 * h) * (uv[p] - uv[q]) / (2.0 * h);
        }
        let fd = (-2.0 * psi[idx]).exp() * (lap + cross);
        err = err.max((fd - exact.values()[idx]).abs());
    }
    err
}

#[test]
fn laplace_beltrami_second_order_agreement() {
    let e1 = laplace_beltrami_fd(16);
    let e2 = laplace_beltrami_fd(32);
    let ratio = e1 / e2;
    assert!(ratio > 3.5 && ratio < 4.5, "errors {e1:.3e} {e2:.3e}, ratio {ratio}");
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0)
    }
}

/// Dijkstra on a periodic 2-D lattice with all primitive steps of length
/// up to 4 nodes; edge weights by Simpson's rule on `e^psi`.
fn dijkstra_2d(psi: impl Fn(&[f64]) -> f64, n: usize, l: f64, a: [usize; 2], b: [usize; 2]) -> f64 {
    let h = l / n as f64;
    let gcd = |mut x: i64, mut y: i64| {
        x = x.abs();
        y = y.abs();
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x
    };
    let steps: Vec<(i64, i64)> =
        (-4..=4).flat_map(|i| (-4..=4).map(move |j| (i, j))).filter(|&(i, j)| gcd(i, j) == 1).collect();
    let mut dist = vec![f64::INFINITY; n * n];
    let mut heap = BinaryHeap::new();
    let start = a[0] * n + a[1];
    dist[start] = 0.0;
    heap.push(Item(0.0, start));
    let target = b[0] * n + b[1];
    while let Some(Item(d, k)) = heap.pop() {
        if k == target {
            return d;
        }
        if d > dist[k] {
            continue;
        }
        let (i, j) = ((k / n) as i64, (k % n) as i64);
        for &(di, dj) in &steps {
            let x0 = [i as f64 * h, j as f64 * h];
            let x1 = [(i + di) as f64 * h, (j + dj) as f64 * h];
            let mid = [0.5 * (x0[0] + x1[0]), 0.5 * (x0[1] + x1[1])];
            let len = h * ((di * di + dj * dj) as f64).sqrt();
            let w = len * (psi(&x0).exp() + 4.0 * psi(&mid).exp() + psi(&x1).exp()) / 6.0;
            let ni = (i + di).rem_euclid(n as i64) as usize;
            let nj = (j + dj).rem_euclid(n as i64) as usize;
            let nk = ni * n + nj;
            if d + w < dist[nk] {
                dist[nk] = d + w;
                heap.push(Item(d + w, nk));
            }
        }
    }
    dist[target]
}

#[test]
fn geodesic_distance_matches_refined_dijkstra() {
    let (amp, s) = (0.3, 10.0);
    let kind = MetricKind::Bump { amplitude: amp, center: vec![0.5, 0.5], sharpness: s };
    let m = ConformalMetric::new(Grid::cube(2, 64, 1.0).unwrap(), kind).unwrap();
    let psi = |x: &[f64]| {
        let mut total = 0.0;
        for i in -1..=1 {
            for j in -1..=1 {
                let d2 = (x[0] - 0.5 + i as f64).powi(2) + (x[1] - 0.5 + j as f64).powi(2);
                total += amp * (-s * d2).exp();
            }
        }
        total
    };
    for (a, b) in [([16, 32], [48, 32]), ([8, 8], [40, 52]), ([32, 20], [32, 44])] {
        let fa = [a[0] as f64 / 64.0, a[1] as f64 / 64.0];
        let fb = [b[0] as f64 / 64.0, b[1] as f64 / 64.0];
        let d = geodesic_distance(&m, &fa, &fb);
        let oracle = dijkstra_2d(psi, 128, 1.0, [2 * a[0], 2 * a[1]], [2 * b[0], 2 * b[1]]);
        assert!(((d - oracle) / oracle).abs() < 0.02, "{fa:?} -> {fb:?}: {d} vs {oracle}");
    }
}

#[test]
fn geodesic_distance_flat_and_constant() {
    let g = Grid::cube(3, 16, 1.0).unwrap();
    let flat = ConformalMetric::flat(g.clone());
    assert_eq!(geodesic_distance(&flat, &[0.0, 0.0, 0.0], &[0.5, 0.0, 0.0]), 0.5);
    assert_relative_eq!(geodesic_distance(&flat, &[0.05, 0.0, 0.0], &[0.95, 0.0, 0.0]), 0.1, epsilon = 1e-15);
    let c = ConformalMetric::new(g, MetricKind::Constant { value: -0.4 }).unwrap();
    assert_relative_eq!(
        geodesic_distance(&c, &[0.1, 0.2, 0.3], &[0.4, 0.1, 0.8]),
        (-0.4f64).exp() * (0.09f64 + 0.01 + 0.25).sqrt(),
        max_relative = 1e-14
    );
}
