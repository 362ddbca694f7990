#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use spikelab::entire::{solve_entire_ground_state, EntireParams, ExponentPair, RadialGroundState};
use spikelab::grid::Grid;

pub fn ground_state_233() -> &'static RadialGroundState {
    static GS: OnceLock<RadialGroundState> = OnceLock::new();
    GS.get_or_init(|| {
        let e = ExponentPair::new(2.0, 3.0, 3).unwrap();
        solve_entire_ground_state(&e, EntireParams::default()).unwrap()
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Sixth-order central difference of `f` along `axis` at `x`.
pub fn d6(f: impl Fn(&[f64]) -> f64, x: &[f64], axis: usize, h: f64) -> f64 {
    let at = |s: f64| {
        let mut y = x.to_vec();
        y[axis] += s;
        f(&y)
    };
    let odd = |k: f64| at(k * h) - at(-k * h);
    (45.0 * odd(1.0) - 9.0 * odd(2.0) + odd(3.0)) / (60.0 * h)
}

/// Small deterministic generator for test inputs.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| 2.0 * self.next() - 1.0).collect()
    }
}

/// `(U, V)` at radius `r_end` from RK4 on the radial ODE started at the
/// origin with a series expansion.
fn shoot(e: &ExponentPair, u0: f64, v0: f64, r_end: f64) -> [f64; 4] {
    let n = e.dim as f64;
    let rhs = |r: f64, y: [f64; 4]| -> [f64; 4] {
        let fu = y[0] - y[1].abs().powf(e.q - 1.0) * y[1];
        let fv = y[1] - y[0].abs().powf(e.p - 1.0) * y[0];
        [y[2], y[3], fu - (n - 1.0) / r * y[2], fv - (n - 1.0) / r * y[3]]
    };
    let r0 = 1e-4;
    let (a, b) = ((u0 - v0.powf(e.q)) / n, (v0 - u0.powf(e.p)) / n);
    let mut y = [u0 + 0.5 * a * r0 * r0, v0 + 0.5 * b * r0 * r0, a * r0, b * r0];
    let steps = ((r_end - r0) / 1e-3).ceil() as usize;
    let h = (r_end - r0) / steps as f64;
    let mut r = r0;
    for _ in 0..steps {
        let add = |y: [f64; 4], k: [f64; 4], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]];
        let k1 = rhs(r, y);
        let k2 = rhs(r + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = rhs(r + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = rhs(r + h, add(y, k3, h));
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        r += h;
    }
    y
}

/// Far-field condition `f' + (1 + (N-1)/(2r)) f = 0` for both components.
fn mismatch(e: &ExponentPair, u0: f64, v0: f64, r_end: f64) -> [f64; 2] {
    let y = shoot(e, u0, v0, r_end);
    let k = 1.0 + (e.dim as f64 - 1.0) / (2.0 * r_end);
    [y[2] + k * y[0], y[3] + k * y[1]]
}

/// `(U(0), V(0))` of the positive radial solution by Newton shooting on
/// the far-field condition, continued in the matching radius.
pub fn shooting_oracle(e: &ExponentPair) -> (f64, f64) {
    let (mut u0, mut v0) = (5.0, 3.5);
    for r_end in [3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0] {
        for _ in 0..30 {
            let f = mismatch(&e, u0, v0, r_end);
            let d = 1e-7;
            let fu = mismatch(&e, u0 + d, v0, r_end);
            let fv = mismatch(&e, u0, v0 + d, r_end);
            let j = [[(fu[0] - f[0]) / d, (fv[0] - f[0]) / d], [(fu[1] - f[1]) / d, (fv[1] - f[1]) / d]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let du = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
            let dv = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
            let damp = (0.2 / du.abs().max(dv.abs())).min(1.0);
            let (du, dv) = (damp * du, damp * dv);
            u0 -= du;
            v0 -= dv;
            if du.abs().max(dv.abs()) < 1e-13 {
                break;
            }
        }
    }
    (u0, v0)
}

/// Periodic spectral second-derivative matrix on `n` points of period `l`.
fn d2_matrix(n: usize, l: f64) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    let s = (2.0 * PI / l).powi(2);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            s * (-PI * PI / (3.0 * h * h) - 1.0 / 6.0)
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            s * (-sign / (2.0 * (0.5 * d * h).sin().powi(2)))
        }
    })
}

/// Dense solve of `(-eps^2 (sqrt(a) D2 sqrt(a) - c) + sqrt(g)) u = sqrt(g) f`
/// on a 3-D cube, `a = e^psi`, `sqrt(g) = e^{3 psi}`, `c = sqrt(a) D2 sqrt(a)`.
pub fn dense_helmholtz_solve(grid: &Grid, f: &[f64], eps: f64, psi: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let n = grid.shape()[0];
    let len = grid.len();
    let d2 = d2_matrix(n, grid.period());
    let eye = DMatrix::<f64>::identity(n, n);
    let lap = d2.kronecker(&eye).kronecker(&eye) + eye.kronecker(&d2).kronecker(&eye) + eye.kronecker(&eye).kronecker(&d2);
    let psi: Vec<f64> = (0..len).map(|i| psi(&grid.node(i))).collect();
    let sa = DVector::from_iterator(len, psi.iter().map(|p| (0.5 * p).exp()));
    let sg: Vec<f64> = psi.iter().map(|p| (3.0 * p).exp()).collect();
    let c = sa.component_mul(&(&lap * &sa));
    let mut a = DMatrix::from_diagonal(&sa) * &lap * DMatrix::from_diagonal(&sa) - DMatrix::from_diagonal(&c);
    a *= -eps * eps;
    for i in 0..len {
        a[(i, i)] += sg[i];
    }
    let rhs = DVector::from_iterator(len, f.iter().zip(&sg).map(|(x, w)| x * w));
    a.lu().solve(&rhs).unwrap().as_slice().to_vec()
}
