//! Fourier machinery on periodic grids.
//!
//! Two real fields are packed into one complex transform whenever the applied
//! symbol is that of a real operator, which halves the transform count.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{Grid, GridField};

const BATCH: usize = 32;

pub struct Spectral {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    wavenumbers: Vec<Vec<f64>>,
    k2: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

/// Signed integer frequency of FFT bin `i` on an axis of `n` points.
/// The Nyquist bin maps to `-n/2`.
pub fn frequency(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = grid.shape().iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = grid.shape().iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let scale = 2.0 * std::f64::consts::PI / grid.period();
        let wavenumbers: Vec<Vec<f64>> = grid
            .shape()
            .iter()
            .map(|&n| (0..n).map(|i| scale * frequency(i, n) as f64).collect())
            .collect();
        let mut multi = vec![0; grid.dim()];
        let k2 = (0..grid.len())
            .map(|idx| {
                grid.unravel(idx, &mut multi);
                multi
                    .iter()
                    .enumerate()
                    .map(|(a, &i)| wavenumbers[a][i] * wavenumbers[a][i])
                    .sum()
            })
            .collect();
        Self {
            grid: grid.clone(),
            forward,
            inverse,
            wavenumbers,
            k2,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `|k|^2` per FFT bin, Nyquist included.
    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    fn transform(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        let shape = self.grid.shape();
        let strides = self.grid.strides();
        for axis in 0..shape.len() {
            let n = shape[axis];
            let plan = &plans[axis];
            let stride = strides[axis];
            if stride == 1 {
                plan.process(buf);
                continue;
            }
            let mut scratch = vec![Complex64::default(); n * BATCH.min(stride)];
            for block in buf.chunks_mut(n * stride) {
                let mut j0 = 0;
                while j0 < stride {
                    let width = BATCH.min(stride - j0);
                    let work = &mut scratch[..n * width];
                    for i in 0..n {
                        let row = &block[i * stride + j0..i * stride + j0 + width];
                        for (b, z) in row.iter().enumerate() {
                            work[b * n + i] = *z;
                        }
                    }
                    plan.process(work);
                    for i in 0..n {
                        let row = &mut block[i * stride + j0..i * stride + j0 + width];
                        for (b, z) in row.iter_mut().enumerate() {
                            *z = work[b * n + i];
                        }
                    }
                    j0 += width;
                }
            }
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.forward);
    }

    /// Inverse transform including the `1/len` normalization.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.inverse);
        let s = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }

    pub fn pack(a: &[f64], b: &[f64]) -> Vec<Complex64> {
        a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect()
    }

    pub fn unpack(z: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
    }

    /// Applies a real radial symbol `s(|k|^2)` to a packed pair in place.
    pub fn apply_radial_packed(&self, z: &mut [Complex64], symbol: impl Fn(f64) -> f64) {
        self.forward(z);
        for (c, &k2) in z.iter_mut().zip(&self.k2) {
            *c *= symbol(k2);
        }
        self.inverse(z);
    }

    pub fn apply_radial_pair(
        &self,
        a: &[f64],
        b: &[f64],
        symbol: impl Fn(f64) -> f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut z = Self::pack(a, b);
        self.apply_radial_packed(&mut z, symbol);
        Self::unpack(&z)
    }

    pub fn apply_radial(&self, a: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut z: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.apply_radial_packed(&mut z, symbol);
        z.iter().map(|c| c.re).collect()
    }

    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        self.apply_radial(u, |k2| -k2)
    }

    pub fn laplacian_pair(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.apply_radial_pair(u, v, |k2| -k2)
    }

    pub fn laplacian_field(&self, u: &GridField) -> GridField {
        GridField::from_values(self.grid.clone(), self.laplacian(u.values()))
    }

    fn derivative_packed(&self, spectrum: &[Complex64], axis: usize) -> Vec<Complex64> {
        let n = self.grid.shape()[axis];
        let stride = self.grid.strides()[axis];
        let mut out: Vec<Complex64> = spectrum
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let i = (idx / stride) % n;
                if i == n / 2 {
                    Complex64::default()
                } else {
                    c * Complex64::new(0.0, self.wavenumbers[axis][i])
                }
            })
            .collect();
        self.inverse(&mut out);
        out
    }

    /// Spectral partial derivative along `axis`, Nyquist mode dropped.
    pub fn derivative(&self, u: &[f64], axis: usize) -> Vec<f64> {
        let mut z: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut z);
        self.derivative_packed(&z, axis).iter().map(|c| c.re).collect()
    }

    /// Spectral gradients of two fields, one forward transform plus one
    /// inverse transform per axis.
    pub fn gradient_pair(&self, u: &[f64], v: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut z = Self::pack(u, v);
        self.forward(&mut z);
        let mut gu = Vec::with_capacity(self.grid.dim());
        let mut gv = Vec::with_capacity(self.grid.dim());
        for axis in 0..self.grid.dim() {
            let (a, b) = Self::unpack(&self.derivative_packed(&z, axis));
            gu.push(a);
            gv.push(b);
        }
        (gu, gv)
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let zeros = vec![0.0; u.len()];
        self.gradient_pair(u, &zeros).0
    }

    /// Trigonometric interpolant of a real field.
    pub fn interpolant(&self, u: &[f64]) -> Interpolant {
        let mut z: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut z);
        let s = 1.0 / z.len() as f64;
        z.iter_mut().for_each(|c| *c *= s);
        Interpolant {
            shape: self.grid.shape().to_vec(),
            wavenumbers: self.wavenumbers.clone(),
            coefficients: z,
        }
    }
}

/// Band-limited interpolant; evaluates the real trigonometric polynomial that
/// matches the samples at every node. Nyquist modes enter as cosines.
#[derive(Debug, Clone)]
pub struct Interpolant {
    shape: Vec<usize>,
    wavenumbers: Vec<Vec<f64>>,
    coefficients: Vec<Complex64>,
}

impl Interpolant {
    fn basis(&self, axis: usize, x: f64) -> Vec<Complex64> {
        let n = self.shape[axis];
        self.wavenumbers[axis]
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if i == n / 2 {
                    Complex64::new((k * x).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, k * x)
                }
            })
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut current = self.coefficients.clone();
        for axis in (0..self.shape.len()).rev() {
            let n = self.shape[axis];
            let e = self.basis(axis, x[axis]);
            current = current
                .chunks(n)
                .map(|row| row.iter().zip(&e).map(|(c, b)| c * b).sum())
                .collect();
        }
        current[0].re
    }
}

/// Periodic trigonometric interpolation weights of the `n` samples at
/// spacing `h` for the point `y` (even `n`, Nyquist mode as a cosine).
pub fn interpolation_weights(n: usize, h: f64, y: f64) -> Vec<f64> {
    let period = n as f64 * h;
    (0..n)
        .map(|j| {
            let theta = std::f64::consts::TAU * (y - j as f64 * h) / period;
            let half = 0.5 * theta;
            let s = half.sin();
            if s.abs() < 1e-13 {
                1.0
            } else {
                (n as f64 * half).sin() * half.cos() / (n as f64 * s)
            }
        })
        .collect()
}

/// Applies `out[.., i, ..] = sum_j m[i][j] in[.., j, ..]` along one axis.
pub fn apply_along_axis(grid: &Grid, values: &[f64], axis: usize, m: &[Vec<f64>]) -> Vec<f64> {
    let shape = grid.shape();
    let n = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![0.0; values.len()];
    let mut line = vec![0.0; n];
    for o in 0..outer {
        for s in 0..inner {
            let base = o * n * inner + s;
            for (j, l) in line.iter_mut().enumerate() {
                *l = values[base + j * inner];
            }
            for (i, row) in m.iter().enumerate() {
                out[base + i * inner] = row.iter().zip(&line).map(|(a, b)| a * b).sum();
            }
        }
    }
    out
}

/// Samples of the trigonometric interpolant of `values` on the line
/// `point + t e_axis`, one per entry of `offsets`.
pub fn line_samples(grid: &Grid, values: &[f64], point: &[f64], axis: usize, offsets: &[f64]) -> Vec<f64> {
    let mut current = values.to_vec();
    let mut shape = grid.shape().to_vec();
    for a in (0..grid.dim()).rev() {
        if a == axis {
            continue;
        }
        let w = interpolation_weights(grid.shape()[a], grid.spacing(a), point[a]);
        let inner: usize = shape[a + 1..].iter().product();
        let outer: usize = shape[..a].iter().product();
        let n = shape[a];
        let mut next = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..inner {
                let base = o * n * inner + s;
                next[o * inner + s] = (0..n).map(|j| w[j] * current[base + j * inner]).sum();
            }
        }
        current = next;
        shape[a] = 1;
    }
    let n = grid.shape()[axis];
    let h = grid.spacing(axis);
    offsets
        .iter()
        .map(|&t| interpolation_weights(n, h, point[axis] + t).iter().zip(&current).map(|(a, b)| a * b).sum())
        .collect()
}
