//! Periodic tensor grids and the real fields sampled on them.
//!
//! Nodes sit at `x_k = i_k * L / n_k`, `i_k = 0..n_k`, on the box `[0, L)^N`.
//! Storage is row-major with the last axis fastest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    shape: Vec<usize>,
    period: f64,
}

impl Grid {
    pub fn new(shape: Vec<usize>, period: f64) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::InvalidInput("grid needs at least one axis".into()));
        }
        if let Some(&n) = shape.iter().find(|&&n| n < 8 || n % 2 != 0) {
            return Err(Error::InvalidInput(format!(
                "grid axes must be even and at least 8 points (got {n})"
            )));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidInput(format!("box period must be positive (got {period})")));
        }
        Ok(Self { shape, period })
    }

    /// Cube with `n` points on each of `dim` axes.
    pub fn cube(dim: usize, n: usize, period: f64) -> Result<Self> {
        Self::new(vec![n; dim], period)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.period / self.shape[axis] as f64
    }

    /// Largest spacing over all axes.
    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).product()
    }

    pub fn box_volume(&self) -> f64 {
        self.period.powi(self.dim() as i32)
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.shape[k + 1];
        }
        strides
    }

    pub fn unravel(&self, mut index: usize, out: &mut [usize]) {
        for k in (0..self.dim()).rev() {
            out[k] = index % self.shape[k];
            index /= self.shape[k];
        }
    }

    pub fn ravel(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Ravel with periodic wrap of signed indices.
    pub fn ravel_wrapped(&self, multi: &[i64]) -> usize {
        multi.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| {
            acc * n + i.rem_euclid(n as i64) as usize
        })
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        i as f64 * self.spacing(axis)
    }

    pub fn node(&self, index: usize) -> Vec<f64> {
        let mut multi = vec![0; self.dim()];
        self.unravel(index, &mut multi);
        multi
            .iter()
            .enumerate()
            .map(|(k, &i)| self.coordinate(k, i))
            .collect()
    }

    /// Wraps a coordinate difference into `[-L/2, L/2)`.
    pub fn wrap_delta(&self, delta: f64) -> f64 {
        let l = self.period;
        delta - l * (delta / l + 0.5).floor()
    }

    /// Minimal periodic image of `b - a`.
    pub fn min_image(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| self.wrap_delta(y - x)).collect()
    }

    pub fn flat_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.min_image(a, b).iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    /// Reduces a point into the fundamental box `[0, L)^N`.
    pub fn reduce(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v.rem_euclid(self.period)).collect()
    }

    /// Fills a field by evaluating `f` at every node.
    pub fn sample(&self, mut f: impl FnMut(&[f64]) -> f64) -> GridField {
        let mut multi = vec![0; self.dim()];
        let mut x = vec![0.0; self.dim()];
        let values = (0..self.len())
            .map(|idx| {
                self.unravel(idx, &mut multi);
                for k in 0..self.dim() {
                    x[k] = self.coordinate(k, multi[k]);
                }
                f(&x)
            })
            .collect();
        GridField::from_values(self.clone(), values)
    }
}

/// Real samples at every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Grid,
    values: Vec<f64>,
}

impl GridField {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len(), "field length must match the grid");
        Self { grid, values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the largest sample; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Order-fixed sum: blocks of 1024 summed left to right, so results do not
/// depend on thread scheduling.
pub fn stable_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut total = 0.0;
    let mut block = 0.0;
    for (i, v) in values.enumerate() {
        block += v;
        if i % 1024 == 1023 {
            total += block;
            block = 0.0;
        }
    }
    total + block
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    stable_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// `sign(x) |x|^e`, continuous through zero for `e > 0`.
pub fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_or_small_axes() {
        assert!(Grid::new(vec![9, 16], 1.0).is_err());
        assert!(Grid::new(vec![6], 1.0).is_err());
        assert!(Grid::new(vec![8, 8], 0.0).is_err());
        assert!(Grid::new(vec![8, 10], 1.0).is_ok());
    }

    #[test]
    fn ravel_roundtrip() {
        let g = Grid::new(vec![8, 10, 12], 2.0).unwrap();
        let mut m = vec![0; 3];
        for idx in [0, 1, 17, 959] {
            g.unravel(idx, &mut m);
            assert_eq!(g.ravel(&m), idx);
        }
        assert_eq!(g.ravel_wrapped(&[-1, 10, 13]), g.ravel(&[7, 0, 1]));
    }

    #[test]
    fn minimal_image() {
        let g = Grid::cube(2, 8, 4.0).unwrap();
        assert_eq!(g.flat_distance(&[0.0, 0.0], &[2.0, 0.0]), 2.0);
        assert!((g.flat_distance(&[0.5, 0.0], &[3.5, 0.0]) - 1.0).abs() < 1e-15);
        assert!((g.wrap_delta(-2.0) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        let g = Grid::cube(1, 8, 1.0).unwrap();
        let f = GridField::from_values(g, vec![0., 3., 1., 3., 0., 0., 0., 0.]);
        assert_eq!(f.argmax(), 1);
    }
}
