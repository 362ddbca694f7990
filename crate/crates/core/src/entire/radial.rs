//! Eighth-order finite differences for the radial Laplacian
//! `u'' + (N-1) u' / r` on `[0, R]`, even at the origin, zero at `R`.

use super::banded::BandMatrix;

const D2: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
pub const HALF_WIDTH: usize = 4;

#[derive(Debug, Clone)]
pub struct RadialOperator {
    pub dim: usize,
    pub h: f64,
    /// Unknown nodes `r_i = i h`, `i = 0..m`; the node `r_m = R` is pinned to zero.
    pub m: usize,
}

/// Where a stencil reference `i + s` lands after folding ghost nodes:
/// `Some((index, sign))`, or `None` for the pinned boundary node.
pub fn fold(j: i64, m: usize) -> Option<(usize, f64)> {
    let m = m as i64;
    if j < 0 {
        Some(((-j) as usize, 1.0))
    } else if j < m {
        Some((j as usize, 1.0))
    } else if j == m {
        None
    } else {
        Some(((2 * m - j) as usize, -1.0))
    }
}

impl RadialOperator {
    pub fn new(dim: usize, r_max: f64, m: usize) -> Self {
        Self { dim, h: r_max / m as f64, m }
    }

    /// Stencil weights `w_s`, `s = -4..=4`, such that
    /// `(Lap u)_i = sum_s w_s (u_{i+s} - u_i)`.
    pub fn weights(&self, i: usize) -> [f64; 2 * HALF_WIDTH + 1] {
        let mut w = [0.0; 2 * HALF_WIDTH + 1];
        let h2 = self.h * self.h;
        let n = self.dim as f64;
        for s in 1..=HALF_WIDTH {
            let c2 = D2[s - 1] / h2;
            if i == 0 {
                w[HALF_WIDTH + s] = n * c2;
                w[HALF_WIDTH - s] = n * c2;
            } else {
                let c1 = (n - 1.0) / (i as f64 * self.h) * D1[s - 1] / self.h;
                w[HALF_WIDTH + s] = c2 + c1;
                w[HALF_WIDTH - s] = c2 - c1;
            }
        }
        w
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| {
                let w = self.weights(i);
                let mut acc = 0.0;
                for (k, &wk) in w.iter().enumerate() {
                    if k == HALF_WIDTH {
                        continue;
                    }
                    let j = i as i64 + k as i64 - HALF_WIDTH as i64;
                    let val = fold(j, self.m).map_or(0.0, |(idx, sg)| sg * u[idx]);
                    acc += wk * (val - u[i]);
                }
                acc
            })
            .collect()
    }

    /// Adds `scale * Lap` into rows/columns `stride * i + offset`.
    pub fn assemble_into(&self, a: &mut BandMatrix, stride: usize, offset: usize, scale: f64) {
        for i in 0..self.m {
            let w = self.weights(i);
            let row = stride * i + offset;
            for (k, &wk) in w.iter().enumerate() {
                if k == HALF_WIDTH {
                    continue;
                }
                a.add(row, row, -scale * wk);
                let j = i as i64 + k as i64 - HALF_WIDTH as i64;
                if let Some((idx, sg)) = fold(j, self.m) {
                    a.add(row, stride * idx + offset, scale * sg * wk);
                }
            }
        }
    }

    /// Eighth-order first derivative with the same ghost folding.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| {
                let mut acc = 0.0;
                for s in 1..=HALF_WIDTH {
                    let fwd = fold(i as i64 + s as i64, self.m).map_or(0.0, |(j, g)| g * u[j]);
                    let bwd = fold(i as i64 - s as i64, self.m).map_or(0.0, |(j, g)| g * u[j]);
                    acc += D1[s - 1] * (fwd - bwd);
                }
                acc / self.h
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_of_gaussian() {
        for dim in [1, 2, 3] {
            let op = RadialOperator::new(dim, 12.0, 1200);
            let u: Vec<f64> = (0..op.m).map(|i| (-(i as f64 * op.h).powi(2)).exp()).collect();
            let lu = op.apply(&u);
            for i in [0, 5, 100, 400] {
                let r = i as f64 * op.h;
                let exact = (4.0 * r * r - 2.0 * dim as f64) * (-r * r).exp();
                assert!((lu[i] - exact).abs() < 1e-9, "dim {dim} i {i}: {} vs {exact}", lu[i]);
            }
        }
    }

    #[test]
    fn assembled_matches_apply() {
        let op = RadialOperator::new(3, 2.0, 40);
        let mut a = BandMatrix::zeros(op.m, HALF_WIDTH, HALF_WIDTH);
        op.assemble_into(&mut a, 1, 0, 1.0);
        let u: Vec<f64> = (0..op.m).map(|i| (0.3 * i as f64).cos()).collect();
        let x = a.mul_vec(&u);
        let y = op.apply(&u);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-9 * (1.0 + q.abs()));
        }
    }
}
