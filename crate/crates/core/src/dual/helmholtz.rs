//! `(-eps^2 Delta_g + 1)^{-1}` by preconditioned conjugate gradients.
//!
//! The operator is solved in its symmetric weighted form
//! `A = -eps^2 (sqrt(a) Lap sqrt(a) - c) + sqrt(g)`, so that
//! `(-eps^2 Delta_g + 1) u = f` becomes `A u = sqrt(g) f`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ConformalMetric;
use crate::grid::{stable_sum, GridField};
use crate::spectral::Spectral;

pub const MAX_ITERATIONS: usize = 500;
pub const DEFAULT_RTOL: f64 = 1e-12;

/// Weighted Helmholtz operator with its Fourier preconditioner.
pub struct Helmholtz<'a> {
    metric: &'a ConformalMetric,
    eps: f64,
    coeff_a: f64,
    coeff_b: f64,
}

/// Componentwise Euclidean dot products of two packed pairs.
pub fn dot_pair(x: &[Complex64], y: &[Complex64]) -> (f64, f64) {
    (
        stable_sum(x.iter().zip(y).map(|(a, b)| a.re * b.re)),
        stable_sum(x.iter().zip(y).map(|(a, b)| a.im * b.im)),
    )
}

/// Full real dot product of two packed vectors.
pub fn dot_real(x: &[Complex64], y: &[Complex64]) -> f64 {
    let (a, b) = dot_pair(x, y);
    a + b
}

impl<'a> Helmholtz<'a> {
    pub fn new(metric: &'a ConformalMetric, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!("eps must be positive (got {eps})")));
        }
        let n = metric.dim() as f64;
        let m = metric.psi_mean();
        Ok(Self { metric, eps, coeff_a: ((n - 2.0) * m).exp(), coeff_b: (n * m).exp() })
    }

    pub fn metric(&self) -> &ConformalMetric {
        self.metric
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `A z` for a packed pair.
    pub fn apply_packed(&self, z: &[Complex64]) -> Vec<Complex64> {
        let m = self.metric;
        let sa = m.sqrt_a_values();
        let mut w: Vec<Complex64> = z.iter().zip(sa).map(|(c, s)| c * s).collect();
        m.spectral().apply_radial_packed(&mut w, |k2| -k2);
        let e2 = self.eps * self.eps;
        w.iter()
            .zip(z)
            .zip(sa.iter().zip(m.potential_values()))
            .zip(m.sqrt_g_values())
            .map(|(((l, zi), (s, c)), b)| -e2 * (l * s - zi * c) + zi * b)
            .collect()
    }

    /// Approximate inverse `(c_b + eps^2 c_a |k|^2)^{-1}` in Fourier space.
    pub fn precondition_packed(&self, r: &[Complex64]) -> Vec<Complex64> {
        let mut z = r.to_vec();
        let (ca, cb, e2) = (self.coeff_a, self.coeff_b, self.eps * self.eps);
        self.metric.spectral().apply_radial_packed(&mut z, |k2| 1.0 / (cb + e2 * ca * k2));
        z
    }

    /// Solves `A x = rhs` for both packed components at once.
    pub fn solve_weighted_packed(&self, rhs: &[Complex64], rtol: f64) -> Result<(Vec<Complex64>, usize)> {
        let (b_re, b_im) = dot_pair(rhs, rhs);
        let norms = (b_re.sqrt(), b_im.sqrt());
        let mut x = vec![Complex64::default(); rhs.len()];
        let mut r = rhs.to_vec();
        let mut z = self.precondition_packed(&r);
        let mut p = z.clone();
        let mut rz = dot_pair(&r, &z);
        let done = |r: &[Complex64]| {
            let (a, b) = dot_pair(r, r);
            let ra = if norms.0 > 0.0 { a.sqrt() / norms.0 } else { 0.0 };
            let rb = if norms.1 > 0.0 { b.sqrt() / norms.1 } else { 0.0 };
            ra.max(rb)
        };
        let mut rel = done(&r);
        for it in 0..MAX_ITERATIONS {
            if rel <= rtol {
                return Ok((x, it));
            }
            let ap = self.apply_packed(&p);
            let pap = dot_pair(&p, &ap);
            let alpha = (safe_div(rz.0, pap.0), safe_div(rz.1, pap.1));
            for i in 0..x.len() {
                x[i] += Complex64::new(alpha.0 * p[i].re, alpha.1 * p[i].im);
                r[i] -= Complex64::new(alpha.0 * ap[i].re, alpha.1 * ap[i].im);
            }
            rel = done(&r);
            z = self.precondition_packed(&r);
            let rz_new = dot_pair(&r, &z);
            let beta = (safe_div(rz_new.0, rz.0), safe_div(rz_new.1, rz.1));
            for i in 0..p.len() {
                p[i] = Complex64::new(z[i].re + beta.0 * p[i].re, z[i].im + beta.1 * p[i].im);
            }
            rz = rz_new;
        }
        if rel <= rtol {
            Ok((x, MAX_ITERATIONS))
        } else {
            Err(Error::KrylovStall { iterations: MAX_ITERATIONS, residual: rel })
        }
    }

    /// `T f` and `T h` for two right-hand sides.
    pub fn inverse_pair(&self, f: &[f64], h: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let b = self.metric.sqrt_g_values();
        let rhs: Vec<Complex64> = f
            .iter()
            .zip(h)
            .zip(b)
            .map(|((x, y), w)| Complex64::new(x * w, y * w))
            .collect();
        let (x, _) = self.solve_weighted_packed(&rhs, DEFAULT_RTOL)?;
        Ok(Spectral::unpack(&x))
    }

    /// `(-eps^2 Delta_g + 1) u`, unweighted.
    pub fn forward_pair(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let az = self.apply_packed(&Spectral::pack(u, v));
        let b = self.metric.sqrt_g_values();
        (
            az.iter().zip(b).map(|(c, w)| c.re / w).collect(),
            az.iter().zip(b).map(|(c, w)| c.im / w).collect(),
        )
    }
}

fn safe_div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Solves `(-eps^2 Delta_g + id) u = f`.
pub fn helmholtz_inverse(metric: &ConformalMetric, eps: f64, f: &GridField) -> Result<GridField> {
    let h = Helmholtz::new(metric, eps)?;
    let zeros = vec![0.0; f.values().len()];
    let (u, _) = h.inverse_pair(f.values(), &zeros)?;
    Ok(GridField::from_values(metric.grid().clone(), u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricKind;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn flat_mode_is_scaled() {
        let l = 2.0;
        let grid = Grid::cube(2, 16, l).unwrap();
        let m = ConformalMetric::flat(grid.clone());
        let f = grid.sample(|x| (2.0 * PI * (x[0] + 2.0 * x[1]) / l).cos());
        let eps = 0.3;
        let u = helmholtz_inverse(&m, eps, &f).unwrap();
        let factor = 1.0 / (1.0 + eps * eps * (2.0 * PI / l).powi(2) * 5.0);
        for (a, b) in u.values().iter().zip(f.values()) {
            assert!((a - factor * b).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_on_cosine_metric() {
        let grid = Grid::cube(3, 16, 1.0).unwrap();
        let m = ConformalMetric::new(grid.clone(), MetricKind::Cosine { amplitude: 0.3, mode: vec![1, 0, 1] }).unwrap();
        let u0 = grid.sample(|x| (2.0 * PI * x[0]).sin() + (2.0 * PI * x[1]).cos() * (2.0 * PI * x[2]).cos());
        let h = Helmholtz::new(&m, 0.1).unwrap();
        let zeros = vec![0.0; grid.len()];
        let (f, _) = h.forward_pair(u0.values(), &zeros);
        let u = helmholtz_inverse(&m, 0.1, &GridField::from_values(grid, f)).unwrap();
        assert!(u.max_abs_diff(&u0) < 1e-10);
    }
}
