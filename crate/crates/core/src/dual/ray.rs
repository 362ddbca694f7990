//! The fibering map `h(t) = I(t w)` along a ray of dual pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::energy::DualPair;

/// `h(t) = p/(p+1) t^{(p+1)/p} a + q/(q+1) t^{(q+1)/q} b - t^2 c / 2`.
///
/// `a = int |w1|^{(p+1)/p}`, `b = int |w2|^{(q+1)/q}` and
/// `c = int (w1 T w2 + w2 T w1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayCoefficients {
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl RayCoefficients {
    pub fn value(&self, t: f64) -> f64 {
        let (p, q) = (self.p, self.q);
        p / (p + 1.0) * t.powf((p + 1.0) / p) * self.a + q / (q + 1.0) * t.powf((q + 1.0) / q) * self.b
            - 0.5 * t * t * self.c
    }

    pub fn derivative(&self, t: f64) -> f64 {
        t.powf(1.0 / self.p) * self.a + t.powf(1.0 / self.q) * self.b - t * self.c
    }

    /// `h'(t) / t`, strictly decreasing on `(0, inf)`.
    fn reduced(&self, s: f64) -> f64 {
        let t = s.exp();
        t.powf(1.0 / self.p - 1.0) * self.a + t.powf(1.0 / self.q - 1.0) * self.b - self.c
    }

    /// Unique positive critical point of `h`, found by safeguarded Newton in
    /// `log t`.
    pub fn maximizer(&self) -> Result<f64> {
        if !(self.c > 0.0) || !(self.a + self.b > 0.0) {
            return Err(Error::NoPositiveMax { cross: self.c });
        }
        let (mut lo, mut hi) = (-1.0, 1.0);
        while self.reduced(lo) <= 0.0 {
            lo *= 2.0;
        }
        while self.reduced(hi) >= 0.0 {
            hi *= 2.0;
        }
        let mut s = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.reduced(s);
            if f > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let t = s.exp();
            let df = (1.0 / self.p - 1.0) * t.powf(1.0 / self.p - 1.0) * self.a
                + (1.0 / self.q - 1.0) * t.powf(1.0 / self.q - 1.0) * self.b;
            let mut next = s - f / df;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() < 1e-15 * (1.0 + s.abs()) {
                s = next;
                break;
            }
            s = next;
        }
        Ok(s.exp())
    }
}

/// Samples of `h(t)` along the ray through a dual pair, with its maximizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayProfile {
    pub coefficients: RayCoefficients,
    pub t: Vec<f64>,
    pub h: Vec<f64>,
    pub t_star: f64,
}

/// Ray coefficients of a dual pair from one pair of Helmholtz solves.
pub fn ray_coefficients(pair: &DualPair) -> Result<RayCoefficients> {
    let (a, b) = pair.masses();
    let (t1, t2) = pair.inverses()?;
    Ok(RayCoefficients { p: pair.exponents.p, q: pair.exponents.q, a, b, c: pair.cross(&t1, &t2) })
}

pub fn ray_profile(pair: &DualPair, t_grid: &[f64]) -> Result<RayProfile> {
    let coefficients = ray_coefficients(pair)?;
    let t_star = coefficients.maximizer()?;
    Ok(RayProfile {
        coefficients,
        t: t_grid.to_vec(),
        h: t_grid.iter().map(|&t| coefficients.value(t)).collect(),
        t_star,
    })
}
