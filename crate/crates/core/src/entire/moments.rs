//! Radial quadrature with exact treatment of the origin.

use serde::{Deserialize, Serialize};

const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D3: [f64; 4] = [-61.0 / 30.0, 169.0 / 120.0, -3.0 / 10.0, 7.0 / 240.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `int U^{p+1}`.
    pub a0: f64,
    /// `int V^{q+1}`.
    pub b0: f64,
    /// `int U^{p+1} |y|^2`.
    pub m2u: f64,
    /// `int V^{q+1} |y|^2`.
    pub m2v: f64,
    /// Largest share of any moment carried by the extrapolated tail.
    pub tail_fraction: f64,
}

/// `Gamma(n / 2)`.
pub fn gamma_half(n: usize) -> f64 {
    match n {
        1 => std::f64::consts::PI.sqrt(),
        2 => 1.0,
        _ => (n as f64 / 2.0 - 1.0) * gamma_half(n - 2),
    }
}

/// Area of the unit sphere in `R^N`.
pub fn sphere_area(dim: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(dim as f64 / 2.0) / gamma_half(dim)
}

/// `omega_{N-1} int_0^R f(r) r^{N-1+k} dr` for an even profile `f` sampled at
/// `r_i = i h`.
///
/// Trapezoid plus Euler-Maclaurin corrections at the origin, where the
/// odd derivatives come from the reflected profile. The far end is assumed
/// to have negligible derivatives.
pub fn radial_integral(h: f64, f: &[f64], dim: usize, k: usize) -> f64 {
    let power = (dim - 1 + k) as i32;
    let g: Vec<f64> = f.iter().enumerate().map(|(i, v)| v * (i as f64 * h).powi(power)).collect();
    let n = g.len();
    let trap = h * (g.iter().sum::<f64>() - 0.5 * (g[0] + g[n - 1]));
    let odd = power % 2 == 1;
    let correction = if odd && n > 4 {
        let d1: f64 = (1..=4).map(|s| D1[s - 1] * 2.0 * g[s]).sum::<f64>() / h;
        let d3: f64 = (1..=4).map(|s| D3[s - 1] * 2.0 * g[s]).sum::<f64>() / h.powi(3);
        h * h / 12.0 * d1 - h.powi(4) / 720.0 * d3
    } else {
        0.0
    };
    sphere_area(dim) * (trap + correction)
}

/// `omega_{N-1} int_R^inf f(r) r^{N-1+k} dr` for a smooth decaying `f`,
/// composite Simpson out to where the integrand is negligible.
pub fn tail_integral(r0: f64, f: impl Fn(f64) -> f64, rate: f64, dim: usize, k: usize) -> f64 {
    let span = 60.0 / rate.max(1e-3);
    let steps = 4000;
    let h = span / steps as f64;
    let power = (dim - 1 + k) as i32;
    let g = |r: f64| f(r) * r.powi(power);
    let mut s = g(r0) + g(r0 + span);
    for i in 1..steps {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(r0 + i as f64 * h);
    }
    sphere_area(dim) * s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn gaussian_in_even_dimension() {
        // int_{R^2} e^{-r^2} = pi; the integrand r e^{-r^2} is odd at the origin
        let h = 0.01;
        let f: Vec<f64> = (0..=1200).map(|i| (-(i as f64 * h).powi(2)).exp()).collect();
        let v = radial_integral(h, &f, 2, 0);
        assert!((v - PI).abs() / PI < 1e-10, "{v}");
    }

    #[test]
    fn exponential_tail() {
        let t = tail_integral(10.0, |r| (-r).exp(), 1.0, 1, 0);
        assert!((t - 2.0 * (-10.0f64).exp()).abs() < 1e-12);
    }
}
