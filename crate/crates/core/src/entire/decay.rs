//! Log-linear fits of exponentially decaying radial tails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `f(r) ~ prefactor * exp(-rate r) * r^power * (1 - exp(-2 rate (R - r)))`,
/// the last factor present only for a Dirichlet wall at `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    pub power: f64,
    pub wall: Option<f64>,
}

impl DecayModel {
    pub fn pure() -> Self {
        Self { power: 0.0, wall: None }
    }

    /// Far field of `(-Lap + 1)` in `R^N` truncated at `R`.
    pub fn far_field(dim: usize, wall: f64) -> Self {
        Self { power: -0.5 * (dim as f64 - 1.0), wall: Some(wall) }
    }

    fn shape(&self, r: f64, rate: f64) -> f64 {
        let mut s = self.power * r.ln();
        if let Some(w) = self.wall {
            s += (-(-2.0 * rate * (w - r)).exp()).ln_1p();
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub prefactor: f64,
    /// Largest deviation between `log f` and the fitted model.
    pub residual: f64,
    pub model: DecayModel,
}

impl DecayFit {
    /// Whole-space tail `prefactor * exp(-rate r) * r^power`.
    pub fn tail(&self, r: f64) -> f64 {
        self.prefactor * (-self.rate * r).exp() * r.powf(self.model.power)
    }
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Fits `rate` and `prefactor` on the samples `(r_i, f_i)`.
pub fn fit_decay(r: &[f64], f: &[f64], model: DecayModel) -> Result<DecayFit> {
    if r.len() < 3 {
        return Err(Error::InvalidInput("decay fit needs at least 3 samples".into()));
    }
    if f.iter().any(|&v| !(v >= f64::MIN_POSITIVE) || !v.is_finite()) {
        return Err(Error::WindowUnderflow);
    }
    let logs: Vec<f64> = f.iter().map(|v| v.ln()).collect();
    let mut rate = -line_fit(r, &logs).1;
    let mut intercept = 0.0;
    for _ in 0..200 {
        let y: Vec<f64> = r.iter().zip(&logs).map(|(&ri, &li)| li - model.shape(ri, rate)).collect();
        let (a, slope) = line_fit(r, &y);
        intercept = a;
        let next = -slope;
        let done = (next - rate).abs() <= 1e-15 * next.abs().max(1.0);
        rate = next;
        if done {
            break;
        }
    }
    let residual = r
        .iter()
        .zip(&logs)
        .map(|(&ri, &li)| (li - (intercept - rate * ri + model.shape(ri, rate))).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit { rate, prefactor: intercept.exp(), residual, model })
}
