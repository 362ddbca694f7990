//! Consistency of a primal solution with its dual pair `(u^p, v^q)`.

use serde::{Deserialize, Serialize};

use crate::entire::ExponentPair;
use crate::error::Result;
use crate::geometry::ConformalMetric;
use crate::grid::GridField;

use super::energy::{dual_energy, dual_gradient, primal_energy, DualPair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// `max |T w2 - u|`.
    pub inverse_residual_u: f64,
    /// `max |T w1 - v|`.
    pub inverse_residual_v: f64,
    /// Max norm of both dual gradient components.
    pub gradient_norm: f64,
    pub energy_j: f64,
    pub energy_i: f64,
    pub energy_gap: f64,
    /// `1e-8 max(1, |u|_inf)`.
    pub threshold: f64,
}

impl DualityReport {
    pub fn relative_gap(&self) -> f64 {
        if self.energy_j == 0.0 {
            self.energy_gap
        } else {
            self.energy_gap / self.energy_j.abs()
        }
    }

    pub fn passes(&self) -> bool {
        self.inverse_residual_u < self.threshold
            && self.inverse_residual_v < self.threshold
            && self.gradient_norm < self.threshold
            && self.relative_gap() < 1e-8
    }
}

pub fn duality_check(
    metric: &ConformalMetric,
    u: &GridField,
    v: &GridField,
    eps: f64,
    exponents: &ExponentPair,
) -> Result<DualityReport> {
    let pair = DualPair::from_primal(metric, u, v, exponents.clone(), eps)?;
    let (t1, t2) = pair.inverses()?;
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let (g1, g2) = dual_gradient(&pair)?;
    let energy_j = primal_energy(u, v, metric, eps, exponents);
    let energy_i = dual_energy(&pair)?;
    Ok(DualityReport {
        inverse_residual_u: diff(&t2, u.values()),
        inverse_residual_v: diff(&t1, v.values()),
        gradient_norm: g1.max_abs().max(g2.max_abs()),
        energy_j,
        energy_i,
        energy_gap: (energy_i - energy_j).abs(),
        threshold: 1e-8 * u.max_abs().max(1.0),
    })
}
