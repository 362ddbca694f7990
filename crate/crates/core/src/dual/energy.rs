//! Primal and dual energies on the discretized manifold.

use crate::entire::ExponentPair;
use crate::error::{Error, Result};
use crate::geometry::{laplace_beltrami_pair, ConformalMetric};
use crate::grid::{signed_pow, GridField};

use super::helmholtz::Helmholtz;

/// Dual variables `(w1, w2)` at scale `eps`.
#[derive(Debug, Clone)]
pub struct DualPair<'a> {
    pub metric: &'a ConformalMetric,
    pub w1: GridField,
    pub w2: GridField,
    pub exponents: ExponentPair,
    pub eps: f64,
}

impl<'a> DualPair<'a> {
    pub fn new(metric: &'a ConformalMetric, w1: GridField, w2: GridField, exponents: ExponentPair, eps: f64) -> Result<Self> {
        if w1.grid() != metric.grid() || w2.grid() != metric.grid() {
            return Err(Error::InvalidInput("dual fields must live on the metric grid".into()));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidInput(format!("eps must be positive (got {eps})")));
        }
        Ok(Self { metric, w1, w2, exponents, eps })
    }

    /// `(|u|^{p-1} u, |v|^{q-1} v)`.
    pub fn from_primal(metric: &'a ConformalMetric, u: &GridField, v: &GridField, exponents: ExponentPair, eps: f64) -> Result<Self> {
        let w1 = u.map(|x| signed_pow(x, exponents.p));
        let w2 = v.map(|x| signed_pow(x, exponents.q));
        Self::new(metric, w1, w2, exponents, eps)
    }

    /// `(T w1, T w2)`.
    pub fn inverses(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        Helmholtz::new(self.metric, self.eps)?.inverse_pair(self.w1.values(), self.w2.values())
    }

    /// `int |w1|^{(p+1)/p}` and `int |w2|^{(q+1)/q}`.
    pub fn masses(&self) -> (f64, f64) {
        let (p, q) = (self.exponents.p, self.exponents.q);
        let a: Vec<f64> = self.w1.values().iter().map(|w| w.abs().powf((p + 1.0) / p)).collect();
        let b: Vec<f64> = self.w2.values().iter().map(|w| w.abs().powf((q + 1.0) / q)).collect();
        (self.metric.integrate(&a), self.metric.integrate(&b))
    }

    /// `int (w1 T w2 + w2 T w1)` given the inverses.
    pub fn cross(&self, t1: &[f64], t2: &[f64]) -> f64 {
        self.metric.inner(self.w1.values(), t2) + self.metric.inner(self.w2.values(), t1)
    }
}

/// `I = int p/(p+1)|w1|^{(p+1)/p} + q/(q+1)|w2|^{(q+1)/q} - 1/2 int (w1 T w2 + w2 T w1)`.
pub fn dual_energy(pair: &DualPair) -> Result<f64> {
    let (p, q) = (pair.exponents.p, pair.exponents.q);
    let (a, b) = pair.masses();
    let (t1, t2) = pair.inverses()?;
    Ok(p / (p + 1.0) * a + q / (q + 1.0) * b - 0.5 * pair.cross(&t1, &t2))
}

/// Riesz representers of `I'` in the `sqrt(g)`-weighted pairing:
/// `(|w1|^{1/p-1} w1 - T w2, |w2|^{1/q-1} w2 - T w1)`.
pub fn dual_gradient(pair: &DualPair) -> Result<(GridField, GridField)> {
    let (p, q) = (pair.exponents.p, pair.exponents.q);
    let (t1, t2) = pair.inverses()?;
    let g1: Vec<f64> = pair.w1.values().iter().zip(&t2).map(|(w, t)| signed_pow(*w, 1.0 / p) - t).collect();
    let g2: Vec<f64> = pair.w2.values().iter().zip(&t1).map(|(w, t)| signed_pow(*w, 1.0 / q) - t).collect();
    let grid = pair.metric.grid().clone();
    Ok((GridField::from_values(grid.clone(), g1), GridField::from_values(grid, g2)))
}

/// `J = int eps^2 <grad u, grad v>_g + u v - u^{p+1}/(p+1) - v^{q+1}/(q+1)`.
///
/// The gradient term is evaluated as `-eps^2 <u, Delta_g v>`, the same
/// discrete operator the solvers use.
pub fn primal_energy(u: &GridField, v: &GridField, metric: &ConformalMetric, eps: f64, e: &ExponentPair) -> f64 {
    let (uv, vv) = (u.values(), v.values());
    let zeros = vec![0.0; vv.len()];
    let (lv, _) = laplace_beltrami_pair(metric, vv, &zeros);
    let grad = -metric.inner(uv, &lv);
    let nl: Vec<f64> = uv
        .iter()
        .zip(vv)
        .map(|(a, b)| a.abs().powf(e.p + 1.0) / (e.p + 1.0) + b.abs().powf(e.q + 1.0) / (e.q + 1.0))
        .collect();
    eps * eps * grad + metric.inner(uv, vv) - metric.integrate(&nl)
}

/// [`primal_energy`] with the gradient term from explicit spectral
/// gradients, `int e^{(N-2) psi} grad u . grad v`.
pub fn primal_energy_gradient_form(u: &GridField, v: &GridField, metric: &ConformalMetric, eps: f64, e: &ExponentPair) -> f64 {
    let (gu, gv) = metric.spectral().gradient_pair(u.values(), v.values());
    let dot: Vec<f64> = (0..u.values().len())
        .map(|i| {
            let s: f64 = gu.iter().zip(&gv).map(|(a, b)| a[i] * b[i]).sum();
            s * (-2.0 * metric.psi_values()[i]).exp()
        })
        .collect();
    let nl: Vec<f64> = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a.abs().powf(e.p + 1.0) / (e.p + 1.0) + b.abs().powf(e.q + 1.0) / (e.q + 1.0))
        .collect();
    eps * eps * metric.integrate(&dot) + metric.inner(u.values(), v.values()) - metric.integrate(&nl)
}
