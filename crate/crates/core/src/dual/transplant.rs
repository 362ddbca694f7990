//! Cut-off, rescaled copies of the radial ground state on the torus.

use crate::entire::RadialGroundState;
use crate::error::{Error, Result};
use crate::geometry::ConformalMetric;
use crate::grid::GridField;

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth radial cutoff: `1` on `[0, R/2]`, `0` beyond `R`, monotone in
/// between. Its slope never exceeds `4/R`.
pub fn cutoff(s: f64, r: f64) -> f64 {
    let tau = (s - 0.5 * r) / (0.5 * r);
    if tau <= 0.0 {
        1.0
    } else if tau >= 1.0 {
        0.0
    } else {
        let a = bump(1.0 - tau);
        a / (a + bump(tau))
    }
}

/// Grid nodes in `[0, 3 eps]` along the coarsest axis, with `eps` measured
/// in coordinate units at the center.
pub fn core_nodes(metric: &ConformalMetric, center: &[f64], eps: f64) -> usize {
    let coord_eps = eps * (-metric.psi_at(center)).exp();
    (3.0 * coord_eps / metric.grid().max_spacing()).floor() as usize + 1
}

/// `(phi_R(d) U(d / eps), phi_R(d) V(d / eps))` with `d = e^{psi(c)} |x - c|`,
/// the metric distance to first order at the center `c`.
pub fn transplant(
    gs: &RadialGroundState,
    metric: &ConformalMetric,
    center: &[f64],
    eps: f64,
    r: f64,
) -> Result<(GridField, GridField)> {
    let grid = metric.grid();
    if center.len() != grid.dim() || gs.exponents.dim != grid.dim() {
        return Err(Error::InvalidInput("center and ground state must match the grid dimension".into()));
    }
    if !(r > 0.0 && r < 0.5 * grid.period()) {
        return Err(Error::InvalidInput(format!("cutoff radius must lie in (0, L/2) (got {r})")));
    }
    let nodes = core_nodes(metric, center, eps);
    if nodes < 8 {
        return Err(Error::SpikeUnresolved { nodes });
    }
    let scale = metric.psi_at(center).exp();
    let dist = grid.sample(|x| scale * grid.flat_distance(center, x));
    let phi: Vec<f64> = dist.values().iter().map(|&d| cutoff(d, r)).collect();
    let u = dist
        .values()
        .iter()
        .zip(&phi)
        .map(|(&d, &c)| if c > 0.0 { c * gs.u_at(d / eps) } else { 0.0 })
        .collect();
    let v = dist
        .values()
        .iter()
        .zip(&phi)
        .map(|(&d, &c)| if c > 0.0 { c * gs.v_at(d / eps) } else { 0.0 })
        .collect();
    Ok((GridField::from_values(grid.clone(), u), GridField::from_values(grid.clone(), v)))
}
