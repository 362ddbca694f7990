//! Inverts `-eps^2 Lap_g + 1` on a curved torus and checks the residual.

use spikelab::dual::Helmholtz;
use spikelab::geometry::{ConformalMetric, MetricKind};
use spikelab::grid::Grid;

fn main() -> spikelab::error::Result<()> {
    let grid = Grid::cube(3, 32, 1.0)?;
    let metric = ConformalMetric::new(grid.clone(), MetricKind::Cosine { amplitude: 0.2, mode: vec![1, 0, 1] })?;
    let f = grid.sample(|x| (-40.0 * ((x[0] - 0.5).powi(2) + (x[1] - 0.3).powi(2) + (x[2] - 0.5).powi(2))).exp());
    let h = grid.sample(|x| 1.0 + 0.5 * (6.283185307179586 * x[1]).sin());
    for eps in [0.2, 0.1, 0.05] {
        let op = Helmholtz::new(&metric, eps)?;
        let (w1, w2) = op.inverse_pair(f.values(), h.values())?;
        let (r1, r2) = op.forward_pair(&w1, &w2);
        let err1 = r1.iter().zip(f.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let err2 = r2.iter().zip(h.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let min = w1.iter().chain(&w2).cloned().fold(f64::INFINITY, f64::min);
        println!("eps = {eps:<5} residuals {err1:.2e} {err2:.2e}  min of inverse {min:.3e}");
    }
    Ok(())
}
