//! Dual energy of a transplanted ground state and the fibering map along
//! its ray.

use spikelab::dual::{dual_energy, primal_energy, ray_profile, transplant, DualPair};
use spikelab::entire::{solve_entire_ground_state, EntireParams, ExponentPair};
use spikelab::geometry::{ConformalMetric, MetricKind};
use spikelab::grid::Grid;

fn main() -> spikelab::error::Result<()> {
    let e = ExponentPair::new(2.0, 3.0, 3)?;
    let gs = solve_entire_ground_state(&e, EntireParams::default())?;
    let grid = Grid::cube(3, 64, 1.0)?;
    let metric = ConformalMetric::new(grid, MetricKind::Bump { amplitude: 0.1, center: vec![0.5; 3], sharpness: 12.0 })?;
    let center = [0.5; 3];
    for eps in [0.1, 0.07, 0.05] {
        let (u, v) = transplant(&gs, &metric, &center, eps, 0.45)?;
        let pair = DualPair::from_primal(&metric, &u, &v, e, eps)?;
        let t: Vec<f64> = (1..=8).map(|k| 0.25 * k as f64).collect();
        let ray = ray_profile(&pair, &t)?;
        println!(
            "eps = {eps:<5} J/eps^3 = {:.6}  I/eps^3 = {:.6}  t* = {:.8}  |t*-1| = {:.3e}",
            primal_energy(&u, &v, &metric, eps, &e) / eps.powi(3),
            dual_energy(&pair)? / eps.powi(3),
            ray.t_star,
            (ray.t_star - 1.0).abs()
        );
        let h: Vec<String> = ray.h.iter().map(|h| format!("{:.2}", h / eps.powi(3))).collect();
        println!("    h(t)/eps^3 at t = 0.25..2: {}", h.join(" "));
    }
    println!("C_inf = {:.6}", gs.c_inf);
    Ok(())
}
