//! One Newton-Krylov solve of the perturbed system followed by the duality
//! and profile diagnostics.

use spikelab::dual::{duality_check, seed_transplant, solve_perturbed, NewtonOptions};
use spikelab::entire::{solve_entire_ground_state, EntireParams, ExponentPair};
use spikelab::geometry::{ConformalMetric, MetricKind};
use spikelab::grid::Grid;
use spikelab::spike::rescaled_profile;

fn main() -> spikelab::error::Result<()> {
    let e = ExponentPair::new(2.0, 3.0, 3)?;
    let gs = solve_entire_ground_state(&e, EntireParams::default())?;
    let grid = Grid::cube(3, 48, 1.0)?;
    let metric = ConformalMetric::new(grid, MetricKind::Bump { amplitude: 0.1, center: vec![0.5; 3], sharpness: 12.0 })?;
    let eps = 0.07;
    let (u0, v0, t) = seed_transplant(&gs, &metric, &[0.5; 3], eps, 0.45)?;
    println!("seed ray maximizer t* = {t:.10}");
    let s = solve_perturbed(&metric, eps, &e, &u0, &v0, &NewtonOptions::default())?;
    println!(
        "converged in {} Newton / {} Krylov iterations, residual {:.2e}",
        s.newton_iterations,
        s.krylov_iterations,
        s.residual()
    );
    println!("history {:?}", s.residual_history.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>());
    println!("J/eps^3 = {:.8}  (C_inf = {:.8})", s.energy_j / eps.powi(3), gs.c_inf);
    println!("sup u = {:.6}  sup v = {:.6}", s.sup_u(), s.sup_v());
    println!("p_eps = {:?}  q_eps = {:?}", s.p_eps, s.q_eps);
    let d = duality_check(&metric, &s.u, &s.v, eps, &e)?;
    println!(
        "duality: |I-J|/|J| = {:.2e}, inverse residuals {:.2e} {:.2e}, gradient {:.2e}",
        d.relative_gap(),
        d.inverse_residual_u,
        d.inverse_residual_v,
        d.gradient_norm
    );
    let prof = rescaled_profile(&metric, &s.u, &s.v, &s.p_eps, eps, &gs)?;
    println!("rescaled profile deviation {:.3} (u), {:.3} (v)", prof.deviation_u, prof.deviation_v);
    Ok(())
}
