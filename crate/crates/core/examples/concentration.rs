//! Seeds spikes at the curvature maximum and at the opposite point and
//! compares where they settle and what they cost.

use spikelab::entire::{solve_entire_ground_state, EntireParams, ExponentPair};
use spikelab::geometry::{ConformalMetric, MetricKind};
use spikelab::grid::Grid;
use spikelab::spike::{concentration_check, default_eps_schedule, run_continuation, ContinuationOptions};

fn main() -> spikelab::error::Result<()> {
    let e = ExponentPair::new(2.0, 3.0, 3)?;
    let gs = solve_entire_ground_state(&e, EntireParams::default())?;
    let metric = ConformalMetric::new(
        Grid::cube(3, 48, 1.0)?,
        MetricKind::Bump { amplitude: 0.1, center: vec![0.5; 3], sharpness: 12.0 },
    )?;
    let eps = default_eps_schedule(1.0, 3);
    let opts = ContinuationOptions::default();
    let near = run_continuation(&metric, &gs, &eps, None, &opts)?;
    let far = run_continuation(&metric, &gs, &eps, Some(&[0.0, 0.0, 0.0]), &opts)?;
    for s in [&near, &far] {
        if let Some(f) = &s.failure {
            eprintln!("series seeded at {:?} stopped at eps = {}: {}", s.seed_center, f.eps, f.message);
        }
    }
    let report = concentration_check(&near, &[&far], &metric);
    println!("max S = {:.4} at {:?}", report.max_s, report.argmax);
    for (k, eps) in report.eps.iter().enumerate() {
        println!(
            "eps = {eps:.5}  d(p_eps, argmax S) = {:.4e}  S(p_eps) = {:.4}  J near {:.6e}  J far {:.6e}",
            report.primary.distance_to_max[k],
            report.primary.s_at_p_eps[k],
            report.primary.energies[k],
            report.controls[0].energies.get(k).copied().unwrap_or(f64::NAN)
        );
    }
    println!(
        "distance nonincreasing {}, energy ordering {}, S near max {}",
        report.distance_nonincreasing, report.energy_ordering, report.curvature_ok
    );
    Ok(())
}
