//! Fits `J/eps^N = C0 + C2 eps^2` along a bump-metric series and compares
//! C2 with the curvature predictions.

use spikelab::entire::{solve_entire_ground_state, EntireParams, ExponentPair};
use spikelab::geometry::{ConformalMetric, MetricKind};
use spikelab::grid::Grid;
use spikelab::spike::{default_eps_schedule, expansion_fit, fit_summary_json, run_continuation, ArtifactMeta, ContinuationOptions};

fn main() -> spikelab::error::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(96);
    let e = ExponentPair::new(2.0, 3.0, 3)?;
    let gs = solve_entire_ground_state(&e, EntireParams::default())?;
    let metric = ConformalMetric::new(
        Grid::cube(3, n, 1.0)?,
        MetricKind::Bump { amplitude: 0.1, center: vec![0.5; 3], sharpness: 12.0 },
    )?;
    let eps = default_eps_schedule(1.0, 5);
    let series = run_continuation(&metric, &gs, &eps, None, &ContinuationOptions::default())?;
    series.check()?;
    for entry in &series.entries {
        eprintln!(
            "eps = {:.5}  (J/eps^3 - C_inf)/eps^2 = {:.2}",
            entry.eps,
            (entry.scaled_energy() - gs.c_inf) / entry.eps.powi(2)
        );
    }
    let fit = expansion_fit(&series, &metric, &gs)?;
    println!("{}", fit_summary_json("bump", &fit, &ArtifactMeta::new("expansion", "example"))?);
    Ok(())
}
