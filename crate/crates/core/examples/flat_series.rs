//! Continuation in eps on the flat torus; prints the series as CSV.

use spikelab::entire::{solve_entire_ground_state, EntireParams, ExponentPair};
use spikelab::geometry::ConformalMetric;
use spikelab::grid::Grid;
use spikelab::spike::{default_eps_schedule, run_continuation, series_csv, ArtifactMeta, ContinuationOptions};

fn main() -> spikelab::error::Result<()> {
    let e = ExponentPair::new(2.0, 3.0, 3)?;
    let gs = solve_entire_ground_state(&e, EntireParams::default())?;
    let metric = ConformalMetric::flat(Grid::cube(3, 48, 1.0)?);
    let eps = default_eps_schedule(1.0, 4);
    let series = run_continuation(&metric, &gs, &eps, None, &ContinuationOptions::default())?;
    for entry in &series.entries {
        eprintln!(
            "eps = {:.5}  J/eps^3 = {:.6}  deviation {:+.2e}",
            entry.eps,
            entry.scaled_energy(),
            entry.scaled_energy() / gs.c_inf - 1.0
        );
    }
    series.check()?;
    print!("{}", series_csv(&series, &ArtifactMeta::new("flat-series", "example"))?);
    Ok(())
}
