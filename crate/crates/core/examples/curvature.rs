//! Scalar curvature, Christoffel symbols and geodesic distance of a bump
//! metric on the unit 3-torus.

use spikelab::geometry::{christoffel, geodesic_distance, scalar_curvature, ConformalMetric, MetricKind};
use spikelab::grid::Grid;

fn main() -> spikelab::error::Result<()> {
    let grid = Grid::cube(3, 48, 1.0)?;
    let kind = MetricKind::Bump { amplitude: 0.1, center: vec![0.5; 3], sharpness: 12.0 };
    let metric = ConformalMetric::new(grid.clone(), kind)?;

    let s = metric.scalar_curvature_field();
    let k = s.argmax();
    println!("max S = {:.6} at {:?}", s.values()[k], grid.node(k));
    println!("min S = {:.6}", s.min());
    println!("volume = {:.8}", metric.volume());

    let x = [0.6, 0.45, 0.5];
    let g = christoffel(&metric, &x);
    println!("S({x:?}) = {:.6}", scalar_curvature(&metric, &x));
    for (i, gi) in g.iter().enumerate() {
        println!("Gamma^{i} = {:?}", gi.iter().map(|r| r.iter().map(|v| format!("{v:+.4}")).collect::<Vec<_>>()).collect::<Vec<_>>());
    }

    let a = [0.5, 0.5, 0.5];
    for b in [[0.6, 0.5, 0.5], [0.8, 0.5, 0.5], [0.9, 0.9, 0.5]] {
        println!(
            "d({a:?}, {b:?}) = {:.6}  (flat {:.6})",
            geodesic_distance(&metric, &a, &b),
            grid.flat_distance(&a, &b)
        );
    }
    Ok(())
}
