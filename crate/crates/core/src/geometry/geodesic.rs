//! Riemannian distances on conformally flat tori.
//!
//! Flat and uniformly scaled metrics are handled exactly. Otherwise a
//! shortest path on the periodic lattice graph (long primitive stencils to
//! cut grid anisotropy) seeds a polyline that is relaxed toward a geodesic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{ConformalMetric, MetricKind};

const SMOOTH_POINTS: usize = 33;
const SMOOTH_SWEEPS: usize = 4000;

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Primitive lattice offsets with components in `[-r, r]`.
fn stencil(dim: usize) -> Vec<Vec<i64>> {
    let r: i64 = if dim >= 3 { 2 } else { 3 };
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-r..=r).map(move |s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().fold(0, |g, &c| gcd(g, c)) == 1);
    out
}

struct Graph<'a> {
    metric: &'a ConformalMetric,
    offsets: Vec<Vec<i64>>,
    lengths: Vec<f64>,
    scale: Vec<f64>,
}

impl<'a> Graph<'a> {
    fn new(metric: &'a ConformalMetric) -> Self {
        let grid = metric.grid();
        let offsets = stencil(grid.dim());
        let lengths = offsets
            .iter()
            .map(|o| {
                o.iter()
                    .enumerate()
                    .map(|(k, &c)| (c as f64 * grid.spacing(k)).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let scale = metric.psi_values().iter().map(|p| p.exp()).collect();
        Self { metric, offsets, lengths, scale }
    }

    /// Dijkstra from weighted seeds; stops when `target` is settled or the
    /// frontier passes `radius`.
    fn run(&self, seeds: &[(usize, f64)], target: Option<usize>, radius: f64) -> (Vec<f64>, Vec<usize>) {
        let grid = self.metric.grid();
        let n = grid.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        for &(node, d) in seeds {
            if d < dist[node] {
                dist[node] = d;
                parent[node] = node;
                heap.push(Entry { dist: d, node });
            }
        }
        let mut multi = vec![0usize; grid.dim()];
        let mut shifted = vec![0i64; grid.dim()];
        while let Some(Entry { dist: d, node }) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            if Some(node) == target || d > radius {
                break;
            }
            grid.unravel(node, &mut multi);
            for (o, len) in self.offsets.iter().zip(&self.lengths) {
                for k in 0..multi.len() {
                    shifted[k] = multi[k] as i64 + o[k];
                }
                let next = grid.ravel_wrapped(&shifted);
                let nd = d + 0.5 * (self.scale[node] + self.scale[next]) * len;
                if nd < dist[next] {
                    dist[next] = nd;
                    parent[next] = node;
                    heap.push(Entry { dist: nd, node: next });
                }
            }
        }
        (dist, parent)
    }

    /// Corner nodes of the cell holding `x`, weighted by straight-line
    /// distance from `x`.
    fn seeds(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let grid = self.metric.grid();
        let dim = grid.dim();
        let x = grid.reduce(x);
        let base: Vec<i64> = (0..dim).map(|k| (x[k] / grid.spacing(k)).floor() as i64).collect();
        (0..1usize << dim)
            .map(|mask| {
                let idx: Vec<i64> = (0..dim).map(|k| base[k] + ((mask >> k) & 1) as i64).collect();
                let node = grid.ravel_wrapped(&idx);
                let d = grid.flat_distance(&x, &grid.node(node));
                let w = 0.5 * (self.metric.psi_at(&x).exp() + self.scale[node]);
                (node, w * d)
            })
            .collect()
    }
}

/// Length of the polyline under `e^psi`, Simpson on every segment.
fn polyline_length(metric: &ConformalMetric, pts: &[Vec<f64>]) -> f64 {
    pts.windows(2)
        .map(|w| {
            let mid: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect();
            let len = w[0].iter().zip(&w[1]).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
            len / 6.0 * (metric.psi_at(&w[0]).exp() + 4.0 * metric.psi_at(&mid).exp() + metric.psi_at(&w[1]).exp())
        })
        .sum()
}

fn resample(pts: &[Vec<f64>], count: usize) -> Vec<Vec<f64>> {
    let mut cum = vec![0.0];
    for w in pts.windows(2) {
        let len = w[0].iter().zip(&w[1]).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
        cum.push(cum.last().unwrap() + len);
    }
    let total = *cum.last().unwrap();
    let mut seg = 0;
    (0..count)
        .map(|i| {
            let s = total * i as f64 / (count - 1) as f64;
            while seg + 2 < cum.len() && cum[seg + 1] < s {
                seg += 1;
            }
            let span = cum[seg + 1] - cum[seg];
            let t = if span > 0.0 { ((s - cum[seg]) / span).clamp(0.0, 1.0) } else { 0.0 };
            pts[seg].iter().zip(&pts[seg + 1]).map(|(a, b)| a + t * (b - a)).collect()
        })
        .collect()
}

/// Gradient descent on the discrete energy `sum |dx|^2 e^{2 psi(mid)}`,
/// whose minimizers are constant-speed geodesic polygons.
fn relax(metric: &ConformalMetric, pts: &mut [Vec<f64>]) {
    let m = pts.len();
    let dim = pts[0].len();
    for _ in 0..SMOOTH_SWEEPS {
        let mut grads = vec![vec![0.0; dim]; m];
        let mut max_scale: f64 = 0.0;
        for i in 0..m - 1 {
            let mid: Vec<f64> = pts[i].iter().zip(&pts[i + 1]).map(|(a, b)| 0.5 * (a + b)).collect();
            let jet = metric.jet(&mid);
            let w = (2.0 * jet.psi).exp();
            max_scale = max_scale.max(w);
            let d: Vec<f64> = pts[i].iter().zip(&pts[i + 1]).map(|(a, b)| b - a).collect();
            let d2: f64 = d.iter().map(|v| v * v).sum();
            for k in 0..dim {
                let shared = d2 * w * jet.grad[k];
                grads[i + 1][k] += 2.0 * d[k] * w + shared;
                grads[i][k] += -2.0 * d[k] * w + shared;
            }
        }
        let step = 0.2 / max_scale;
        let mut moved: f64 = 0.0;
        for i in 1..m - 1 {
            for k in 0..dim {
                let dx = step * grads[i][k];
                pts[i][k] -= dx;
                moved = moved.max(dx.abs());
            }
        }
        if moved < 1e-13 {
            break;
        }
    }
}

/// Riemannian distance between two points of the torus.
pub fn geodesic_distance(metric: &ConformalMetric, a: &[f64], b: &[f64]) -> f64 {
    let grid = metric.grid();
    match metric.kind() {
        MetricKind::Flat => return grid.flat_distance(a, b),
        MetricKind::Constant { value } => return value.exp() * grid.flat_distance(a, b),
        _ => {}
    }
    if grid.flat_distance(a, b) == 0.0 {
        return 0.0;
    }
    let graph = Graph::new(metric);
    let src = graph.seeds(a);
    let dst = graph.seeds(b);
    let bound = graph.scale.iter().copied().fold(0.0, f64::max)
        * (grid.flat_distance(a, b) + 4.0 * grid.dim() as f64 * grid.max_spacing());
    let (dist, parent) = graph.run(&src, None, bound);
    let (end, _) = dst
        .iter()
        .map(|&(node, d)| (node, dist[node] + d))
        .fold((usize::MAX, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });

    let mut chain = vec![end];
    while parent[*chain.last().unwrap()] != *chain.last().unwrap() {
        chain.push(parent[*chain.last().unwrap()]);
    }
    chain.reverse();

    let a = grid.reduce(a);
    let mut pts = vec![a.clone()];
    let mut last = a.clone();
    for node in chain.iter().map(|&i| grid.node(i)).chain(std::iter::once(grid.reduce(b))) {
        let step = grid.min_image(&grid.reduce(&last), &node);
        let next: Vec<f64> = last.iter().zip(&step).map(|(x, d)| x + d).collect();
        pts.push(next.clone());
        last = next;
    }
    if matches!(metric.kind(), MetricKind::Samples { .. }) {
        return polyline_length(metric, &pts);
    }
    let mut pts = resample(&pts, SMOOTH_POINTS);
    relax(metric, &mut pts);
    polyline_length(metric, &pts)
}

/// Distances from `center` to every node, `INFINITY` beyond `radius`.
/// Exact for uniform metrics, lattice-graph distances otherwise.
pub fn distance_field(metric: &ConformalMetric, center: &[f64], radius: f64) -> Vec<f64> {
    let grid = metric.grid();
    let scale = match metric.kind() {
        MetricKind::Flat => Some(1.0),
        MetricKind::Constant { value } => Some(value.exp()),
        _ => None,
    };
    if let Some(s) = scale {
        return (0..grid.len())
            .map(|i| {
                let d = s * grid.flat_distance(center, &grid.node(i));
                if d <= radius {
                    d
                } else {
                    f64::INFINITY
                }
            })
            .collect();
    }
    let graph = Graph::new(metric);
    let seeds = graph.seeds(center);
    let (mut dist, _) = graph.run(&seeds, None, radius);
    dist.iter_mut().filter(|d| **d > radius).for_each(|d| *d = f64::INFINITY);
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn stencil_is_primitive() {
        let s = stencil(3);
        assert_eq!(s.len(), 98);
        assert!(!s.contains(&vec![2, 0, 0]));
        assert!(s.contains(&vec![2, 1, 0]));
    }

    #[test]
    fn flat_and_scaled_are_exact() {
        let g = Grid::cube(2, 16, 4.0).unwrap();
        let flat = ConformalMetric::flat(g.clone());
        assert_eq!(geodesic_distance(&flat, &[0.0, 0.0], &[2.0, 0.0]), 2.0);
        let c = ConformalMetric::new(g, MetricKind::Constant { value: 0.5 }).unwrap();
        let d = geodesic_distance(&c, &[0.0, 0.0], &[1.0, 0.0]);
        assert!((d - 0.5f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn cosine_metric_straight_line_along_symmetry_axis() {
        // psi depends on x_1 only; the x_1 axis is a geodesic
        let l = 2.0;
        let g = Grid::cube(2, 32, l).unwrap();
        let m = ConformalMetric::new(g, MetricKind::Cosine { amplitude: 0.2, mode: vec![1, 0] }).unwrap();
        let d = geodesic_distance(&m, &[0.0, 0.5], &[0.6, 0.5]);
        let n = 20000;
        let h = 0.6 / n as f64;
        let exact: f64 = (0..n)
            .map(|i| (0.2 * (std::f64::consts::PI * (i as f64 + 0.5) * h).cos()).exp() * h)
            .sum();
        assert!((d - exact).abs() / exact < 1e-4, "{d} vs {exact}");
    }
}
