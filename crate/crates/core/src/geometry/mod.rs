//! Conformally flat periodic metrics `g = e^{2 psi} delta` and the operators
//! built from them.

mod geodesic;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{stable_sum, Grid, GridField};
use crate::spectral::{Interpolant, Spectral};

pub use geodesic::{distance_field, geodesic_distance};

/// Analytic conformal factors, or raw samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    Flat,
    Constant { value: f64 },
    /// `amplitude * cos(2 pi mode . x / L)`.
    Cosine { amplitude: f64, mode: Vec<i64> },
    /// `amplitude * exp(-sharpness |x - center|^2)`, summed over the nearest
    /// periodic images.
    Bump {
        amplitude: f64,
        center: Vec<f64>,
        sharpness: f64,
    },
    Samples { values: Vec<f64> },
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Flat => "flat",
            MetricKind::Constant { .. } => "constant",
            MetricKind::Cosine { .. } => "cosine",
            MetricKind::Bump { .. } => "bump",
            MetricKind::Samples { .. } => "samples",
        }
    }
}

/// `psi`, `grad psi` and `lap psi` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub psi: f64,
    pub grad: Vec<f64>,
    pub lap: f64,
}

struct SampledJet {
    psi: Interpolant,
    grad: Vec<Interpolant>,
    lap: Interpolant,
}

pub struct ConformalMetric {
    kind: MetricKind,
    grid: Grid,
    spectral: Arc<Spectral>,
    psi: Vec<f64>,
    grad_psi: Vec<Vec<f64>>,
    lap_psi: Vec<f64>,
    sqrt_g: Vec<f64>,
    sqrt_a: Vec<f64>,
    potential: Vec<f64>,
    psi_mean: f64,
    sampled: Option<SampledJet>,
}

impl std::fmt::Debug for ConformalMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConformalMetric")
            .field("kind", &self.kind.name())
            .field("grid", &self.grid)
            .finish()
    }
}

fn image_offsets(dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                [-1.0, 0.0, 1.0].into_iter().map(move |s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out
}

impl ConformalMetric {
    pub fn new(grid: Grid, kind: MetricKind) -> Result<Self> {
        let dim = grid.dim();
        match &kind {
            MetricKind::Cosine { mode, amplitude } => {
                if mode.len() != dim || !amplitude.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "cosine mode needs {dim} integer components"
                    )));
                }
            }
            MetricKind::Bump { center, sharpness, amplitude } => {
                if center.len() != dim || !(*sharpness > 0.0) || !amplitude.is_finite() {
                    return Err(Error::InvalidInput(
                        "bump needs a center of the grid dimension and positive sharpness".into(),
                    ));
                }
            }
            MetricKind::Samples { values } => {
                if values.len() != grid.len() || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput("psi samples must be finite and match the grid".into()));
                }
            }
            MetricKind::Constant { value } if !value.is_finite() => {
                return Err(Error::InvalidInput("constant psi must be finite".into()));
            }
            _ => {}
        }
        let spectral = Arc::new(Spectral::new(&grid));
        Ok(Self::assemble(grid, kind, spectral))
    }

    pub fn flat(grid: Grid) -> Self {
        let spectral = Arc::new(Spectral::new(&grid));
        Self::assemble(grid, MetricKind::Flat, spectral)
    }

    fn assemble(grid: Grid, kind: MetricKind, spectral: Arc<Spectral>) -> Self {
        let dim = grid.dim();
        let n = grid.len();
        let (psi, grad_psi, lap_psi, sampled) = if let MetricKind::Samples { values } = &kind {
            let grad = spectral.gradient(values);
            let lap = spectral.laplacian(values);
            let sampled = SampledJet {
                psi: spectral.interpolant(values),
                grad: grad.iter().map(|g| spectral.interpolant(g)).collect(),
                lap: spectral.interpolant(&lap),
            };
            (values.clone(), grad, lap, Some(sampled))
        } else {
            let mut psi = Vec::with_capacity(n);
            let mut grad = vec![Vec::with_capacity(n); dim];
            let mut lap = Vec::with_capacity(n);
            for idx in 0..n {
                let jet = analytic_jet(&kind, &grid, &grid.node(idx));
                psi.push(jet.psi);
                for (k, g) in jet.grad.iter().enumerate() {
                    grad[k].push(*g);
                }
                lap.push(jet.lap);
            }
            (psi, grad, lap, None)
        };
        let d = dim as f64;
        let sqrt_g: Vec<f64> = psi.iter().map(|p| (d * p).exp()).collect();
        let sqrt_a: Vec<f64> = psi.iter().map(|p| (0.5 * (d - 2.0) * p).exp()).collect();
        let lap_sqrt_a = spectral.laplacian(&sqrt_a);
        let potential = sqrt_a.iter().zip(&lap_sqrt_a).map(|(s, l)| s * l).collect();
        let psi_mean = stable_sum(psi.iter().copied()) / n as f64;
        Self {
            kind,
            grid,
            spectral,
            psi,
            grad_psi,
            lap_psi,
            sqrt_g,
            sqrt_a,
            potential,
            psi_mean,
            sampled,
        }
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, MetricKind::Flat)
    }

    /// `psi` is constant in space (flat or uniformly scaled).
    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, MetricKind::Flat | MetricKind::Constant { .. })
    }

    pub fn psi_field(&self) -> GridField {
        GridField::from_values(self.grid.clone(), self.psi.clone())
    }

    pub fn psi_values(&self) -> &[f64] {
        &self.psi
    }

    pub fn grad_psi_values(&self) -> &[Vec<f64>] {
        &self.grad_psi
    }

    pub fn lap_psi_values(&self) -> &[f64] {
        &self.lap_psi
    }

    /// Nodal volume density `e^{N psi}`.
    pub fn sqrt_g_values(&self) -> &[f64] {
        &self.sqrt_g
    }

    /// Nodal `e^{(N-2) psi / 2}`, the square root of the divergence-form coefficient.
    pub fn sqrt_a_values(&self) -> &[f64] {
        &self.sqrt_a
    }

    pub fn potential_values(&self) -> &[f64] {
        &self.potential
    }

    pub fn psi_mean(&self) -> f64 {
        self.psi_mean
    }

    /// `psi` and its first two derivatives at an arbitrary point.
    pub fn jet(&self, x: &[f64]) -> Jet {
        match &self.sampled {
            Some(s) => Jet {
                psi: s.psi.eval(x),
                grad: s.grad.iter().map(|g| g.eval(x)).collect(),
                lap: s.lap.eval(x),
            },
            None => analytic_jet(&self.kind, &self.grid, x),
        }
    }

    pub fn psi_at(&self, x: &[f64]) -> f64 {
        match &self.sampled {
            Some(s) => s.psi.eval(x),
            None => analytic_psi(&self.kind, &self.grid, x),
        }
    }

    /// Riemannian quadrature `sum f sqrt(g) dV` on the lattice.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.grid.cell_volume() * stable_sum(f.iter().zip(&self.sqrt_g).map(|(a, b)| a * b))
    }

    /// Weighted pairing `sum f h sqrt(g) dV`.
    pub fn inner(&self, f: &[f64], h: &[f64]) -> f64 {
        self.grid.cell_volume()
            * stable_sum(f.iter().zip(h).zip(&self.sqrt_g).map(|((a, b), w)| a * b * w))
    }

    pub fn volume(&self) -> f64 {
        self.integrate(&vec![1.0; self.grid.len()])
    }

    /// Nodal scalar curvature.
    pub fn scalar_curvature_field(&self) -> GridField {
        let n = self.dim() as f64;
        let values = (0..self.grid.len())
            .map(|i| {
                let g2: f64 = self.grad_psi.iter().map(|g| g[i] * g[i]).sum();
                curvature_from_jet(n, self.psi[i], g2, self.lap_psi[i])
            })
            .collect();
        GridField::from_values(self.grid.clone(), values)
    }

    /// Node index of the largest scalar curvature (lowest index on ties).
    pub fn argmax_curvature(&self) -> usize {
        self.scalar_curvature_field().argmax()
    }
}

fn curvature_from_jet(n: f64, psi: f64, grad2: f64, lap: f64) -> f64 {
    (-2.0 * psi).exp() * (-2.0 * (n - 1.0) * lap - (n - 1.0) * (n - 2.0) * grad2)
}

fn analytic_psi(kind: &MetricKind, grid: &Grid, x: &[f64]) -> f64 {
    match kind {
        MetricKind::Bump { .. } | MetricKind::Cosine { .. } => analytic_jet(kind, grid, x).psi,
        MetricKind::Flat => 0.0,
        MetricKind::Constant { value } => *value,
        MetricKind::Samples { .. } => unreachable!("sampled metrics use interpolants"),
    }
}

fn analytic_jet(kind: &MetricKind, grid: &Grid, x: &[f64]) -> Jet {
    let dim = grid.dim();
    match kind {
        MetricKind::Flat => Jet { psi: 0.0, grad: vec![0.0; dim], lap: 0.0 },
        MetricKind::Constant { value } => Jet { psi: *value, grad: vec![0.0; dim], lap: 0.0 },
        MetricKind::Cosine { amplitude, mode } => {
            let w = 2.0 * std::f64::consts::PI / grid.period();
            let phase: f64 = mode.iter().zip(x).map(|(&m, &xi)| w * m as f64 * xi).sum();
            let k2: f64 = mode.iter().map(|&m| (w * m as f64).powi(2)).sum();
            Jet {
                psi: amplitude * phase.cos(),
                grad: mode.iter().map(|&m| -amplitude * w * m as f64 * phase.sin()).collect(),
                lap: -amplitude * k2 * phase.cos(),
            }
        }
        MetricKind::Bump { amplitude, center, sharpness } => {
            let s = *sharpness;
            let base = grid.min_image(center, x);
            let mut jet = Jet { psi: 0.0, grad: vec![0.0; dim], lap: 0.0 };
            for shift in image_offsets(dim) {
                let d: Vec<f64> = base.iter().zip(&shift).map(|(b, k)| b + k * grid.period()).collect();
                let r2: f64 = d.iter().map(|v| v * v).sum();
                let e = amplitude * (-s * r2).exp();
                jet.psi += e;
                for (g, di) in jet.grad.iter_mut().zip(&d) {
                    *g -= 2.0 * s * di * e;
                }
                jet.lap += (4.0 * s * s * r2 - 2.0 * s * dim as f64) * e;
            }
            jet
        }
        MetricKind::Samples { .. } => unreachable!("sampled metrics use interpolants"),
    }
}

/// Volume density `e^{N psi(x)}`.
pub fn sqrt_g(metric: &ConformalMetric, x: &[f64]) -> f64 {
    (metric.dim() as f64 * metric.psi_at(x)).exp()
}

/// `Gamma[k][i][j] = delta_ik d_j psi + delta_jk d_i psi - delta_ij d_k psi`.
pub fn christoffel(metric: &ConformalMetric, x: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let grad = metric.jet(x).grad;
    let n = grad.len();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    (0..n)
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| delta(i, k) * grad[j] + delta(j, k) * grad[i] - delta(i, j) * grad[k])
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn scalar_curvature(metric: &ConformalMetric, x: &[f64]) -> f64 {
    let jet = metric.jet(x);
    let g2 = jet.grad.iter().map(|g| g * g).sum();
    curvature_from_jet(metric.dim() as f64, jet.psi, g2, jet.lap)
}

/// Applies `Delta_g` to two fields at once.
///
/// Uses the divergence form `e^{-N psi} div(a grad u)` with `a = e^{(N-2) psi}`,
/// discretized as `sqrt(a) Lap(sqrt(a) u) - u sqrt(a) Lap(sqrt(a))`.
pub fn laplace_beltrami_pair(metric: &ConformalMetric, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let sa = metric.sqrt_a_values();
    let su: Vec<f64> = u.iter().zip(sa).map(|(x, s)| x * s).collect();
    let sv: Vec<f64> = v.iter().zip(sa).map(|(x, s)| x * s).collect();
    let (lu, lv) = metric.spectral().laplacian_pair(&su, &sv);
    let finish = |l: Vec<f64>, f: &[f64]| -> Vec<f64> {
        l.iter()
            .zip(f)
            .zip(sa.iter().zip(metric.potential_values()))
            .zip(metric.sqrt_g_values())
            .map(|(((l, f), (s, c)), w)| (s * l - c * f) / w)
            .collect()
    };
    (finish(lu, u), finish(lv, v))
}

pub fn laplace_beltrami_apply(metric: &ConformalMetric, field: &GridField) -> GridField {
    let zeros = vec![0.0; field.values().len()];
    let (lu, _) = laplace_beltrami_pair(metric, field.values(), &zeros);
    GridField::from_values(metric.grid().clone(), lu)
}

/// Non-divergence form `e^{-2 psi}(Lap u + (N-2) grad psi . grad u)` with
/// spectral derivatives. Agrees with [`laplace_beltrami_apply`] up to
/// spectral accuracy.
pub fn laplace_beltrami_direct(metric: &ConformalMetric, field: &GridField) -> GridField {
    let sp = metric.spectral();
    let u = field.values();
    let lap = sp.laplacian(u);
    let grad = sp.gradient(u);
    let n = metric.dim() as f64;
    let values = (0..u.len())
        .map(|i| {
            let cross: f64 = grad.iter().zip(metric.grad_psi_values()).map(|(g, p)| g[i] * p[i]).sum();
            (-2.0 * metric.psi_values()[i]).exp() * (lap[i] + (n - 2.0) * cross)
        })
        .collect();
    GridField::from_values(metric.grid().clone(), values)
}
