//! Continuation in `eps` with warm starts.

use serde::{Deserialize, Serialize};

use crate::dual::{duality_check, rescale_about, seed_transplant, solve_perturbed, DualityReport, NewtonOptions, PerturbedSolution};
use crate::entire::{DecayFit, DecayModel, ExponentPair, RadialGroundState};
use crate::error::{Error, Result};
use crate::geometry::{geodesic_distance, scalar_curvature, ConformalMetric};

use super::analysis::{decay_check, rescaled_profile, ProfileReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub newton: NewtonOptions,
    /// Cutoff radius of the first transplant, as a fraction of the period.
    pub cutoff_fraction: f64,
    /// Keep every converged field pair in memory.
    pub keep_fields: bool,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self { newton: NewtonOptions::default(), cutoff_fraction: 0.45, keep_fields: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub eps: f64,
    pub energy_j: f64,
    pub energy_i: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub min_u: f64,
    pub min_v: f64,
    pub p_eps: Vec<f64>,
    pub q_eps: Vec<f64>,
    pub dist_over_eps: f64,
    pub s_at_p_eps: f64,
    pub decay_u: Option<DecayFit>,
    pub decay_v: Option<DecayFit>,
    pub residual: f64,
    pub newton_iterations: usize,
    pub krylov_iterations: usize,
    pub residual_history: Vec<f64>,
    pub duality: DualityReport,
    pub profile: Option<ProfileReport>,
    /// Ray maximizer of the transplant, first entry only.
    pub t_star: Option<f64>,
}

impl SeriesEntry {
    /// `J / eps^N`.
    pub fn scaled_energy(&self) -> f64 {
        self.energy_j / self.eps.powi(self.p_eps.len() as i32)
    }

    pub fn theta_u(&self) -> Option<f64> {
        self.decay_u.map(|d| d.rate)
    }

    pub fn theta_v(&self) -> Option<f64> {
        self.decay_v.map(|d| d.rate)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesFailure {
    pub eps: f64,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationSeries {
    pub exponents: ExponentPair,
    pub seed_center: Vec<f64>,
    pub c_inf: f64,
    pub entries: Vec<SeriesEntry>,
    pub failure: Option<SeriesFailure>,
    #[serde(skip)]
    pub solutions: Vec<PerturbedSolution>,
}

impl ContinuationSeries {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    /// The recorded failure as an error.
    pub fn check(&self) -> Result<()> {
        match &self.failure {
            None => Ok(()),
            Some(f) => Err(Error::Continuation { eps: f.eps, source: Box::new(Error::InvalidInput(f.message.clone())) }),
        }
    }
}

fn summarize(
    metric: &ConformalMetric,
    gs: &RadialGroundState,
    s: &PerturbedSolution,
    cutoff: f64,
    t_star: Option<f64>,
) -> Result<SeriesEntry> {
    let l = metric.grid().period();
    let outer = (0.5 * cutoff).min(0.25 * l);
    let model = DecayModel { power: -0.5 * (metric.dim() as f64 - 1.0), wall: None };
    let decay_u = decay_check(metric, &s.u, &s.p_eps, s.eps, outer, model).ok();
    let decay_v = decay_check(metric, &s.v, &s.q_eps, s.eps, outer, model).ok();
    Ok(SeriesEntry {
        eps: s.eps,
        energy_j: s.energy_j,
        energy_i: s.energy_i,
        sup_u: s.sup_u(),
        sup_v: s.sup_v(),
        min_u: s.u.min(),
        min_v: s.v.min(),
        p_eps: s.p_eps.clone(),
        q_eps: s.q_eps.clone(),
        dist_over_eps: geodesic_distance(metric, &s.p_eps, &s.q_eps) / s.eps,
        s_at_p_eps: scalar_curvature(metric, &s.p_eps),
        decay_u,
        decay_v,
        residual: s.residual(),
        newton_iterations: s.newton_iterations,
        krylov_iterations: s.krylov_iterations,
        residual_history: s.residual_history.clone(),
        duality: duality_check(metric, &s.u, &s.v, s.eps, &s.exponents)?,
        profile: rescaled_profile(metric, &s.u, &s.v, &s.p_eps, s.eps, gs).ok(),
        t_star,
    })
}

/// Solves along a strictly decreasing `eps` list, seeding the first entry
/// with a ray-scaled transplant at `seed_center` (default: the node of
/// largest scalar curvature) and warm-starting every later entry from its
/// predecessor rescaled about the spike.
///
/// A solver failure ends the series; converged entries are kept and the
/// failure is recorded.
pub fn run_continuation(
    metric: &ConformalMetric,
    gs: &RadialGroundState,
    eps_list: &[f64],
    seed_center: Option<&[f64]>,
    options: &ContinuationOptions,
) -> Result<ContinuationSeries> {
    let e = &gs.exponents;
    if e.dim != metric.dim() {
        return Err(Error::InvalidInput("ground state and metric dimensions differ".into()));
    }
    if eps_list.is_empty() || eps_list.windows(2).any(|w| !(w[1] < w[0])) || eps_list.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidInput("eps list must be positive and strictly decreasing".into()));
    }
    let center = match seed_center {
        Some(c) => metric.grid().reduce(c),
        None => metric.grid().node(metric.argmax_curvature()),
    };
    let cutoff = options.cutoff_fraction * metric.grid().period();
    let mut series = ContinuationSeries {
        exponents: e.clone(),
        seed_center: center.clone(),
        c_inf: gs.c_inf,
        entries: Vec::new(),
        failure: None,
        solutions: Vec::new(),
    };
    let mut prev: Option<PerturbedSolution> = None;
    for &eps in eps_list {
        let step = || -> Result<(PerturbedSolution, Option<f64>)> {
            let (u0, v0, t) = match &prev {
                None => {
                    let (u, v, t) = seed_transplant(gs, metric, &center, eps, cutoff)?;
                    (u, v, Some(t))
                }
                Some(s) => {
                    let r = s.eps / eps;
                    (rescale_about(&s.u, &s.p_eps, r), rescale_about(&s.v, &s.q_eps, r), None)
                }
            };
            Ok((solve_perturbed(metric, eps, e, &u0, &v0, &options.newton)?, t))
        };
        match step().and_then(|(s, t)| summarize(metric, gs, &s, cutoff, t).map(|entry| (s, entry))) {
            Ok((s, entry)) => {
                series.entries.push(entry);
                if options.keep_fields {
                    series.solutions.push(s.clone());
                }
                prev = Some(s);
            }
            Err(err) => {
                series.failure = Some(SeriesFailure { eps, message: err.to_string() });
                break;
            }
        }
    }
    Ok(series)
}

/// `eps_k = L / (10 * 2^{k/2})`, `k = 0..count`.
pub fn default_eps_schedule(period: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| period / (10.0 * 2f64.powf(k as f64 / 2.0))).collect()
}
