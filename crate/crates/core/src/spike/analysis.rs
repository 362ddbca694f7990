//! Diagnostics of converged spikes: profiles, decay, expansion fits and
//! concentration.

use serde::{Deserialize, Serialize};

use crate::entire::{fit_decay, DecayFit, DecayModel, EtaSign, RadialGroundState};
use crate::error::{Error, Result};
use crate::geometry::{distance_field, geodesic_distance, ConformalMetric};
use crate::grid::GridField;
use crate::spectral::line_samples;

use super::series::ContinuationSeries;

/// `d_g(p, q) / eps`.
pub fn distance_ratio(metric: &ConformalMetric, eps: f64, p: &[f64], q: &[f64]) -> f64 {
    geodesic_distance(metric, p, q) / eps
}

/// `(eps, d_g(p_eps, q_eps) / eps)` per entry.
pub fn track_maxima(series: &ContinuationSeries, metric: &ConformalMetric) -> Vec<(f64, f64)> {
    series.entries.iter().map(|e| (e.eps, distance_ratio(metric, e.eps, &e.p_eps, &e.q_eps))).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileReport {
    /// Largest `|u(p + eps z) - U(|z|)|` over `|z| <= 8`, relative to `U(0)`.
    pub deviation_u: f64,
    pub deviation_v: f64,
    pub u_center: f64,
    pub v_center: f64,
    pub samples_per_axis: usize,
}

pub const PROFILE_RADIUS: f64 = 8.0;

/// Compares the solution along coordinate rays through `center` with the
/// radial ground state in the rescaled variable `z`.
pub fn rescaled_profile(
    metric: &ConformalMetric,
    u: &GridField,
    v: &GridField,
    center: &[f64],
    eps: f64,
    gs: &RadialGroundState,
) -> Result<ProfileReport> {
    let grid = metric.grid();
    let coord_eps = eps * (-metric.psi_at(center)).exp();
    let nodes = 2 * (3.0 * coord_eps / grid.max_spacing()).floor() as usize + 1;
    if nodes < 8 {
        return Err(Error::SpikeUnresolved { nodes });
    }
    let count = 161;
    let z: Vec<f64> = (0..count).map(|i| -PROFILE_RADIUS + 2.0 * PROFILE_RADIUS * i as f64 / (count - 1) as f64).collect();
    let offsets: Vec<f64> = z.iter().map(|t| t * coord_eps).collect();
    let (u0, v0) = (gs.u[0], gs.v[0]);
    let (mut du, mut dv) = (0.0f64, 0.0f64);
    for axis in 0..grid.dim() {
        let lu = line_samples(grid, u.values(), center, axis, &offsets);
        let lv = line_samples(grid, v.values(), center, axis, &offsets);
        for ((t, a), b) in z.iter().zip(&lu).zip(&lv) {
            du = du.max((a - gs.u_at(t.abs())).abs() / u0);
            dv = dv.max((b - gs.v_at(t.abs())).abs() / v0);
        }
    }
    let at = |f: &GridField| line_samples(grid, f.values(), center, 0, &[0.0])[0];
    Ok(ProfileReport { deviation_u: du, deviation_v: dv, u_center: at(u), v_center: at(v), samples_per_axis: count })
}

/// Fits `f ~ C exp(-theta d / eps)` (times the model's algebraic factor)
/// on the annulus `3 eps <= d <= outer`, `d` the distance to `center`.
pub fn decay_check(
    metric: &ConformalMetric,
    field: &GridField,
    center: &[f64],
    eps: f64,
    outer: f64,
    model: DecayModel,
) -> Result<DecayFit> {
    let inner = 3.0 * eps;
    if !(outer > inner) {
        return Err(Error::AnnulusEmpty);
    }
    let d = distance_field(metric, center, outer);
    let (mut r, mut f) = (Vec::new(), Vec::new());
    for (di, fi) in d.iter().zip(field.values()) {
        if *di >= inner && *di <= outer {
            r.push(di / eps);
            f.push(*fi);
        }
    }
    if r.len() < 3 {
        return Err(Error::AnnulusEmpty);
    }
    fit_decay(&r, &f, model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    Minus,
    Plus,
    Unmatched,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub c0: f64,
    pub c2: f64,
    pub c0_std: f64,
    pub c2_std: f64,
    /// Largest deviation of the data from the fitted quadratic.
    pub residual: f64,
    pub eps_max: f64,
    pub entries: usize,
    pub scalar_curvature: f64,
    pub predicted_c0: f64,
    pub predicted_c2_minus: f64,
    pub predicted_c2_plus: f64,
    /// `-S (eta_plus + N int U V) / (6N)`.
    pub predicted_c2_cross: f64,
    pub matched_convention: Convention,
}

pub const C2_TOLERANCE: f64 = 0.15;
pub const C0_TOLERANCE: f64 = 0.01;

impl ExpansionFit {
    pub fn c0_matches(&self) -> bool {
        ((self.c0 - self.predicted_c0) / self.predicted_c0).abs() < C0_TOLERANCE
    }

    /// Model residual below 5% of `|C2| eps_max^2`.
    pub fn residual_ok(&self) -> bool {
        self.residual < 0.05 * self.c2.abs() * self.eps_max * self.eps_max
    }

    pub fn relative_c2_error(&self, convention: Convention) -> f64 {
        let target = match convention {
            Convention::Minus => self.predicted_c2_minus,
            Convention::Plus => self.predicted_c2_plus,
            Convention::Unmatched => return f64::NAN,
        };
        ((self.c2 - target) / target).abs()
    }

    /// `|C2| <= 0.05 C_inf eps_max^2`.
    pub fn c2_vanishes(&self) -> bool {
        self.c2.abs() <= 0.05 * self.predicted_c0 * self.eps_max * self.eps_max
    }
}

/// Least-squares line `y = c0 + c2 x` with standard errors and max residual.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let c2 = sxy / sxx;
    let c0 = my - c2 * mx;
    let res: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - c0 - c2 * a).collect();
    let ssr: f64 = res.iter().map(|r| r * r).sum();
    let s2 = if x.len() > 2 { ssr / (n - 2.0) } else { 0.0 };
    let c2_std = (s2 / sxx).sqrt();
    let c0_std = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    (c0, c2, c0_std, c2_std, res.iter().fold(0.0, |m, r| m.max(r.abs())))
}

/// Fits `J / eps^N = C0 + C2 eps^2` over `(eps, J)` samples and compares
/// with the ground-state predictions at curvature `s_p0`.
pub fn expansion_fit_points(points: &[(f64, f64)], gs: &RadialGroundState, s_p0: f64) -> Result<ExpansionFit> {
    let n = gs.exponents.dim;
    let eps_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let eps_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let span = eps_max / eps_min;
    if points.len() < 4 || span < 4.0 * (1.0 - 1e-9) {
        return Err(Error::InsufficientSpan { entries: points.len(), span });
    }
    let x: Vec<f64> = points.iter().map(|p| p.0 * p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1 / p.0.powi(n as i32)).collect();
    let (c0, c2, c0_std, c2_std, residual) = fit_line(&x, &y);
    let six_n = 6.0 * n as f64;
    let minus = -s_p0 * gs.eta(EtaSign::Minus) / six_n;
    let plus = -s_p0 * gs.eta(EtaSign::Plus) / six_n;
    let cross = -s_p0 * (gs.eta(EtaSign::Plus) + n as f64 * gs.cross_mass()) / six_n;
    let ok = |t: f64| t != 0.0 && ((c2 - t) / t).abs() < C2_TOLERANCE;
    let matched_convention = match (ok(minus), ok(plus)) {
        (true, false) => Convention::Minus,
        (false, true) => Convention::Plus,
        _ => Convention::Unmatched,
    };
    Ok(ExpansionFit {
        c0,
        c2,
        c0_std,
        c2_std,
        residual,
        eps_max,
        entries: points.len(),
        scalar_curvature: s_p0,
        predicted_c0: gs.c_inf,
        predicted_c2_minus: minus,
        predicted_c2_plus: plus,
        predicted_c2_cross: cross,
        matched_convention,
    })
}

/// [`expansion_fit_points`] on a series, with `S` taken at the seed center.
pub fn expansion_fit(series: &ContinuationSeries, metric: &ConformalMetric, gs: &RadialGroundState) -> Result<ExpansionFit> {
    let points: Vec<(f64, f64)> = series.entries.iter().map(|e| (e.eps, e.energy_j)).collect();
    let s = crate::geometry::scalar_curvature(metric, &series.seed_center);
    expansion_fit_points(&points, gs, s)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesConcentration {
    pub seed_center: Vec<f64>,
    /// `d_g(p_eps, argmax S)` per entry.
    pub distance_to_max: Vec<f64>,
    pub s_at_p_eps: Vec<f64>,
    pub energies: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub argmax: Vec<f64>,
    pub max_s: f64,
    pub eps: Vec<f64>,
    pub primary: SeriesConcentration,
    pub controls: Vec<SeriesConcentration>,
    /// Distance to the maximum of `S` never grows as `eps` decreases.
    pub distance_nonincreasing: bool,
    /// Final distance below two grid spacings.
    pub distance_final_ok: bool,
    /// The primary series has strictly lower energy than every control at
    /// every common `eps`.
    pub energy_ordering: bool,
    /// Largest relative energy spread between the primary and the controls.
    pub max_relative_energy_gap: f64,
    /// `S(p_eps)` at the smallest `eps` within 2% of `max S`.
    pub curvature_ok: bool,
}

impl ConcentrationReport {
    pub fn passes(&self) -> bool {
        self.distance_nonincreasing && self.distance_final_ok && self.energy_ordering && self.curvature_ok
    }
}

fn summarize(series: &ContinuationSeries, metric: &ConformalMetric, argmax: &[f64]) -> SeriesConcentration {
    SeriesConcentration {
        seed_center: series.seed_center.clone(),
        distance_to_max: series.entries.iter().map(|e| geodesic_distance(metric, &e.p_eps, argmax)).collect(),
        s_at_p_eps: series.entries.iter().map(|e| e.s_at_p_eps).collect(),
        energies: series.entries.iter().map(|e| e.energy_j).collect(),
    }
}

/// Compares a series seeded at the maximum of `S` with control series on
/// the same `eps` grid.
pub fn concentration_check(
    primary: &ContinuationSeries,
    controls: &[&ContinuationSeries],
    metric: &ConformalMetric,
) -> ConcentrationReport {
    let grid = metric.grid();
    let s_field = metric.scalar_curvature_field();
    let k = s_field.argmax();
    let argmax = grid.node(k);
    let max_s = s_field.values()[k];
    let p = summarize(primary, metric, &argmax);
    let c: Vec<SeriesConcentration> = controls.iter().map(|s| summarize(s, metric, &argmax)).collect();
    let distance_nonincreasing = p.distance_to_max.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let distance_final_ok = p.distance_to_max.last().is_some_and(|d| *d < 2.0 * grid.max_spacing());
    let mut energy_ordering = !controls.is_empty();
    let mut gap = 0.0f64;
    for (ctrl, series) in c.iter().zip(controls) {
        for (i, e) in primary.entries.iter().enumerate() {
            match series.entries.iter().position(|x| x.eps == e.eps) {
                Some(j) => {
                    let other = ctrl.energies[j];
                    energy_ordering &= p.energies[i] < other;
                    gap = gap.max(((p.energies[i] - other) / other).abs());
                }
                None => energy_ordering = false,
            }
        }
    }
    let curvature_ok = p.s_at_p_eps.last().is_some_and(|s| {
        if max_s == 0.0 {
            s.abs() < 1e-12
        } else {
            ((s - max_s) / max_s).abs() < 0.02
        }
    });
    ConcentrationReport {
        argmax,
        max_s,
        eps: primary.entries.iter().map(|e| e.eps).collect(),
        primary: p,
        controls: c,
        distance_nonincreasing,
        distance_final_ok,
        energy_ordering,
        max_relative_energy_gap: gap,
        curvature_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn exact_quadratic_fit() {
        let x = [0.01, 0.02, 0.04, 0.08];
        let y: Vec<f64> = x.iter().map(|e| 2.0 + 5.0 * e).collect();
        let (c0, c2, _, _, r) = fit_line(&x, &y);
        assert!((c0 - 2.0).abs() < 1e-12 && (c2 - 5.0).abs() < 1e-10 && r < 1e-12);
    }

    #[test]
    fn planted_exponential_decay() {
        let grid = Grid::cube(3, 32, 1.0).unwrap();
        let m = ConformalMetric::flat(grid.clone());
        let c = [0.5, 0.5, 0.5];
        let eps = 0.03;
        let f = grid.sample(|x| (-grid.flat_distance(&c, x) / eps).exp());
        let fit = decay_check(&m, &f, &c, eps, 0.25, DecayModel::pure()).unwrap();
        assert!((fit.rate - 1.0).abs() < 1e-10 && fit.residual < 1e-8);
    }

    #[test]
    fn empty_annulus() {
        let grid = Grid::cube(2, 16, 1.0).unwrap();
        let m = ConformalMetric::flat(grid.clone());
        let f = GridField::constant(&grid, 1.0);
        assert!(matches!(decay_check(&m, &f, &[0.5, 0.5], 0.1, 0.25, DecayModel::pure()), Err(Error::AnnulusEmpty)));
    }

    #[test]
    fn planted_offset_ratio() {
        let grid = Grid::cube(3, 16, 1.0).unwrap();
        let m = ConformalMetric::flat(grid);
        let eps = 0.05;
        let r = distance_ratio(&m, eps, &[0.3, 0.4, 0.5], &[0.3 + 2.0 * eps, 0.4, 0.5]);
        assert!((r - 2.0).abs() < 1e-12);
    }
}
