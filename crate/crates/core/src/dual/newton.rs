//! Damped Newton–Krylov solver for the perturbed system on the torus.
//!
//! In weighted form the equations read `A u = b v^q`, `A v = b u^p` with
//! `A` the symmetric Helmholtz operator and `b = sqrt(g)`. Ordering the
//! rows as `(v-equation, u-equation)` makes the Jacobian symmetric,
//! `[[-b P, A], [A, -b Q]]`, which is solved by preconditioned MINRES.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entire::{ExponentPair, RadialGroundState};
use crate::error::{Error, Result};
use crate::geometry::ConformalMetric;
use crate::grid::{signed_pow, GridField};
use crate::spectral::{apply_along_axis, interpolation_weights, Spectral};

use super::energy::{dual_energy, primal_energy, DualPair};
use super::helmholtz::{dot_real, Helmholtz};
use super::ray::ray_coefficients;
use super::transplant::transplant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Max-norm of the unweighted residual at convergence.
    pub tol: f64,
    pub max_iterations: usize,
    /// Iterates with `min < -positivity_tol * max` are rejected.
    pub positivity_tol: f64,
    pub max_krylov: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iterations: 40, positivity_tol: 1e-2, max_krylov: 3000 }
    }
}

#[derive(Debug, Clone)]
pub struct PerturbedSolution {
    pub u: GridField,
    pub v: GridField,
    pub eps: f64,
    pub exponents: ExponentPair,
    pub energy_j: f64,
    pub energy_i: f64,
    pub residual_u: f64,
    pub residual_v: f64,
    pub p_eps: Vec<f64>,
    pub q_eps: Vec<f64>,
    pub newton_iterations: usize,
    pub krylov_iterations: usize,
    pub residual_history: Vec<f64>,
}

impl PerturbedSolution {
    pub fn residual(&self) -> f64 {
        self.residual_u.max(self.residual_v)
    }

    pub fn sup_u(&self) -> f64 {
        self.u.max()
    }

    pub fn sup_v(&self) -> f64 {
        self.v.max()
    }
}

struct Residual {
    /// Packed `F2 + i F1`, weighted.
    packed: Vec<Complex64>,
    norm_u: f64,
    norm_v: f64,
}

impl Residual {
    fn norm(&self) -> f64 {
        self.norm_u.max(self.norm_v)
    }
}

struct System<'a> {
    helmholtz: Helmholtz<'a>,
    p: f64,
    q: f64,
}

impl System<'_> {
    fn residual(&self, z: &[Complex64]) -> Residual {
        let az = self.helmholtz.apply_packed(z);
        let b = self.helmholtz.metric().sqrt_g_values();
        let (mut nu, mut nv) = (0.0f64, 0.0f64);
        let packed = az
            .iter()
            .zip(z)
            .zip(b)
            .map(|((a, x), w)| {
                let f1 = a.re - w * signed_pow(x.im, self.q);
                let f2 = a.im - w * signed_pow(x.re, self.p);
                nu = nu.max((f1 / w).abs());
                nv = nv.max((f2 / w).abs());
                Complex64::new(f2, f1)
            })
            .collect();
        Residual { packed, norm_u: nu, norm_v: nv }
    }

    /// Jacobian diagonals `b p |u|^{p-1}` and `b q |v|^{q-1}`.
    fn diagonals(&self, z: &[Complex64]) -> Vec<Complex64> {
        let b = self.helmholtz.metric().sqrt_g_values();
        z.iter()
            .zip(b)
            .map(|(x, w)| {
                Complex64::new(w * self.p * x.re.abs().powf(self.p - 1.0), w * self.q * x.im.abs().powf(self.q - 1.0))
            })
            .collect()
    }

    fn jacobian(&self, diag: &[Complex64], d: &[Complex64]) -> Vec<Complex64> {
        let ad = self.helmholtz.apply_packed(d);
        ad.iter()
            .zip(d)
            .zip(diag)
            .map(|((a, x), g)| Complex64::new(a.im - g.re * x.re, a.re - g.im * x.im))
            .collect()
    }
}

/// Preconditioned MINRES for a symmetric operator with an SPD
/// preconditioner. Returns the solution and the iteration count.
pub fn minres(
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    precondition: impl Fn(&[Complex64]) -> Vec<Complex64>,
    rhs: &[Complex64],
    rtol: f64,
    max_iterations: usize,
) -> Result<(Vec<Complex64>, usize)> {
    let n = rhs.len();
    let zero = Complex64::default();
    let mut x = vec![zero; n];
    let mut r1 = rhs.to_vec();
    let mut y = precondition(&r1);
    let beta1 = dot_real(&r1, &y);
    if beta1 < 0.0 {
        return Err(Error::InvalidInput("preconditioner is not positive definite".into()));
    }
    if beta1 == 0.0 {
        return Ok((x, 0));
    }
    let beta1 = beta1.sqrt();
    let mut r2 = r1.clone();
    let (mut oldb, mut beta, mut dbar, mut epsln) = (0.0, beta1, 0.0, 0.0);
    let (mut phibar, mut cs, mut sn) = (beta1, -1.0, 0.0);
    let mut w = vec![zero; n];
    let mut w2 = vec![zero; n];
    for it in 1..=max_iterations {
        let s = 1.0 / beta;
        let v: Vec<Complex64> = y.iter().map(|c| c * s).collect();
        y = apply(&v);
        if it >= 2 {
            let f = beta / oldb;
            y.iter_mut().zip(&r1).for_each(|(a, b)| *a -= b * f);
        }
        let alfa = dot_real(&v, &y);
        let f = alfa / beta;
        y.iter_mut().zip(&r2).for_each(|(a, b)| *a -= b * f);
        r1 = std::mem::replace(&mut r2, y);
        y = precondition(&r2);
        oldb = beta;
        beta = dot_real(&r2, &y);
        if beta < 0.0 {
            return Err(Error::InvalidInput("preconditioner is not positive definite".into()));
        }
        beta = beta.sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let denom = 1.0 / gamma;
        let w1 = std::mem::replace(&mut w2, std::mem::take(&mut w));
        w = v
            .iter()
            .zip(&w1)
            .zip(&w2)
            .map(|((a, b), c)| (a - b * oldeps - c * delta) * denom)
            .collect();
        x.iter_mut().zip(&w).for_each(|(a, b)| *a += b * phi);
        if phibar <= rtol * beta1 || beta == 0.0 {
            return Ok((x, it));
        }
    }
    Err(Error::KrylovStall { iterations: max_iterations, residual: phibar / beta1 })
}

/// Solves the perturbed system from the initial pair `(u0, v0)`.
pub fn solve_perturbed(
    metric: &ConformalMetric,
    eps: f64,
    exponents: &ExponentPair,
    u0: &GridField,
    v0: &GridField,
    options: &NewtonOptions,
) -> Result<PerturbedSolution> {
    if u0.grid() != metric.grid() || v0.grid() != metric.grid() {
        return Err(Error::InvalidInput("initial fields must live on the metric grid".into()));
    }
    let sys = System { helmholtz: Helmholtz::new(metric, eps)?, p: exponents.p, q: exponents.q };
    let mut z = Spectral::pack(u0.values(), v0.values());
    let mut res = sys.residual(&z);
    let mut history = vec![res.norm()];
    let mut krylov = 0;
    let mut iterations = 0;
    while res.norm() >= options.tol {
        if iterations == options.max_iterations {
            return Err(Error::NonConvergence { context: "perturbed system", iterations, residual: res.norm() });
        }
        iterations += 1;
        let diag = sys.diagonals(&z);
        let rhs: Vec<Complex64> = res.packed.iter().map(|c| -c).collect();
        let rtol = (1e-2 * res.norm()).clamp(1e-13, 1e-4);
        let (d, its) = minres(
            |x| sys.jacobian(&diag, x),
            |r| sys.helmholtz.precondition_packed(r),
            &rhs,
            rtol,
            options.max_krylov,
        )?;
        krylov += its;
        let mut lambda = 1.0;
        let mut lost_positivity;
        loop {
            let trial: Vec<Complex64> = z.iter().zip(&d).map(|(a, b)| a + b * lambda).collect();
            lost_positivity = !positive(&trial, options.positivity_tol);
            if !lost_positivity {
                let r = sys.residual(&trial);
                if r.norm() < res.norm() {
                    z = trial;
                    res = r;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 2f64.powi(-20) {
                return Err(if lost_positivity {
                    Error::PositivityLost { context: "perturbed system" }
                } else {
                    Error::NonConvergence { context: "perturbed system", iterations, residual: res.norm() }
                });
            }
        }
        history.push(res.norm());

    }
    let (u, v) = Spectral::unpack(&z);
    let grid = metric.grid().clone();
    let u = GridField::from_values(grid.clone(), u);
    let v = GridField::from_values(grid, v);
    let energy_j = primal_energy(&u, &v, metric, eps, exponents);
    let energy_i = dual_energy(&DualPair::from_primal(metric, &u, &v, exponents.clone(), eps)?)?;
    Ok(PerturbedSolution {
        p_eps: locate_maximum(&u),
        q_eps: locate_maximum(&v),
        u,
        v,
        eps,
        exponents: exponents.clone(),
        energy_j,
        energy_i,
        residual_u: res.norm_u,
        residual_v: res.norm_v,
        newton_iterations: iterations,
        krylov_iterations: krylov,
        residual_history: history,
    })
}

fn positive(z: &[Complex64], tol: f64) -> bool {
    let (mut lo_u, mut lo_v, mut hi_u, mut hi_v) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in z {
        lo_u = lo_u.min(c.re);
        hi_u = hi_u.max(c.re);
        lo_v = lo_v.min(c.im);
        hi_v = hi_v.max(c.im);
    }
    hi_u > 0.0 && hi_v > 0.0 && lo_u >= -tol * hi_u && lo_v >= -tol * hi_v
}

/// Transplanted ground state at `center`, scaled onto the maximum of its
/// dual ray. Returns the fields and the ray maximizer.
pub fn seed_transplant(
    gs: &RadialGroundState,
    metric: &ConformalMetric,
    center: &[f64],
    eps: f64,
    cutoff_radius: f64,
) -> Result<(GridField, GridField, f64)> {
    let (u, v) = transplant(gs, metric, center, eps, cutoff_radius)?;
    let e = &gs.exponents;
    let pair = DualPair::from_primal(metric, &u, &v, e.clone(), eps)?;
    let t = ray_coefficients(&pair)?.maximizer()?;
    let (su, sv) = (t.powf(1.0 / e.p), t.powf(1.0 / e.q));
    Ok((u.map(|x| su * x), v.map(|x| sv * x), t))
}

/// Grid argmax (lowest index on ties) refined per axis by a parabola
/// through the logarithms of the three neighbouring samples.
pub fn locate_maximum(field: &GridField) -> Vec<f64> {
    let grid = field.grid();
    let k = field.argmax();
    let mut idx = vec![0; grid.dim()];
    grid.unravel(k, &mut idx);
    let values = field.values();
    let l0 = values[k];
    let use_log = values.iter().all(|&x| x > 0.0);
    let f = |x: f64| if use_log { x.ln() } else { x };
    let mut x = grid.node(k);
    for axis in 0..grid.dim() {
        let mut m: Vec<i64> = idx.iter().map(|&i| i as i64).collect();
        m[axis] -= 1;
        let lm = values[grid.ravel_wrapped(&m)];
        m[axis] += 2;
        let lp = values[grid.ravel_wrapped(&m)];
        let (a, b, c) = (f(lm), f(l0), f(lp));
        let curv = a - 2.0 * b + c;
        if curv < 0.0 {
            let delta = (0.5 * (a - c) / curv).clamp(-0.5, 0.5);
            x[axis] += delta * grid.spacing(axis);
        }
    }
    grid.reduce(&x)
}

/// `x -> f(c + ratio (x - c))` by separable trigonometric interpolation,
/// with the displacement taken to the nearest image of `c`.
pub fn rescale_about(field: &GridField, center: &[f64], ratio: f64) -> GridField {
    let grid = field.grid();
    let mut values = field.values().to_vec();
    for axis in 0..grid.dim() {
        let n = grid.shape()[axis];
        let h = grid.spacing(axis);
        let m: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let d = grid.wrap_delta(grid.coordinate(axis, i) - center[axis]);
                interpolation_weights(n, h, center[axis] + ratio * d)
            })
            .collect();
        values = apply_along_axis(grid, &values, axis, &m);
    }
    GridField::from_values(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricKind;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn minres_solves_indefinite_diagonal() {
        let d: Vec<Complex64> = (0..50).map(|i| Complex64::new(i as f64 - 20.5, 3.0 + i as f64)).collect();
        let b: Vec<Complex64> = (0..50).map(|i| Complex64::new((i as f64).sin(), (i as f64).cos())).collect();
        let (x, _) = minres(
            |x| x.iter().zip(&d).map(|(a, c)| Complex64::new(a.re * c.re, a.im * c.im)).collect(),
            |r| r.to_vec(),
            &b,
            1e-13,
            500,
        )
        .unwrap();
        for ((xi, di), bi) in x.iter().zip(&d).zip(&b) {
            assert!((xi.re * di.re - bi.re).abs() < 1e-10);
            assert!((xi.im * di.im - bi.im).abs() < 1e-10);
        }
    }

    #[test]
    fn planted_gaussian_maximum() {
        let grid = Grid::cube(3, 32, 1.0).unwrap();
        let x0 = [0.413, 0.271, 0.655];
        let eps = 0.08;
        let f = grid.sample(|x| 2.0 * (-(grid.flat_distance(&x0, x) / eps).powi(2)).exp());
        let x = locate_maximum(&f);
        let d = grid.flat_distance(&x, &x0);
        assert!(d < 0.1 * grid.spacing(0), "{d}");
    }

    #[test]
    fn rescale_recovers_band_limited_field() {
        let grid = Grid::cube(2, 16, 1.0).unwrap();
        let f = grid.sample(|x| (2.0 * PI * x[0]).cos() + (2.0 * PI * 2.0 * x[1]).sin());
        let same = rescale_about(&f, &[0.3, 0.1], 1.0);
        assert!(same.max_abs_diff(&f) < 1e-12);
        let c = [0.25, 0.5];
        let g = rescale_about(&f, &c, 0.5);
        let expect = grid.sample(|x| {
            let y: Vec<f64> = (0..2).map(|a| c[a] + 0.5 * grid.wrap_delta(x[a] - c[a])).collect();
            (2.0 * PI * y[0]).cos() + (2.0 * PI * 2.0 * y[1]).sin()
        });
        assert!(g.max_abs_diff(&expect) < 1e-11);
    }

    #[test]
    fn symmetric_exponents_keep_u_equal_v() {
        let grid = Grid::cube(2, 32, 1.0).unwrap();
        let m = ConformalMetric::new(grid.clone(), MetricKind::Cosine { amplitude: 0.1, mode: vec![1, 0] }).unwrap();
        let e = ExponentPair::new(3.0, 3.0, 2).unwrap();
        let eps = 0.08;
        let u0 = grid.sample(|x| 1.5 * (-(grid.flat_distance(&[0.5, 0.5], x) / eps).powi(2)).exp() + 1e-3);
        let s = solve_perturbed(&m, eps, &e, &u0, &u0, &NewtonOptions::default()).unwrap();
        assert!(s.u.max_abs_diff(&s.v) < 1e-9);
        assert!(s.residual() < 1e-9);
        assert!(((s.energy_i - s.energy_j) / s.energy_j).abs() < 1e-8);
    }
}
