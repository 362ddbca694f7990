use serde::{Deserialize, Serialize};

use super::banded::BandMatrix;
use super::decay::{fit_decay, DecayFit, DecayModel};
use super::exponents::ExponentPair;
use super::moments::{radial_integral, tail_integral, Moments};
use super::radial::{RadialOperator, HALF_WIDTH};
use crate::dual::ray::RayCoefficients;
use crate::error::{Error, Result};
use crate::grid::signed_pow;

pub const STATE_VERSION: u32 = 1;
const DAMPING_FLOOR: f64 = 1.0 / (1u64 << 20) as f64;
const MAX_NEWTON: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntireParams {
    pub r_max: f64,
    pub m: usize,
    pub tol: f64,
}

impl Default for EntireParams {
    fn default() -> Self {
        Self { r_max: 20.0, m: 2000, tol: 1e-10 }
    }
}

impl EntireParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_max >= 15.0) {
            return Err(Error::InvalidInput(format!("R_max must be at least 15 (got {})", self.r_max)));
        }
        if self.m < 400 {
            return Err(Error::InvalidInput(format!("M must be at least 400 (got {})", self.m)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// How the first coupled Newton iterate is produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Seed {
    /// Scalar ground state at `(r, r)`, `r = min(p, q)`, grown from a
    /// Gaussian of the given width, then continued in the larger exponent.
    Continuation { width: f64 },
    /// Coupled Newton straight from a ray-normalized Gaussian.
    Gaussian { width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGroundState {
    pub version: u32,
    pub exponents: ExponentPair,
    pub params: EntireParams,
    /// Nodes `r_i = i R / M`, `i = 0..=M`.
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub residual_norm: f64,
    pub newton_iterations: usize,
    /// Ray maximizer of the returned pair, `1` at an exact solution.
    pub ray_t_star: f64,
    pub decay_u: DecayFit,
    pub decay_v: DecayFit,
    pub moments: Moments,
    pub c_inf: f64,
}

struct System<'a> {
    e: &'a ExponentPair,
    op: RadialOperator,
}

impl<'a> System<'a> {
    fn residual(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (lu, lv) = (self.op.apply(u), self.op.apply(v));
        let ru = (0..self.op.m).map(|i| -lu[i] + u[i] - signed_pow(v[i], self.e.q)).collect();
        let rv = (0..self.op.m).map(|i| -lv[i] + v[i] - signed_pow(u[i], self.e.p)).collect();
        (ru, rv)
    }

    fn jacobian(&self, u: &[f64], v: &[f64]) -> BandMatrix {
        let m = self.op.m;
        let band = 2 * HALF_WIDTH + 1;
        let mut a = BandMatrix::zeros(2 * m, band, band);
        self.op.assemble_into(&mut a, 2, 0, -1.0);
        self.op.assemble_into(&mut a, 2, 1, -1.0);
        for i in 0..m {
            a.add(2 * i, 2 * i, 1.0);
            a.add(2 * i + 1, 2 * i + 1, 1.0);
            a.add(2 * i, 2 * i + 1, -self.e.q * v[i].abs().powf(self.e.q - 1.0));
            a.add(2 * i + 1, 2 * i, -self.e.p * u[i].abs().powf(self.e.p - 1.0));
        }
        a
    }

    fn helmholtz(&self) -> super::banded::BandLu {
        let mut a = BandMatrix::zeros(self.op.m, HALF_WIDTH, HALF_WIDTH);
        self.op.assemble_into(&mut a, 1, 0, -1.0);
        for i in 0..self.op.m {
            a.add(i, i, 1.0);
        }
        a.factor().expect("radial Helmholtz operator is nonsingular")
    }

    fn integral(&self, f: &[f64]) -> f64 {
        let mut g = f.to_vec();
        g.push(0.0);
        radial_integral(self.op.h, &g, self.op.dim, 0)
    }

    /// Ray coefficients of the dual pair `(u^p, v^q)` with the radial
    /// Helmholtz inverse.
    fn ray(&self, u: &[f64], v: &[f64]) -> RayCoefficients {
        let (p, q) = (self.e.p, self.e.q);
        let w1: Vec<f64> = u.iter().map(|&x| signed_pow(x, p)).collect();
        let w2: Vec<f64> = v.iter().map(|&x| signed_pow(x, q)).collect();
        let lu = self.helmholtz();
        let tw2 = lu.solve(&w2);
        let tw1 = lu.solve(&w1);
        let a = self.integral(&u.iter().map(|x| x.abs().powf(p + 1.0)).collect::<Vec<_>>());
        let b = self.integral(&v.iter().map(|x| x.abs().powf(q + 1.0)).collect::<Vec<_>>());
        let c1: Vec<f64> = w1.iter().zip(&tw2).map(|(x, y)| x * y).collect();
        let c2: Vec<f64> = w2.iter().zip(&tw1).map(|(x, y)| x * y).collect();
        RayCoefficients { p, q, a, b, c: self.integral(&c1) + self.integral(&c2) }
    }

    /// Rescales `(u, v)` to the ray maximizer `(t^{1/p} u, t^{1/q} v)`.
    fn normalize(&self, u: &mut [f64], v: &mut [f64]) -> Result<f64> {
        let t = self.ray(u, v).maximizer()?;
        let (su, sv) = (t.powf(1.0 / self.e.p), t.powf(1.0 / self.e.q));
        u.iter_mut().for_each(|x| *x *= su);
        v.iter_mut().for_each(|x| *x *= sv);
        Ok(t)
    }

    fn newton(&self, u: &mut Vec<f64>, v: &mut Vec<f64>, tol: f64) -> Result<(f64, usize)> {
        let norm = |a: &[f64], b: &[f64]| a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
        let (ru, rv) = self.residual(u, v);
        let mut res = norm(&ru, &rv);
        let mut rhs: Vec<f64> = ru.iter().zip(&rv).flat_map(|(a, b)| [*a, *b]).collect();
        for it in 0..MAX_NEWTON {
            if res < tol {
                return Ok((res, it));
            }
            let lu = self
                .jacobian(u, v)
                .factor()
                .ok_or(Error::NonConvergence { context: "entire Newton", iterations: it, residual: res })?;
            let step = lu.solve(&rhs);
            let mut lambda = 1.0;
            let mut positivity_hit = false;
            loop {
                let tu: Vec<f64> = (0..u.len()).map(|i| u[i] - lambda * step[2 * i]).collect();
                let tv: Vec<f64> = (0..v.len()).map(|i| v[i] - lambda * step[2 * i + 1]).collect();
                if tu.iter().chain(&tv).all(|&x| x > 0.0) {
                    let (nu, nv) = self.residual(&tu, &tv);
                    let nres = norm(&nu, &nv);
                    if nres < res || nres < tol {
                        *u = tu;
                        *v = tv;
                        res = nres;
                        rhs = nu.iter().zip(&nv).flat_map(|(a, b)| [*a, *b]).collect();
                        break;
                    }
                } else {
                    positivity_hit = true;
                }
                lambda *= 0.5;
                if lambda < DAMPING_FLOOR {
                    return Err(if positivity_hit {
                        Error::PositivityLost { context: "entire Newton" }
                    } else {
                        Error::NonConvergence { context: "entire Newton", iterations: it, residual: res }
                    });
                }
            }
        }
        if res < tol {
            Ok((res, MAX_NEWTON))
        } else {
            Err(Error::NonConvergence { context: "entire Newton", iterations: MAX_NEWTON, residual: res })
        }
    }
}

fn gaussian(op: &RadialOperator, width: f64) -> Vec<f64> {
    (0..op.m).map(|i| (-(i as f64 * op.h / width).powi(2)).exp()).collect()
}

/// Scalar ground state of `-Lap w + w = w^r` by Petviashvili iteration.
fn petviashvili(op: &RadialOperator, r: f64, width: f64) -> Result<Vec<f64>> {
    let e = ExponentPair::new(r, r, op.dim)?;
    let sys = System { e: &e, op: op.clone() };
    let lu = sys.helmholtz();
    let mut w = gaussian(op, width);
    let gamma = r / (r - 1.0);
    for _ in 0..500 {
        let nl: Vec<f64> = w.iter().map(|&x| signed_pow(x, r)).collect();
        let tw = lu.solve(&nl);
        let lw: Vec<f64> = op.apply(&w).iter().zip(&w).map(|(l, x)| x - l).collect();
        let num = sys.integral(&w.iter().zip(&lw).map(|(a, b)| a * b).collect::<Vec<_>>());
        let den = sys.integral(&w.iter().zip(&nl).map(|(a, b)| a * b).collect::<Vec<_>>());
        let factor = (num / den).powf(gamma);
        let next: Vec<f64> = tw.iter().map(|x| x * factor).collect();
        let change = next.iter().zip(&w).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        w = next;
        if change < 1e-9 {
            break;
        }
    }
    Ok(w)
}

fn continue_exponents(
    op: &RadialOperator,
    target: &ExponentPair,
    u: &mut Vec<f64>,
    v: &mut Vec<f64>,
    tol: f64,
) -> Result<usize> {
    let start = target.p.min(target.q);
    let (mut cur, mut step) = (start, (target.p.max(target.q) - start) / 8.0);
    let exps = |x: f64| {
        if target.p <= target.q {
            ExponentPair::new(target.p, x, op.dim)
        } else {
            ExponentPair::new(x, target.q, op.dim)
        }
    };
    let mut total = 0;
    let loose = (tol * 100.0).max(1e-8);
    while cur < target.p.max(target.q) {
        let next = (cur + step).min(target.p.max(target.q));
        let e = exps(next)?;
        let sys = System { e: &e, op: op.clone() };
        let (mut tu, mut tv) = (u.clone(), v.clone());
        match sys.newton(&mut tu, &mut tv, loose) {
            Ok((_, it)) => {
                total += it;
                *u = tu;
                *v = tv;
                cur = next;
            }
            Err(err) => {
                step *= 0.5;
                if step < 1e-4 {
                    return Err(err);
                }
            }
        }
    }
    Ok(total)
}

/// Ground state of `-Lap U + U = V^q`, `-Lap V + V = U^p` in `R^N`.
pub fn solve_entire_ground_state(e: &ExponentPair, params: EntireParams) -> Result<RadialGroundState> {
    solve_entire_seeded(e, params, Seed::Continuation { width: 1.0 })
}

pub fn solve_entire_seeded(e: &ExponentPair, params: EntireParams, seed: Seed) -> Result<RadialGroundState> {
    e.require_hc()?;
    params.validate()?;
    let op = RadialOperator::new(e.dim, params.r_max, params.m);
    let sys = System { e, op: op.clone() };
    let (mut u, mut v, mut iterations) = match seed {
        Seed::Continuation { width } => {
            let r = e.p.min(e.q);
            let w = petviashvili(&op, r, width)?;
            let (mut u, mut v) = (w.clone(), w);
            let scalar = ExponentPair::new(r, r, e.dim)?;
            let polish = System { e: &scalar, op: op.clone() };
            let (_, it) = polish.newton(&mut u, &mut v, (params.tol * 100.0).max(1e-8))?;
            let more = continue_exponents(&op, e, &mut u, &mut v, params.tol)?;
            (u, v, it + more)
        }
        Seed::Gaussian { width } => {
            let g = gaussian(&op, width);
            (g.clone(), g, 0)
        }
    };
    sys.normalize(&mut u, &mut v)?;
    let (res, it) = sys.newton(&mut u, &mut v, params.tol)?;
    iterations += it;
    let t_star = sys.ray(&u, &v).maximizer()?;
    finish(e, params, op, u, v, res, iterations, t_star)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    e: &ExponentPair,
    params: EntireParams,
    op: RadialOperator,
    mut u: Vec<f64>,
    mut v: Vec<f64>,
    residual_norm: f64,
    newton_iterations: usize,
    ray_t_star: f64,
) -> Result<RadialGroundState> {
    u.push(0.0);
    v.push(0.0);
    let r: Vec<f64> = (0..=op.m).map(|i| i as f64 * op.h).collect();
    let (decay_u, decay_v) = fit_window(&r, &u, &v, e.dim, params.r_max, 0.5, 0.9)?;
    let moments = compute_moments(e, op.h, &u, &v, &decay_u, &decay_v, params.r_max)?;
    let c_inf = entire_energy_from(e, &moments);
    Ok(RadialGroundState {
        version: STATE_VERSION,
        exponents: *e,
        params,
        r,
        u,
        v,
        residual_norm,
        newton_iterations,
        ray_t_star,
        decay_u,
        decay_v,
        moments,
        c_inf,
    })
}

fn fit_window(
    r: &[f64],
    u: &[f64],
    v: &[f64],
    dim: usize,
    r_max: f64,
    lo: f64,
    hi: f64,
) -> Result<(DecayFit, DecayFit)> {
    let idx: Vec<usize> = (0..r.len()).filter(|&i| r[i] >= lo * r_max && r[i] <= hi * r_max).collect();
    let rs: Vec<f64> = idx.iter().map(|&i| r[i]).collect();
    let model = DecayModel::far_field(dim, r_max);
    let fu = fit_decay(&rs, &idx.iter().map(|&i| u[i]).collect::<Vec<_>>(), model)?;
    let fv = fit_decay(&rs, &idx.iter().map(|&i| v[i]).collect::<Vec<_>>(), model)?;
    Ok((fu, fv))
}

fn compute_moments(
    e: &ExponentPair,
    h: f64,
    u: &[f64],
    v: &[f64],
    du: &DecayFit,
    dv: &DecayFit,
    r_max: f64,
) -> Result<Moments> {
    let (p, q, n) = (e.p, e.q, e.dim);
    let up: Vec<f64> = u.iter().map(|x| x.abs().powf(p + 1.0)).collect();
    let vq: Vec<f64> = v.iter().map(|x| x.abs().powf(q + 1.0)).collect();
    let mut tail_fraction: f64 = 0.0;
    let mut with_tail = |f: &[f64], fit: &DecayFit, power: f64, k: usize| {
        let body = radial_integral(h, f, n, k);
        let tail = tail_integral(r_max, |r| fit.tail(r).powf(power), fit.rate * power, n, k);
        tail_fraction = tail_fraction.max(tail.abs() / body.abs().max(f64::MIN_POSITIVE));
        body + tail
    };
    let m = Moments {
        a0: with_tail(&up, du, p + 1.0, 0),
        b0: with_tail(&vq, dv, q + 1.0, 0),
        m2u: with_tail(&up, du, p + 1.0, 2),
        m2v: with_tail(&vq, dv, q + 1.0, 2),
        tail_fraction: 0.0,
    };
    if tail_fraction > 1e-3 {
        return Err(Error::DecayNotResolved { tail_fraction });
    }
    Ok(Moments { tail_fraction, ..m })
}

fn entire_energy_from(e: &ExponentPair, m: &Moments) -> f64 {
    let (wu, wv) = e.energy_weights();
    wu * m.a0 + wv * m.b0
}

/// Which sign joins the two moment terms of `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaSign {
    Minus,
    Plus,
}

impl RadialGroundState {
    pub fn h(&self) -> f64 {
        self.params.r_max / self.params.m as f64
    }

    pub fn moments(&self) -> Moments {
        self.moments
    }

    /// `(1/2 - 1/(p+1)) A0 + (1/2 - 1/(q+1)) B0`.
    pub fn entire_energy(&self) -> f64 {
        entire_energy_from(&self.exponents, &self.moments)
    }

    /// `(p-1)/(2(p+1)) M2U +- (q-1)/(2(q+1)) M2V`.
    pub fn eta(&self, sign: EtaSign) -> f64 {
        let (p, q) = (self.exponents.p, self.exponents.q);
        let a = (p - 1.0) / (2.0 * (p + 1.0)) * self.moments.m2u;
        let b = (q - 1.0) / (2.0 * (q + 1.0)) * self.moments.m2v;
        match sign {
            EtaSign::Minus => a - b,
            EtaSign::Plus => a + b,
        }
    }

    /// `int U V` over `R^N`.
    pub fn cross_mass(&self) -> f64 {
        let uv: Vec<f64> = self.u.iter().zip(&self.v).map(|(a, b)| a * b).collect();
        radial_integral(self.h(), &uv, self.exponents.dim, 0)
    }

    /// Decay fits `(u, v)` on the window `[lo R, hi R]`.
    pub fn decay_rate_fit_window(&self, lo: f64, hi: f64) -> Result<(DecayFit, DecayFit)> {
        fit_window(&self.r, &self.u, &self.v, self.exponents.dim, self.params.r_max, lo, hi)
    }

    pub fn decay_rate_fit(&self) -> Result<(DecayFit, DecayFit)> {
        self.decay_rate_fit_window(0.5, 0.9)
    }

    fn sample(&self, values: &[f64], fit: &DecayFit, r: f64) -> f64 {
        let r = r.abs();
        let h = self.h();
        if r >= 0.75 * self.params.r_max {
            return fit.tail(r);
        }
        // eight-point Lagrange stencil, reflected through the origin
        let i = (r / h).floor() as i64;
        let start = i - 3;
        let at = |j: i64| values[j.unsigned_abs() as usize];
        let x = r / h - start as f64;
        let mut acc = 0.0;
        for a in 0..8i64 {
            let mut w = 1.0;
            for b in 0..8i64 {
                if a != b {
                    w *= (x - b as f64) / (a - b) as f64;
                }
            }
            acc += w * at(start + a);
        }
        acc
    }

    /// `U(r)`; beyond `0.75 R_max` the fitted far field is used.
    pub fn u_at(&self, r: f64) -> f64 {
        self.sample(&self.u, &self.decay_u, r)
    }

    pub fn v_at(&self, r: f64) -> f64 {
        self.sample(&self.v, &self.decay_v, r)
    }

    /// Max-norm of the discrete residual, recomputed from the samples.
    pub fn recompute_residual(&self) -> f64 {
        let op = RadialOperator::new(self.exponents.dim, self.params.r_max, self.params.m);
        let sys = System { e: &self.exponents, op };
        let m = self.params.m;
        let (ru, rv) = sys.residual(&self.u[..m], &self.v[..m]);
        ru.iter().chain(&rv).fold(0.0, |a, b| a.max(b.abs()))
    }

    /// Radial derivatives `(U', V')` at the nodes `0..M`.
    pub fn gradients(&self) -> (Vec<f64>, Vec<f64>) {
        let op = RadialOperator::new(self.exponents.dim, self.params.r_max, self.params.m);
        let m = self.params.m;
        (op.gradient(&self.u[..m]), op.gradient(&self.v[..m]))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let state: Self = serde_json::from_str(s)?;
        if state.version != STATE_VERSION {
            return Err(Error::InvalidInput(format!("unsupported ground state version {}", state.version)));
        }
        Ok(state)
    }
}

/// Outcome of one seeded solve for the least-energy comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: Seed,
    pub c_inf: Option<f64>,
    pub u0: Option<f64>,
    pub error: Option<String>,
}

/// Solves from Gaussian widths 0.5, 1 and 2 with both seeding strategies.
pub fn compare_initializations(e: &ExponentPair, params: EntireParams) -> Vec<SeedOutcome> {
    let mut out = Vec::new();
    for width in [0.5, 1.0, 2.0] {
        for seed in [Seed::Continuation { width }, Seed::Gaussian { width }] {
            let o = match solve_entire_seeded(e, params, seed) {
                Ok(s) => SeedOutcome { seed, c_inf: Some(s.c_inf), u0: Some(s.u[0]), error: None },
                Err(err) => SeedOutcome { seed, c_inf: None, u0: None, error: Some(err.to_string()) },
            };
            out.push(o);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_cubic_is_sech() {
        let e = ExponentPair::new(3.0, 3.0, 1).unwrap();
        let s = solve_entire_ground_state(&e, EntireParams { m: 4000, ..Default::default() }).unwrap();
        let h = s.h();
        let err = (0..=2000)
            .map(|i| (s.u[i] - 2f64.sqrt() / (i as f64 * h).cosh()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!(s.residual_norm < 1e-10);
    }

    #[test]
    fn symmetric_pair_has_equal_components() {
        let e = ExponentPair::new(3.0, 3.0, 3).unwrap();
        let s = solve_entire_ground_state(&e, EntireParams::default()).unwrap();
        let d = s.u.iter().zip(&s.v).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d < 1e-10);
        assert!((s.moments.a0 - s.moments.b0).abs() < 1e-10 * s.moments.a0);
        assert!(s.eta(EtaSign::Minus).abs() < 1e-10 * s.moments.m2u);
        assert!((s.c_inf - s.moments.a0 / 2.0).abs() < 1e-12 * s.c_inf);
        assert!((s.ray_t_star - 1.0).abs() < 1e-8);
    }
}
