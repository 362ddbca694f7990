mod common;

use std::f64::consts::PI;

use spikelab::dual::{dual_energy, transplant, DualPair};
use spikelab::entire::moments::radial_integral;
use spikelab::entire::{
    bootstrap_exponents, compare_initializations, fit_decay, solve_entire_ground_state, BootstrapTag, DecayModel,
    EntireParams, EtaSign, ExponentPair,
};
use spikelab::geometry::ConformalMetric;
use spikelab::grid::Grid;

use common::{ground_state_233, shooting_oracle};

#[test]
fn cubic_line_soliton_is_sech() {
    let e = ExponentPair::new(3.0, 3.0, 1).unwrap();
    let gs = solve_entire_ground_state(&e, EntireParams { r_max: 20.0, m: 4000, tol: 1e-10 }).unwrap();
    let mut err: f64 = 0.0;
    for (r, u) in gs.r.iter().zip(&gs.u) {
        if *r <= 10.0 {
            err = err.max((u - 2f64.sqrt() / r.cosh()).abs());
        }
    }
    assert!(err < 1e-8, "sech deviation {err:.3e}");
    assert!(gs.residual_norm < 1e-10);
}

#[test]
fn equal_exponents_give_equal_components() {
    let e = ExponentPair::new(3.0, 3.0, 3).unwrap();
    let gs = solve_entire_ground_state(&e, EntireParams::default()).unwrap();
    let diff = common::max_abs_diff(&gs.u, &gs.v);
    assert!(diff < 1e-10, "|U - V| = {diff:.3e}");
    assert!(gs.residual_norm < 1e-10);
    let m = gs.moments();
    assert!(((m.a0 - m.b0) / m.a0).abs() < 1e-10);
    assert!(((m.m2u - m.m2v) / m.m2u).abs() < 1e-10);
    assert!(gs.eta(EtaSign::Minus).abs() < 1e-9 * m.m2u);
    assert!((gs.eta(EtaSign::Plus) - 0.5 * m.m2u).abs() < 1e-9 * m.m2u);
    assert!((gs.c_inf - 0.5 * m.a0).abs() < 1e-10 * m.a0);
}

#[test]
fn shooting_oracle_agrees() {
    let e = ExponentPair::new(2.0, 3.0, 3).unwrap();
    let gs = ground_state_233();
    let (u0, v0) = shooting_oracle(&e);
    assert!((u0 - gs.u[0]).abs() < 1e-6, "U(0): shooting {u0}, solver {}", gs.u[0]);
    assert!((v0 - gs.v[0]).abs() < 1e-6, "V(0): shooting {v0}, solver {}", gs.v[0]);
}

#[test]
fn ground_state_shape() {
    let gs = ground_state_233();
    assert!(gs.residual_norm < 1e-10);
    let m = gs.r.len();
    assert!(gs.u[..m - 1].iter().all(|x| *x > 0.0) && gs.v[..m - 1].iter().all(|x| *x > 0.0));
    assert!(gs.u.windows(2).all(|w| w[1] < w[0]) && gs.v.windows(2).all(|w| w[1] < w[0]));
    let h = gs.h();
    let du0 = (-3.0 * gs.u[0] + 4.0 * gs.u[1] - gs.u[2]) / (2.0 * h);
    assert!(du0.abs() < 1e-2 * h, "U'(0) = {du0}");
    assert!((gs.ray_t_star - 1.0).abs() < 1e-8);
}

#[test]
fn weak_form_identities() {
    let gs = ground_state_233();
    let (p, q, n) = (2.0, 3.0, 3);
    let (du, dv) = gs.gradients();
    let h = gs.h();
    let quad: Vec<f64> = (0..du.len()).map(|i| du[i] * dv[i] + gs.u[i] * gs.v[i]).collect();
    let lhs = radial_integral(h, &quad, n, 0);
    let a: Vec<f64> = gs.u.iter().map(|x| x.powf(p + 1.0)).collect();
    let b: Vec<f64> = gs.v.iter().map(|x| x.powf(q + 1.0)).collect();
    let (a, b) = (radial_integral(h, &a, n, 0), radial_integral(h, &b, n, 0));
    assert!(((lhs - a) / a).abs() < 1e-6, "{lhs} vs {a}");
    assert!(((lhs - b) / b).abs() < 1e-6, "{lhs} vs {b}");
}

#[test]
fn refinement_changes_energy_little() {
    let e = ExponentPair::new(2.0, 3.0, 3).unwrap();
    let coarse = ground_state_233();
    let fine = solve_entire_ground_state(&e, EntireParams { m: 4000, tol: 5e-9, ..EntireParams::default() }).unwrap();
    for (a, b) in [
        (coarse.moments().a0, fine.moments().a0),
        (coarse.moments().b0, fine.moments().b0),
        (coarse.c_inf, fine.c_inf),
    ] {
        assert!(((a - b) / b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn gaussian_moments() {
    let h = 0.005;
    let f: Vec<f64> = (0..=4000).map(|i| (-(i as f64 * h).powi(2)).exp()).collect();
    let a0 = radial_integral(h, &f, 3, 0);
    let m2 = radial_integral(h, &f, 3, 2);
    assert!((a0 / PI.powf(1.5) - 1.0).abs() < 1e-8);
    assert!((m2 / (1.5 * PI.powf(1.5)) - 1.0).abs() < 1e-8);
}

#[test]
fn decay_rates() {
    let r: Vec<f64> = (0..200).map(|i| 5.0 + 0.05 * i as f64).collect();
    let f: Vec<f64> = r.iter().map(|x| 3.0 * (-2.0 * x).exp()).collect();
    let fit = fit_decay(&r, &f, DecayModel::pure()).unwrap();
    assert!((fit.rate - 2.0).abs() < 1e-10 && (fit.prefactor - 3.0).abs() < 1e-9 && fit.residual < 1e-10);

    let gs = ground_state_233();
    for d in [gs.decay_u, gs.decay_v] {
        assert!(d.rate > 0.0 && d.rate <= 1.0 + 1e-6 && (d.rate - 1.0).abs() < 0.05);
    }

    let e = ExponentPair::new(3.0, 3.0, 1).unwrap();
    let sech = solve_entire_ground_state(&e, EntireParams { r_max: 30.0, m: 3000, tol: 1e-10 }).unwrap();
    let (near, _) = sech.decay_rate_fit_window(0.2, 0.4).unwrap();
    let (far, _) = sech.decay_rate_fit_window(0.5, 0.7).unwrap();
    assert!((far.rate - 1.0).abs() <= (near.rate - 1.0).abs() + 1e-12);
    assert!((far.rate - 1.0).abs() < 1e-3);
}

#[test]
fn energy_matches_dual_functional_on_large_box() {
    let gs = ground_state_233();
    let e = gs.exponents;
    let metric = ConformalMetric::flat(Grid::cube(3, 64, 16.0).unwrap());
    let c = [8.0; 3];
    let (u, v) = transplant(gs, &metric, &c, 1.0, 7.9).unwrap();
    let pair = DualPair::from_primal(&metric, &u, &v, e, 1.0).unwrap();
    let i = dual_energy(&pair).unwrap();
    assert!(((i - gs.c_inf) / gs.c_inf).abs() < 1e-4, "I = {i}, C_inf = {}", gs.c_inf);
}

#[test]
fn initializations_agree() {
    let e = ExponentPair::new(2.0, 3.0, 3).unwrap();
    let outcomes = compare_initializations(&e, EntireParams::default());
    let values: Vec<f64> = outcomes.iter().filter_map(|o| o.c_inf).collect();
    assert!(!values.is_empty());
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    assert!((best - ground_state_233().c_inf).abs() < 1e-8 * best);
}

#[test]
fn bootstrap_examples() {
    let b = bootstrap_exponents(&ExponentPair::new(3.0, 3.0, 3).unwrap(), 50).unwrap();
    assert_eq!(b.steps[0], (12.0, 12.0));
    assert_eq!(b.tag, BootstrapTag::Unbounded);
    assert_eq!(b.steps.len(), 1);

    let b = bootstrap_exponents(&ExponentPair::new(1.5, 1.5, 5).unwrap(), 50).unwrap();
    assert_eq!(b.tag, BootstrapTag::Unbounded);
    assert!(b.increasing && b.steps.len() <= 10);

    let e = ExponentPair::new(5.0, 5.0, 5).unwrap();
    assert!(!e.hc_holds);
    let b = bootstrap_exponents(&e, 200).unwrap();
    assert_eq!(b.tag, BootstrapTag::MaxIter);
    assert_eq!(b.fixed_point, 10.0);
    assert!((b.backward_limit.unwrap() - 10.0).abs() < 1e-6);

    let e = ExponentPair::new(2.0, 3.0, 3).unwrap();
    assert!(e.alpha_star.is_infinite());
    assert!(bootstrap_exponents(&e, 10).is_err());
}

#[test]
fn ground_state_json_roundtrip() {
    let gs = ground_state_233();
    let text = gs.to_json().unwrap();
    let back = spikelab::entire::RadialGroundState::from_json(&text).unwrap();
    assert_eq!(&back, gs);
}
