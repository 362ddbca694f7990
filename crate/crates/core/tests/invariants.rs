use std::f64::consts::PI;

use proptest::prelude::*;
use spikelab::cli::{Check, EpsSpec, RunConfig, SeedSpec};
use spikelab::dual::{helmholtz_inverse, RayCoefficients};
use spikelab::entire::{bootstrap_exponents, BootstrapTag, ExponentPair};
use spikelab::geometry::{christoffel, geodesic_distance, laplace_beltrami_apply, scalar_curvature, ConformalMetric, MetricKind};
use spikelab::grid::{Grid, GridField};

fn trig(grid: &Grid, c: &[f64]) -> GridField {
    grid.sample(|x| {
        c[0] + c[1] * (2.0 * PI * x[0]).cos()
            + c[2] * (2.0 * PI * (x[1] - x[2])).sin()
            + c[3] * (4.0 * PI * (x[0] + c[4])).cos() * (2.0 * PI * x[1]).sin()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 5)
}

fn metric(amplitude: f64, mode: Vec<i64>) -> ConformalMetric {
    ConformalMetric::new(Grid::cube(3, 16, 1.0).unwrap(), MetricKind::Cosine { amplitude, mode }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn christoffel_symmetric(a in -0.5..0.5f64, mode in prop::collection::vec(-2i64..=2, 3), x in prop::collection::vec(0.0..1.0f64, 3)) {
        let m = metric(a, mode);
        let g = christoffel(&m, &x);
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(g[k][i][j], g[k][j][i]);
                }
            }
        }
    }

    #[test]
    fn constant_factor_is_flat(c in -3.0..3.0f64, x in prop::collection::vec(0.0..1.0f64, 3)) {
        let m = ConformalMetric::new(Grid::cube(3, 8, 1.0).unwrap(), MetricKind::Constant { value: c }).unwrap();
        prop_assert!(scalar_curvature(&m, &x).abs() < 1e-12);
    }

    #[test]
    fn laplace_beltrami_self_adjoint(a in -0.4..0.4f64, cf in coeffs(), ch in coeffs()) {
        let m = metric(a, vec![1, 0, 1]);
        let f = trig(m.grid(), &cf);
        let h = trig(m.grid(), &ch);
        let lf = laplace_beltrami_apply(&m, &f);
        let lh = laplace_beltrami_apply(&m, &h);
        let scale = (m.inner(f.values(), f.values()) * m.inner(lh.values(), lh.values())).sqrt().max(1e-30);
        let asym = (m.inner(f.values(), lh.values()) - m.inner(h.values(), lf.values())).abs();
        prop_assert!(asym < 1e-10 * scale.max(1.0));
        let total = m.integrate(lf.values()).abs();
        prop_assert!(total < 1e-10 * f.max_abs().max(1.0) * 100.0);
    }

    #[test]
    fn helmholtz_maximum_principle_and_symmetry(a in -0.4..0.4f64, eps in 0.05..0.5f64, cf in coeffs(), ch in coeffs()) {
        let m = metric(a, vec![0, 1, 1]);
        let f = trig(m.grid(), &cf);
        let h = trig(m.grid(), &ch);
        let u = helmholtz_inverse(&m, eps, &f).unwrap();
        prop_assert!(u.min() >= f.min() - 1e-10 && u.max() <= f.max() + 1e-10);
        let th = helmholtz_inverse(&m, eps, &h).unwrap();
        let lhs = m.inner(u.values(), h.values());
        let rhs = m.inner(f.values(), th.values());
        let norm = (m.inner(f.values(), f.values()) * m.inner(h.values(), h.values())).sqrt();
        prop_assert!((lhs - rhs).abs() < 1e-10 * norm.max(1e-30));
    }

    #[test]
    fn geodesic_symmetry_and_triangle(pts in prop::collection::vec(0.0..1.0f64, 6)) {
        let kind = MetricKind::Bump { amplitude: 0.2, center: vec![0.5, 0.5], sharpness: 15.0 };
        let m = ConformalMetric::new(Grid::cube(2, 32, 1.0).unwrap(), kind).unwrap();
        let (a, b, c) = (&pts[0..2], &pts[2..4], &pts[4..6]);
        let ab = geodesic_distance(&m, a, b);
        let ba = geodesic_distance(&m, b, a);
        prop_assert!((ab - ba).abs() <= 0.02 * ab.max(ba) + 1e-12);
        let bc = geodesic_distance(&m, b, c);
        let ac = geodesic_distance(&m, a, c);
        prop_assert!(ac <= (ab + bc) * 1.02 + 1e-12);
    }

    #[test]
    fn bootstrap_monotone_iff_subcritical(p in 1.1..9.0f64, q in 1.1..9.0f64, n in 3usize..9) {
        let e = ExponentPair::new(p, q, n).unwrap();
        prop_assume!(e.alpha_star.is_finite() && e.beta_star.is_finite());
        let b = bootstrap_exponents(&e, 400).unwrap();
        prop_assert_eq!(b.tag == BootstrapTag::Unbounded, e.hc_holds);
        prop_assert_eq!(b.increasing && b.tag == BootstrapTag::Unbounded, e.hc_holds);
    }

    #[test]
    fn ray_expansion_is_fourth_order(p in 1.2..8.0f64, a in -3.0..3.0f64, eps in 0.01..0.1f64) {
        let h = |t: f64| p / (p + 1.0) * t.powf((p + 1.0) / p) - 0.5 * t * t;
        let target = (p - 1.0) / (2.0 * (p + 1.0));
        let dev = |e: f64| (h(1.0 + a * e * e) - target).abs();
        prop_assume!(a.abs() > 0.1);
        let ratio = dev(eps) / dev(0.5 * eps);
        prop_assert!((ratio - 16.0).abs() < 1.5, "ratio {}", ratio);
    }

    #[test]
    fn ray_maximizer_is_stationary(p in 1.2..6.0f64, q in 1.2..6.0f64, a in 0.1..10.0f64, b in 0.1..10.0f64, c in 0.1..10.0f64) {
        let r = RayCoefficients { p, q, a, b, c };
        let t = r.maximizer().unwrap();
        prop_assert!(r.derivative(t).abs() < 1e-9 * (a + b + c) * t.max(1.0));
        prop_assert!(r.value(t) >= r.value(0.9 * t) && r.value(t) >= r.value(1.1 * t));
    }
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        (1.1..6.0f64, 1.1..6.0f64, 2usize..5, prop::sample::select(vec!["flat", "constant", "cosine", "bump"])),
        (0.0..0.3f64, 0.5..2.0f64, prop::sample::select(vec![16usize, 32, 64]), 1usize..7),
        (prop::collection::vec(0.01..0.2f64, 1..4), any::<bool>(), any::<bool>(), 1e-12..1e-6f64),
        prop::collection::vec(0usize..7, 0..7),
    )
        .prop_map(|((p, q, dim, kind), (amp, period, n, count), (eps, use_list, dump, tol), checks)| {
            let mut c = RunConfig { p, q, dim, metric_kind: kind.to_string(), amplitude: amp, period, ..RunConfig::default() };
            c.grid = vec![n];
            c.mode = (0..dim as i64).collect();
            c.center = vec![0.25 * period; dim];
            c.sharpness = 10.0;
            let mut eps = eps;
            eps.sort_by(|a, b| b.total_cmp(a));
            c.eps = if use_list { EpsSpec::List(eps) } else { EpsSpec::Schedule(count) };
            c.dump_fields = dump;
            c.solver_tol = tol;
            c.seeds = vec![SeedSpec::Argmax, SeedSpec::Point(vec![0.1; dim])];
            let mut ch: Vec<Check> = checks.into_iter().map(|i| Check::ALL[i]).collect();
            ch.sort();
            ch.dedup();
            c.checks = ch;
            c
        })
}

proptest! {
    #[test]
    fn config_roundtrip(c in config_strategy()) {
        let text = c.to_canonical();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_canonical(), text);
    }
}
