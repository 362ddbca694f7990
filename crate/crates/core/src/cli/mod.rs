//! Configuration, orchestration and artifacts behind the `spikelab` binary.

pub mod artifacts;
pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::entire::{bootstrap_exponents, solve_entire_ground_state, BootstrapTag, ExponentPair, RadialGroundState};
use crate::error::{Error, Result};
use crate::geometry::{scalar_curvature, ConformalMetric};
use crate::spike::{
    concentration_check, expansion_fit, fit_summary_json, run_continuation, series_csv, ArtifactMeta, ConcentrationReport,
    ContinuationSeries, Convention, ExpansionFit,
};

pub use config::{Check, EpsSpec, RunConfig, SeedSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Exit status for an error that escaped a verb.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConfigParse { .. } | Error::HyperbolaViolated { .. } | Error::InvalidInput(_) | Error::Io(_) | Error::Json(_) => {
            EXIT_CONFIG
        }
        _ => EXIT_SOLVER,
    }
}

/// Worker count from `SPIKELAB_WORKERS`, else the available parallelism.
pub fn workers() -> usize {
    std::env::var("SPIKELAB_WORKERS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|n: &usize| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    RunConfig::parse(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub p: f64,
    pub q: f64,
    pub dim: usize,
    pub hc_holds: bool,
    pub hyperbola_lhs: f64,
    pub hyperbola_rhs: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_star: f64,
    pub beta_star: f64,
    pub bootstrap_tag: Option<BootstrapTag>,
    pub bootstrap_steps: usize,
    /// `(eps, nodes in [0, 3 eps])` along the coarsest axis.
    pub resolution: Vec<(f64, usize)>,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "exponents p = {}, q = {}, N = {}", self.p, self.q, self.dim);
        let _ = writeln!(
            s,
            "hyperbola 1/(p+1) + 1/(q+1) = {:.6} vs (N-2)/N = {:.6}: {}",
            self.hyperbola_lhs,
            self.hyperbola_rhs,
            if self.hc_holds { "subcritical" } else { "violated" }
        );
        let _ = writeln!(s, "alpha = {}, beta = {}, alpha* = {}, beta* = {}", self.alpha, self.beta, self.alpha_star, self.beta_star);
        match self.bootstrap_tag {
            Some(BootstrapTag::ImmediateRegularity) => {
                let _ = writeln!(s, "bootstrap: ImmediateRegularity");
            }
            Some(t) => {
                let _ = writeln!(s, "bootstrap: {t:?} after {} steps", self.bootstrap_steps);
            }
            None => {
                let _ = writeln!(s, "bootstrap: not available");
            }
        }
        for (eps, nodes) in &self.resolution {
            let _ = writeln!(s, "eps = {eps:.6}: {nodes} nodes across [0, 3 eps]");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        for e in &self.errors {
            let _ = writeln!(s, "error: {e}");
        }
        s
    }
}

pub fn validate(config: &RunConfig) -> ValidationReport {
    let e = ExponentPair::new(config.p, config.q, config.dim);
    let (p, q, n) = (config.p, config.q, config.dim);
    let nf = n as f64;
    let lhs = 1.0 / (p + 1.0) + 1.0 / (q + 1.0);
    let rhs = (nf - 2.0) / nf;
    let mut r = ValidationReport {
        p,
        q,
        dim: n,
        hc_holds: lhs > rhs,
        hyperbola_lhs: lhs,
        hyperbola_rhs: rhs,
        alpha: e.as_ref().map_or(f64::NAN, |e| e.alpha),
        beta: e.as_ref().map_or(f64::NAN, |e| e.beta),
        alpha_star: e.as_ref().map_or(f64::NAN, |e| e.alpha_star),
        beta_star: e.as_ref().map_or(f64::NAN, |e| e.beta_star),
        bootstrap_tag: None,
        bootstrap_steps: 0,
        resolution: Vec::new(),
        errors: Vec::new(),
        warnings: Vec::new(),
    };
    match &e {
        Ok(pair) => match bootstrap_exponents(pair, 200) {
            Ok(b) => {
                r.bootstrap_tag = Some(b.tag);
                r.bootstrap_steps = b.steps.len();
            }
            Err(_) => r.bootstrap_tag = Some(BootstrapTag::ImmediateRegularity),
        },
        Err(err) => r.errors.push(err.to_string()),
    }
    if !r.hc_holds {
        r.errors.push(format!(
            "critical hyperbola violated: 1/(p+1) + 1/(q+1) = {lhs:.6} <= (N-2)/N = {rhs:.6}"
        ));
    }
    let grid = config.grid();
    if let Err(err) = &grid {
        r.errors.push(err.to_string());
    }
    if let Err(err) = config.metric_kind() {
        r.errors.push(err.to_string());
    }
    let eps = config.eps_list();
    if eps.is_empty() || eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|x| !(*x > 0.0)) {
        r.errors.push("eps values must be positive and strictly decreasing".into());
    }
    if !(config.cutoff_fraction > 0.0 && config.cutoff_fraction < 0.5) {
        r.errors.push("solver.cutoff_fraction must lie in (0, 1/2)".into());
    }
    if let Err(err) = config.entire_params().validate() {
        r.errors.push(err.to_string());
    }
    if config.seeds.is_empty() {
        r.errors.push("at least one seed is required".into());
    }
    if let Ok(g) = grid {
        let h = g.max_spacing();
        for &x in &eps {
            let nodes = (3.0 * x / h).floor() as usize + 1;
            r.resolution.push((x, nodes));
            if nodes < 8 {
                r.warnings.push(format!("eps = {x:.6} spans only {nodes} nodes across [0, 3 eps]"));
            }
        }
    }
    r
}

/// Hash of the parameters that determine a ground state.
pub fn ground_state_key(e: &ExponentPair, config: &RunConfig) -> String {
    let text = format!("p={};q={};N={};R_max={};M={};tol={}", e.p, e.q, e.dim, config.r_max, config.m, config.entire_tol);
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Ground state from `<cache_dir>/gs-<key>.json`, solving and storing it
/// on a miss. Returns the state and whether it came from the cache.
pub fn cached_ground_state(config: &RunConfig, cache_dir: &Path) -> Result<(RadialGroundState, bool)> {
    let e = config.exponents()?;
    e.require_hc()?;
    let path = cache_dir.join(format!("gs-{}.json", &ground_state_key(&e, config)[..16]));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(gs) = RadialGroundState::from_json(&text) {
            return Ok((gs, true));
        }
    }
    let gs = solve_entire_ground_state(&e, config.entire_params())?;
    artifacts::write_text(&path, &gs.to_json()?)?;
    Ok((gs, false))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub meta: ArtifactMeta,
    pub c_inf: f64,
    pub checks: Vec<CheckResult>,
    pub failures: Vec<String>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SeriesDocument {
    meta: ArtifactMeta,
    seed: String,
    series: ContinuationSeries,
}

#[derive(Serialize)]
struct GroundStateDocument<'a> {
    meta: ArtifactMeta,
    state: &'a RadialGroundState,
}

pub fn seed_center(seed: &SeedSpec, metric: &ConformalMetric) -> Vec<f64> {
    let grid = metric.grid();
    let argmax = grid.node(metric.argmax_curvature());
    match seed {
        SeedSpec::Argmax => argmax,
        SeedSpec::Opposite => grid.reduce(&argmax.iter().map(|x| x + 0.5 * grid.period()).collect::<Vec<_>>()),
        SeedSpec::Point(p) => grid.reduce(p),
    }
}

fn seed_label(seed: &SeedSpec) -> String {
    match seed {
        SeedSpec::Argmax => "argmax".into(),
        SeedSpec::Opposite => "opposite".into(),
        SeedSpec::Point(p) => p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
    }
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name: name.into(), passed, detail }
}

/// Sup norms stay below twice the ground-state peak and the spike height
/// stays above one.
fn decay_and_bounds(series: &ContinuationSeries, gs: &RadialGroundState) -> CheckResult {
    let k = 2.0 * gs.u[0].max(gs.v[0]);
    let mut ok = !series.entries.is_empty();
    let mut fits = 0;
    let mut worst: f64 = 0.0;
    for e in &series.entries {
        ok &= e.sup_u <= k && e.sup_v <= k && e.sup_u >= 1.0;
        for (fit, reference) in [(e.decay_u, gs.decay_u.rate), (e.decay_v, gs.decay_v.rate)] {
            if let Some(f) = fit {
                fits += 1;
                ok &= f.rate > 0.0 && f.residual < 0.15 && (f.rate - reference).abs() < 0.15;
                worst = worst.max((f.rate - reference).abs());
            }
        }
    }
    ok &= fits > 0;
    check("decay", ok, format!("{fits} annulus fits, largest |theta - c| = {worst:.4}, sup bound {k:.4}"))
}

fn limit_energy(series: &ContinuationSeries) -> CheckResult {
    let dev: Vec<f64> = series.entries.iter().map(|e| (e.scaled_energy() / series.c_inf - 1.0).abs()).collect();
    let last = dev.last().copied().unwrap_or(f64::INFINITY);
    let decreasing = dev.windows(2).all(|w| w[1] <= w[0]);
    check(
        "limit_energy",
        last < 0.02 && decreasing,
        format!("relative deviations {}", dev.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(" ")),
    )
}

fn maxima(series: &ContinuationSeries, h: f64) -> CheckResult {
    let r: Vec<f64> = series.entries.iter().map(|e| e.dist_over_eps).collect();
    let nonincreasing = r.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let last = series.entries.last();
    let final_ok = last.is_some_and(|e| e.dist_over_eps < 0.5 * h / e.eps);
    check(
        "maxima",
        nonincreasing && final_ok,
        format!("d/eps = {}", r.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(" ")),
    )
}

fn profile(series: &ContinuationSeries) -> CheckResult {
    let devs: Vec<f64> = series.entries.iter().filter_map(|e| e.profile.as_ref().map(|p| p.deviation_u.max(p.deviation_v))).collect();
    let shrinking = devs.windows(2).all(|w| w[1] <= w[0]);
    let height = series.entries.iter().all(|e| e.sup_u >= 1.0);
    check(
        "profile",
        !devs.is_empty() && shrinking && height,
        format!("profile deviations {}", devs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(" ")),
    )
}

fn duality(series: &ContinuationSeries) -> CheckResult {
    let ok = !series.entries.is_empty() && series.entries.iter().all(|e| e.duality.passes());
    let worst = series.entries.iter().fold(0.0f64, |m, e| {
        m.max(e.duality.inverse_residual_u)
            .max(e.duality.inverse_residual_v)
            .max(e.duality.gradient_norm)
            .max(e.duality.relative_gap())
    });
    check("duality", ok, format!("largest duality residual {worst:.3e}"))
}

fn expansion(fit: &std::result::Result<ExpansionFit, String>) -> CheckResult {
    match fit {
        Ok(f) if f.scalar_curvature == 0.0 => check(
            "expansion",
            f.c2_vanishes(),
            format!("C0 = {:.6}, C2 = {:.4e} (flat control)", f.c0, f.c2),
        ),
        Ok(f) => check(
            "expansion",
            f.matched_convention != Convention::Unmatched,
            format!(
                "C0 = {:.6}, C2 = {:.4}, predicted minus {:.4}, plus {:.4}, with cross term {:.4}: {:?}",
                f.c0, f.c2, f.predicted_c2_minus, f.predicted_c2_plus, f.predicted_c2_cross, f.matched_convention
            ),
        ),
        Err(e) => check("expansion", false, e.clone()),
    }
}

/// Result of [`run`]: the summary plus the directory holding artifacts.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: RunSummary,
}

/// Executes a full run and writes its artifacts under
/// `<output>/<run id>/`; the ground-state cache lives in `<output>/cache`.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let report = validate(config);
    if !report.ok() {
        let e = config.exponents();
        return Err(match e.and_then(|e| e.require_hc()) {
            Err(err) => err,
            Ok(()) => Error::InvalidInput(report.errors.join("; ")),
        });
    }
    let root = PathBuf::from(&config.output);
    let dir = root.join(config.run_id());
    fs::create_dir_all(&dir)?;
    let meta = ArtifactMeta::new(config.run_id(), config.hash());
    artifacts::write_text(&dir.join("config.txt"), &config.to_canonical())?;
    let (gs, _) = cached_ground_state(config, &root.join("cache"))?;
    artifacts::write_text(
        &dir.join("ground_state.json"),
        &serde_json::to_string_pretty(&GroundStateDocument { meta: meta.clone(), state: &gs })?,
    )?;
    let metric = ConformalMetric::new(config.grid()?, config.metric_kind()?)?;
    let eps = config.eps_list();
    let mut options = config.continuation_options();
    options.keep_fields = config.dump_fields;
    let centers: Vec<Vec<f64>> = config.seeds.iter().map(|s| seed_center(s, &metric)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers())
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let results: Vec<Result<ContinuationSeries>> = pool.install(|| {
        centers.par_iter().map(|c| run_continuation(&metric, &gs, &eps, Some(c), &options)).collect()
    });
    let mut series = Vec::new();
    for r in results {
        series.push(r?);
    }
    let h = metric.grid().max_spacing();
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    for (i, (s, seed)) in series.iter().zip(&config.seeds).enumerate() {
        artifacts::write_text(&dir.join(format!("series-{i}.csv")), &series_csv(s, &meta)?)?;
        let doc = SeriesDocument { meta: meta.clone(), seed: seed_label(seed), series: s.clone() };
        artifacts::write_text(&dir.join(format!("series-{i}.json")), &serde_json::to_string_pretty(&doc)?)?;
        if config.dump_fields {
            for (k, sol) in s.solutions.iter().enumerate() {
                artifacts::write_field_dump(&dir.join(format!("fields-{i}-{k}.bin")), &sol.u, &sol.v, sol.eps)?;
            }
        }
        if let Some(f) = &s.failure {
            failures.push(format!("series {i} ({}) stopped at eps = {}: {}", seed_label(seed), f.eps, f.message));
        }
        let tag = |mut c: CheckResult| {
            c.name = format!("{}[{i}]", c.name);
            c
        };
        if config.has(Check::Duality) {
            checks.push(tag(duality(s)));
        }
        if config.has(Check::LimitEnergy) {
            checks.push(tag(limit_energy(s)));
        }
        if config.has(Check::Decay) {
            checks.push(tag(decay_and_bounds(s, &gs)));
        }
        if config.has(Check::Maxima) {
            checks.push(tag(maxima(s, h)));
        }
        if config.has(Check::Profile) {
            checks.push(tag(profile(s)));
        }
        if config.has(Check::Expansion) {
            let fit = expansion_fit(s, &metric, &gs).map_err(|e| e.to_string());
            if let Ok(f) = &fit {
                artifacts::write_text(&dir.join(format!("fit-{i}.json")), &fit_summary_json(&seed_label(seed), f, &meta)?)?;
            }
            checks.push(tag(expansion(&fit)));
        }
    }
    if config.has(Check::Concentration) {
        let c = concentration(&series, &metric);
        match &c {
            Some(rep) => {
                artifacts::write_text(&dir.join("concentration.json"), &serde_json::to_string_pretty(rep)?)?;
                checks.push(check(
                    "concentration",
                    rep.passes(),
                    format!(
                        "distance nonincreasing {}, final {}, energy ordering {}, S(p_eps) near max {}",
                        rep.distance_nonincreasing, rep.distance_final_ok, rep.energy_ordering, rep.curvature_ok
                    ),
                ));
            }
            None => checks.push(check("concentration", false, "needs at least two seeds".into())),
        }
    }
    let exit_code = if !failures.is_empty() {
        EXIT_SOLVER
    } else if checks.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    };
    let summary = RunSummary { meta, c_inf: gs.c_inf, checks, failures, exit_code };
    artifacts::write_text(&dir.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    artifacts::write_text(&dir.join("summary.txt"), &render_summary(&summary, &series))?;
    Ok(RunOutcome { dir, summary })
}

fn concentration(series: &[ContinuationSeries], metric: &ConformalMetric) -> Option<ConcentrationReport> {
    let (first, rest) = series.split_first()?;
    if rest.is_empty() {
        return None;
    }
    let controls: Vec<&ContinuationSeries> = rest.iter().collect();
    Some(concentration_check(first, &controls, metric))
}

pub fn render_summary(summary: &RunSummary, series: &[ContinuationSeries]) -> String {
    let mut s = String::new();
    let m = &summary.meta;
    let _ = writeln!(s, "run {} (config {}, artifact version {})", m.run_id, &m.config_hash[..12.min(m.config_hash.len())], m.artifact_version);
    let _ = writeln!(s, "C_inf = {:.8}", summary.c_inf);
    for (i, ser) in series.iter().enumerate() {
        let _ = writeln!(s, "series {i} seeded at {:?}", ser.seed_center);
        let _ = writeln!(s, "  {:>10} {:>14} {:>12} {:>9} {:>9} {:>10} {:>8}", "eps", "J/eps^N", "I-J rel", "sup u", "sup v", "d/eps", "theta_u");
        for e in &ser.entries {
            let _ = writeln!(
                s,
                "  {:>10.6} {:>14.8} {:>12.3e} {:>9.5} {:>9.5} {:>10.3e} {:>8}",
                e.eps,
                e.scaled_energy(),
                e.duality.relative_gap(),
                e.sup_u,
                e.sup_v,
                e.dist_over_eps,
                e.theta_u().map_or("-".to_string(), |t| format!("{t:.4}"))
            );
        }
        if let Some(f) = &ser.failure {
            let _ = writeln!(s, "  stopped at eps = {}: {}", f.eps, f.message);
        }
    }
    for c in &summary.checks {
        let _ = writeln!(s, "[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    for f in &summary.failures {
        let _ = writeln!(s, "solver failure: {f}");
    }
    let _ = writeln!(s, "exit status {}", summary.exit_code);
    s
}

/// Re-renders the summary of a finished run directory and rewrites its
/// CSV files from the stored series.
pub fn report(dir: &Path) -> Result<String> {
    let summary: RunSummary = serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?;
    let mut series = Vec::new();
    for i in 0.. {
        let path = dir.join(format!("series-{i}.json"));
        if !path.exists() {
            break;
        }
        let doc: SeriesDocument = serde_json::from_str(&fs::read_to_string(&path)?)?;
        artifacts::write_text(&dir.join(format!("series-{i}.csv")), &series_csv(&doc.series, &doc.meta)?)?;
        series.push(doc.series);
    }
    Ok(render_summary(&summary, &series))
}

/// Solves (or loads) the ground state of a configuration and writes it to
/// `<output>/<run id>/ground_state.json`.
pub fn entire(config: &RunConfig) -> Result<(RadialGroundState, PathBuf, String)> {
    let root = PathBuf::from(&config.output);
    let (gs, cached) = cached_ground_state(config, &root.join("cache"))?;
    let meta = ArtifactMeta::new(config.run_id(), config.hash());
    let path = root.join(config.run_id()).join("ground_state.json");
    artifacts::write_text(&path, &serde_json::to_string_pretty(&GroundStateDocument { meta, state: &gs })?)?;
    let mut s = String::new();
    let m = gs.moments;
    let _ = writeln!(s, "ground state p = {}, q = {}, N = {}{}", gs.exponents.p, gs.exponents.q, gs.exponents.dim, if cached { " (cached)" } else { "" });
    let _ = writeln!(s, "U(0) = {:.10}, V(0) = {:.10}, residual {:.2e}", gs.u[0], gs.v[0], gs.residual_norm);
    let _ = writeln!(s, "A0 = {:.8}, B0 = {:.8}, M2U = {:.8}, M2V = {:.8}", m.a0, m.b0, m.m2u, m.m2v);
    let _ = writeln!(s, "C_inf = {:.10}", gs.c_inf);
    let _ = writeln!(s, "decay rates {:.6} {:.6}", gs.decay_u.rate, gs.decay_v.rate);
    Ok((gs, path, s))
}

/// Scalar curvature at every seed of a configuration.
pub fn seed_curvatures(config: &RunConfig) -> Result<Vec<(Vec<f64>, f64)>> {
    let metric = ConformalMetric::new(config.grid()?, config.metric_kind()?)?;
    Ok(config
        .seeds
        .iter()
        .map(|s| {
            let c = seed_center(s, &metric);
            let v = scalar_curvature(&metric, &c);
            (c, v)
        })
        .collect())
}
