//! Plain-text run configuration with dotted keys.
//!
//! ```text
//! run.id = bump-small
//! exponents.p = 2
//! exponents.q = 3
//! metric.N = 3
//! metric.kind = bump
//! metric.L = 1
//! metric.grid = 64
//! metric.params.amplitude = 0.1
//! metric.params.center = 0.5, 0.5, 0.5
//! metric.params.sharpness = 12
//! eps.count = 5
//! seeds = argmax; opposite
//! ```
//!
//! Blank lines and `#` comments are ignored. [`RunConfig::to_canonical`]
//! emits every key in a fixed order; parsing that output is the identity.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::entire::{EntireParams, ExponentPair};
use crate::error::{Error, Result};
use crate::geometry::MetricKind;
use crate::grid::Grid;
use crate::spike::{default_eps_schedule, ContinuationOptions};

#[derive(Debug, Clone, PartialEq)]
pub enum SeedSpec {
    /// Node of largest scalar curvature.
    Argmax,
    /// The argmax shifted by half a period along every axis.
    Opposite,
    Point(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    Duality,
    LimitEnergy,
    Decay,
    Maxima,
    Profile,
    Concentration,
    Expansion,
}

impl Check {
    pub const ALL: [Check; 7] =
        [Check::Duality, Check::LimitEnergy, Check::Decay, Check::Maxima, Check::Profile, Check::Concentration, Check::Expansion];

    pub fn name(&self) -> &'static str {
        match self {
            Check::Duality => "duality",
            Check::LimitEnergy => "limit_energy",
            Check::Decay => "decay",
            Check::Maxima => "maxima",
            Check::Profile => "profile",
            Check::Concentration => "concentration",
            Check::Expansion => "expansion",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EpsSpec {
    List(Vec<f64>),
    /// `L / (10 * 2^{k/2})` for `k = 0..count`.
    Schedule(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub run_id: Option<String>,
    pub output: String,
    pub p: f64,
    pub q: f64,
    pub dim: usize,
    pub metric_kind: String,
    pub amplitude: f64,
    pub mode: Vec<i64>,
    pub center: Vec<f64>,
    pub sharpness: f64,
    pub period: f64,
    pub grid: Vec<usize>,
    pub eps: EpsSpec,
    pub solver_tol: f64,
    pub solver_max_iterations: usize,
    pub positivity_tol: f64,
    pub cutoff_fraction: f64,
    pub r_max: f64,
    pub m: usize,
    pub entire_tol: f64,
    pub seeds: Vec<SeedSpec>,
    pub checks: Vec<Check>,
    pub dump_fields: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let e = EntireParams::default();
        Self {
            run_id: None,
            output: "runs".into(),
            p: 2.0,
            q: 3.0,
            dim: 3,
            metric_kind: "flat".into(),
            amplitude: 0.0,
            mode: Vec::new(),
            center: Vec::new(),
            sharpness: 0.0,
            period: 1.0,
            grid: vec![32],
            eps: EpsSpec::Schedule(3),
            solver_tol: 1e-9,
            solver_max_iterations: 40,
            positivity_tol: 1e-2,
            cutoff_fraction: 0.45,
            r_max: e.r_max,
            m: e.m,
            entire_tol: e.tol,
            seeds: vec![SeedSpec::Argmax],
            checks: vec![Check::Duality, Check::Decay, Check::Maxima],
            dump_fields: false,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::ConfigParse { line, message: message.into() }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| parse_err(line, format!("{key}: cannot parse '{v}'")))
}

fn list<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| num(line, key, s)).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| parse_err(line, "expected 'key = value'"))?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(parse_err(line, "empty key"));
            }
            if entries.insert(key.clone(), (line, v.trim().to_string())).is_some() {
                return Err(parse_err(line, format!("duplicate key {key}")));
            }
        }
        let mut c = RunConfig::default();
        let mut exponent_dim = None;
        for (key, (line, v)) in &entries {
            let (line, v) = (*line, v.as_str());
            match key.as_str() {
                "run.id" => c.run_id = Some(v.to_string()),
                "run.output" => c.output = v.to_string(),
                "exponents.p" => c.p = num(line, key, v)?,
                "exponents.q" => c.q = num(line, key, v)?,
                "exponents.N" => exponent_dim = Some((line, num::<usize>(line, key, v)?)),
                "metric.N" => c.dim = num(line, key, v)?,
                "metric.kind" => c.metric_kind = v.to_string(),
                "metric.L" => c.period = num(line, key, v)?,
                "metric.grid" => c.grid = list(line, key, v)?,
                "metric.params.amplitude" => c.amplitude = num(line, key, v)?,
                "metric.params.mode" => c.mode = list(line, key, v)?,
                "metric.params.center" => c.center = list(line, key, v)?,
                "metric.params.sharpness" => c.sharpness = num(line, key, v)?,
                "eps.list" => c.eps = EpsSpec::List(list(line, key, v)?),
                "eps.count" => c.eps = EpsSpec::Schedule(num(line, key, v)?),
                "solver.tol" => c.solver_tol = num(line, key, v)?,
                "solver.max_iterations" => c.solver_max_iterations = num(line, key, v)?,
                "solver.positivity_tol" => c.positivity_tol = num(line, key, v)?,
                "solver.cutoff_fraction" => c.cutoff_fraction = num(line, key, v)?,
                "entire.R_max" => c.r_max = num(line, key, v)?,
                "entire.M" => c.m = num(line, key, v)?,
                "entire.tol" => c.entire_tol = num(line, key, v)?,
                "output.dump_fields" => c.dump_fields = num(line, key, v)?,
                "seeds" => {
                    c.seeds = v
                        .split(';')
                        .map(|s| s.trim())
                        .filter(|s| !s.is_empty())
                        .map(|s| match s {
                            "argmax" => Ok(SeedSpec::Argmax),
                            "opposite" => Ok(SeedSpec::Opposite),
                            _ => list(line, key, s).map(SeedSpec::Point),
                        })
                        .collect::<Result<_>>()?;
                }
                "checks" => {
                    let mut checks = v
                        .split(',')
                        .map(|s| s.trim())
                        .filter(|s| !s.is_empty())
                        .map(|s| Check::parse(s).ok_or_else(|| parse_err(line, format!("unknown check '{s}'"))))
                        .collect::<Result<Vec<_>>>()?;
                    checks.sort();
                    checks.dedup();
                    c.checks = checks;
                }
                _ => return Err(parse_err(line, format!("unknown key {key}"))),
            }
        }
        if let Some((line, n)) = exponent_dim {
            if n != c.dim {
                return Err(parse_err(line, format!("exponents.N = {n} differs from metric.N = {}", c.dim)));
            }
        }
        if !["flat", "constant", "cosine", "bump"].contains(&c.metric_kind.as_str()) {
            let line = entries.get("metric.kind").map_or(0, |e| e.0);
            return Err(parse_err(line, format!("unknown metric kind '{}'", c.metric_kind)));
        }
        Ok(c)
    }

    /// Every key in a fixed order with normalized values.
    pub fn to_canonical(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        if let Some(id) = &self.run_id {
            put("run.id", id.clone());
        }
        put("run.output", self.output.clone());
        put("exponents.p", self.p.to_string());
        put("exponents.q", self.q.to_string());
        put("metric.N", self.dim.to_string());
        put("metric.kind", self.metric_kind.clone());
        put("metric.L", self.period.to_string());
        put("metric.grid", join(&self.grid));
        put("metric.params.amplitude", self.amplitude.to_string());
        put("metric.params.mode", join(&self.mode));
        put("metric.params.center", join(&self.center));
        put("metric.params.sharpness", self.sharpness.to_string());
        match &self.eps {
            EpsSpec::List(l) => put("eps.list", join(l)),
            EpsSpec::Schedule(n) => put("eps.count", n.to_string()),
        }
        put("solver.tol", self.solver_tol.to_string());
        put("solver.max_iterations", self.solver_max_iterations.to_string());
        put("solver.positivity_tol", self.positivity_tol.to_string());
        put("solver.cutoff_fraction", self.cutoff_fraction.to_string());
        put("entire.R_max", self.r_max.to_string());
        put("entire.M", self.m.to_string());
        put("entire.tol", self.entire_tol.to_string());
        put(
            "seeds",
            self.seeds
                .iter()
                .map(|s| match s {
                    SeedSpec::Argmax => "argmax".to_string(),
                    SeedSpec::Opposite => "opposite".to_string(),
                    SeedSpec::Point(p) => join(p),
                })
                .collect::<Vec<_>>()
                .join("; "),
        );
        put("checks", self.checks.iter().map(|c| c.name()).collect::<Vec<_>>().join(", "));
        put("output.dump_fields", self.dump_fields.to_string());
        s
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical().as_bytes()))
    }

    pub fn run_id(&self) -> String {
        self.run_id.clone().unwrap_or_else(|| format!("run-{}", &self.hash()[..12]))
    }

    pub fn exponents(&self) -> Result<ExponentPair> {
        ExponentPair::new(self.p, self.q, self.dim)
    }

    pub fn entire_params(&self) -> EntireParams {
        EntireParams { r_max: self.r_max, m: self.m, tol: self.entire_tol }
    }

    pub fn grid(&self) -> Result<Grid> {
        let shape = match self.grid.len() {
            1 => vec![self.grid[0]; self.dim],
            n if n == self.dim => self.grid.clone(),
            n => return Err(Error::InvalidInput(format!("metric.grid has {n} entries for N = {}", self.dim))),
        };
        Grid::new(shape, self.period)
    }

    fn center_or_middle(&self) -> Vec<f64> {
        if self.center.is_empty() {
            vec![0.5 * self.period; self.dim]
        } else {
            self.center.clone()
        }
    }

    pub fn metric_kind(&self) -> Result<MetricKind> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        match self.metric_kind.as_str() {
            "flat" => Ok(MetricKind::Flat),
            "constant" => Ok(MetricKind::Constant { value: self.amplitude }),
            "cosine" => {
                if self.mode.len() != self.dim {
                    return bad(format!("cosine mode needs {} entries", self.dim));
                }
                Ok(MetricKind::Cosine { amplitude: self.amplitude, mode: self.mode.clone() })
            }
            "bump" => {
                let center = self.center_or_middle();
                if center.len() != self.dim {
                    return bad(format!("bump center needs {} entries", self.dim));
                }
                if !(self.sharpness > 0.0) {
                    return bad("bump sharpness must be positive".into());
                }
                Ok(MetricKind::Bump { amplitude: self.amplitude, center, sharpness: self.sharpness })
            }
            k => bad(format!("unknown metric kind '{k}'")),
        }
    }

    pub fn eps_list(&self) -> Vec<f64> {
        match &self.eps {
            EpsSpec::List(l) => l.clone(),
            EpsSpec::Schedule(n) => default_eps_schedule(self.period, *n),
        }
    }

    pub fn continuation_options(&self) -> ContinuationOptions {
        let mut o = ContinuationOptions { cutoff_fraction: self.cutoff_fraction, ..Default::default() };
        o.newton.tol = self.solver_tol;
        o.newton.max_iterations = self.solver_max_iterations;
        o.newton.positivity_tol = self.positivity_tol;
        o
    }

    pub fn has(&self, check: Check) -> bool {
        self.checks.contains(&check)
    }
}
