//! CSV and JSON emitters for series and fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::analysis::ExpansionFit;
use super::series::ContinuationSeries;

pub const ARTIFACT_VERSION: u32 = 1;

/// Provenance stamped on every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub run_id: String,
    pub config_hash: String,
    pub artifact_version: u32,
}

impl ArtifactMeta {
    pub fn new(run_id: impl Into<String>, config_hash: impl Into<String>) -> Self {
        Self { run_id: run_id.into(), config_hash: config_hash.into(), artifact_version: ARTIFACT_VERSION }
    }
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

/// Shortest round-trip form in scientific notation, with `-0` folded to `0`.
fn num(x: f64) -> String {
    format!("{:e}", x + 0.0)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// One row per entry; metadata in leading `#` comment lines.
pub fn series_csv(series: &ContinuationSeries, meta: &ArtifactMeta) -> Result<String> {
    let dim = series.exponents.dim;
    let mut out = format!(
        "# run_id={}\n# config_hash={}\n# artifact_version={}\n",
        meta.run_id, meta.config_hash, meta.artifact_version
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["eps", "energy_J", "energy_I", "sup_u", "sup_v"].iter().map(|s| s.to_string()).collect();
    header.extend((0..dim).map(|i| format!("p_eps_{i}")));
    header.extend((0..dim).map(|i| format!("q_eps_{i}")));
    header.extend(["dist_over_eps", "S_at_p_eps", "theta_u", "theta_v"].iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(csv_error)?;
    for e in &series.entries {
        let mut row = vec![
            num(e.eps),
            num(e.energy_j),
            num(e.energy_i),
            num(e.sup_u),
            num(e.sup_v),
        ];
        row.extend(e.p_eps.iter().map(|x| num(*x)));
        row.extend(e.q_eps.iter().map(|x| num(*x)));
        row.push(num(e.dist_over_eps));
        row.push(num(e.s_at_p_eps));
        row.push(opt(e.theta_u()));
        row.push(opt(e.theta_v()));
        w.write_record(&row).map_err(csv_error)?;
    }
    let body = w.into_inner().map_err(csv_error)?;
    out.push_str(&String::from_utf8(body).map_err(csv_error)?);
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSummary {
    pub meta: ArtifactMeta,
    pub label: String,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub fit: ExpansionFit,
}

pub fn fit_summary_json(label: &str, fit: &ExpansionFit, meta: &ArtifactMeta) -> Result<String> {
    let s = FitSummary { meta: meta.clone(), label: label.to_string(), c0: fit.c0, c2: fit.c2, fit: fit.clone() };
    Ok(serde_json::to_string_pretty(&s)?)
}
