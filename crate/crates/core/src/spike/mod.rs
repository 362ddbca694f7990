//! Concentration experiments on continuation series in `eps`.

pub mod analysis;
pub mod output;
pub mod series;

pub use analysis::{
    concentration_check, decay_check, distance_ratio, expansion_fit, expansion_fit_points, rescaled_profile, track_maxima,
    ConcentrationReport, Convention, ExpansionFit, ProfileReport,
};
pub use output::{fit_summary_json, series_csv, ArtifactMeta, ARTIFACT_VERSION};
pub use series::{default_eps_schedule, run_continuation, ContinuationOptions, ContinuationSeries, SeriesEntry, SeriesFailure};
