//! Config-driven experiments: seeded replicas streamed to JSONL, summaries and
//! plot-ready tables.

mod autocorr;
mod config;
mod run;

pub use autocorr::{
    fit_slope, scaled_autocorr_experiment, CollapseCurve, CollapsePoint, ScaledAutocorrConfig, SlopeFit,
    SERIES_STREAM_OFFSET,
};
pub use config::{
    critical_p, CriticalTag, ExperimentConfig, Mode, ModelKind, PValue, ResolvedModel, StatsOptions,
    CRITICAL_POINTS_3D,
};
pub use run::{
    report, run_experiment, write_ratio_csv, CftpSummary, CouplingSummary, Estimate, FkRecord, IsingRecord,
    OracleSummary, RatioRow, RunReport, SeriesRecord, SeriesSummary, StateRecord, Summary, BATCH, CONFIG_FILE,
    SAMPLES_FILE, SUMMARY_FILE,
};
