//! Workload and usability scoring, per-session outcome metrics, and
//! per-condition aggregation.

mod aggregate;
mod questionnaire;
mod session;

pub use aggregate::{
    aggregate, mean_ci, quantile_sorted, read_questionnaires, summarize, summary_text, write_questionnaires,
    write_report_csv, ConditionReport, MetricsReport, QuestionnaireRow, Summary,
};
pub use questionnaire::{
    cronbach_alpha, raw_tlx, reverse_code, reverse_coded, tlx_scale, usability_alpha, usability_composite,
    usability_scale, TlxResponse, UsabilityResponse, REVERSE_CODED, TLX_ITEMS, USABILITY_ITEMS,
};
pub use session::{interaction_rounds, session_metrics, SessionMetrics};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("item {item} = {value} outside [{lo}, {hi}]")]
    OutOfRange { item: usize, value: f64, lo: f64, hi: f64 },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("no sessions for condition {0}")]
    EmptyCondition(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
