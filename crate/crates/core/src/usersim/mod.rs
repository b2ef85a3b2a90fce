//! Simulated participants: prompt responses, search times and gaze.

mod behavior;
mod gaze;
mod profile;

pub use behavior::{respond, sample_latency, search_behavior, PromptKind, Reply, SearchMode, TimedReply};
pub use gaze::{
    detect_confusion, first_bottle_fixation, gaze_stream, read_gaze_csv, sample_time, write_gaze_csv, Aoi,
    ConfusionEvent, GazeConfig, GazeSample, Timeline, GAZE_DT, GAZE_RATE_HZ,
};
pub use profile::{Preset, SearchModel, UserProfile};

#[derive(Debug, thiserror::Error)]
pub enum UserSimError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("gaze stream not strictly increasing at sample {index}")]
    UnorderedStream { index: usize },
    #[error("gaze csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
