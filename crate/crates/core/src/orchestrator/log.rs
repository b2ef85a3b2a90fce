use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::machine::AssistMode;
use super::types::{Action, AssistEvent, AssistLevel, Phase};

pub const LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Done,
    Aborted,
    /// The episode hit its time cap, or nothing else could happen.
    Cap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema_version: u32,
    pub condition: String,
    pub seed: u64,
    pub scenario_hash: String,
    pub mode: AssistMode,
    pub start_level: AssistLevel,
    pub start_time: f64,
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEvent {
    pub seq: u64,
    pub t: f64,
    pub event: AssistEvent,
    /// Phase and level after the event.
    pub phase: Phase,
    pub level: AssistLevel,
    pub actions: Vec<Action>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invalid: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEnd {
    pub t: f64,
    pub phase: Phase,
    pub level: AssistLevel,
    pub outcome: Outcome,
}

/// One line of a session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Header(LogHeader),
    Event(LogEvent),
    End(LogEnd),
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("record {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("record {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
}

fn invalid(line: usize, message: impl Into<String>) -> LogError {
    LogError::Invalid { line, message: message.into() }
}

/// A validated session log: header, events, end.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub header: LogHeader,
    pub events: Vec<LogEvent>,
    pub end: LogEnd,
}

impl SessionLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |r: LogRecord| {
            out.push_str(&serde_json::to_string(&r).expect("log records serialize"));
            out.push('\n');
        };
        push(LogRecord::Header(self.header.clone()));
        for e in &self.events {
            push(LogRecord::Event(e.clone()));
        }
        push(LogRecord::End(self.end.clone()));
        out
    }

    /// Parses and validates. Line numbers in errors are 1-based.
    pub fn from_jsonl(text: &str) -> Result<Self, LogError> {
        let mut header = None;
        let mut events: Vec<LogEvent> = Vec::new();
        let mut end = None;
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            if raw.trim().is_empty() {
                continue;
            }
            let rec: LogRecord = serde_json::from_str(raw).map_err(|source| LogError::Json { line, source })?;
            if end.is_some() {
                return Err(invalid(line, "record after end"));
            }
            match rec {
                LogRecord::Header(h) => {
                    if header.is_some() || !events.is_empty() {
                        return Err(invalid(line, "header must be the first record"));
                    }
                    if h.schema_version != LOG_SCHEMA_VERSION {
                        return Err(invalid(line, format!("unsupported schema version {}", h.schema_version)));
                    }
                    header = Some(h);
                }
                LogRecord::Event(e) => {
                    let Some(h) = &header else {
                        return Err(invalid(line, "event before header"));
                    };
                    if !e.t.is_finite() || e.t < h.start_time {
                        return Err(invalid(line, format!("event time {} before start {}", e.t, h.start_time)));
                    }
                    if let Some(prev) = events.last() {
                        if e.seq <= prev.seq {
                            return Err(invalid(line, format!("seq {} not after {}", e.seq, prev.seq)));
                        }
                        if e.t < prev.t {
                            return Err(invalid(line, format!("time {} decreases from {}", e.t, prev.t)));
                        }
                    }
                    events.push(e);
                }
                LogRecord::End(x) => {
                    if header.is_none() {
                        return Err(invalid(line, "end before header"));
                    }
                    if events.last().is_some_and(|p| x.t < p.t) {
                        return Err(invalid(line, format!("end time {} before last event", x.t)));
                    }
                    end = Some(x);
                }
            }
        }
        let header = header.ok_or_else(|| invalid(1, "missing header"))?;
        let end = end.ok_or_else(|| invalid(last_line + 1, "missing end record"))?;
        Ok(Self { header, events, end })
    }

    pub fn level_trace(&self) -> Vec<AssistLevel> {
        let mut trace = vec![self.header.start_level];
        for e in &self.events {
            if trace.last() != Some(&e.level) {
                trace.push(e.level);
            }
        }
        trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SessionLog {
        SessionLog {
            header: LogHeader {
                schema_version: LOG_SCHEMA_VERSION,
                condition: "B".into(),
                seed: 7,
                scenario_hash: "ab".into(),
                mode: AssistMode::Active,
                start_level: AssistLevel::L1,
                start_time: 0.0,
                cap: 600.0,
            },
            events: vec![
                LogEvent {
                    seq: 0,
                    t: 0.0,
                    event: AssistEvent::ScheduleDue,
                    phase: Phase::Reminding,
                    level: AssistLevel::L1,
                    actions: vec![Action::Speak { text: "hi".into() }],
                    invalid: None,
                },
                LogEvent {
                    seq: 1,
                    t: 20.0,
                    event: AssistEvent::Timeout { phase: Phase::Reminding },
                    phase: Phase::Reminding,
                    level: AssistLevel::L2,
                    actions: vec![],
                    invalid: None,
                },
            ],
            end: LogEnd { t: 20.0, phase: Phase::Reminding, level: AssistLevel::L2, outcome: Outcome::Cap },
        }
    }

    #[test]
    fn round_trip() {
        let log = sample();
        let text = log.to_jsonl();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(SessionLog::from_jsonl(&text).unwrap(), log);
        assert_eq!(log.level_trace(), vec![AssistLevel::L1, AssistLevel::L2]);
    }

    #[test]
    fn decreasing_time_names_record() {
        let mut log = sample();
        log.events[1].t = -1.0;
        log.events[0].t = 5.0;
        log.end.t = 5.0;
        let err = SessionLog::from_jsonl(&log.to_jsonl()).unwrap_err();
        assert!(err.to_string().starts_with("record 3:"), "{err}");
    }

    #[test]
    fn missing_end_rejected() {
        let text = sample().to_jsonl();
        let cut: Vec<&str> = text.lines().take(3).collect();
        assert!(SessionLog::from_jsonl(&cut.join("\n")).is_err());
    }

    #[test]
    fn garbage_names_line() {
        let mut text = sample().to_jsonl();
        text.push_str("{not json}\n");
        let err = SessionLog::from_jsonl(&text).unwrap_err();
        assert!(matches!(err, LogError::Json { line: 5, .. }));
    }
}
