use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::questionnaire::{
    raw_tlx, usability_alpha, usability_composite, TlxResponse, UsabilityResponse, TLX_ITEMS, USABILITY_ITEMS,
};
use super::session::SessionMetrics;
use super::MetricsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    /// Student-t 95 % interval on the mean; `None` when n < 2.
    pub ci95: Option<(f64, f64)>,
}

/// Linear-interpolation quantile (type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Two-sided Student-t interval on the mean.
pub fn mean_ci(values: &[f64], level: f64) -> Option<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let m = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (nf - 1.0);
    let t = StudentsT::new(0.0, 1.0, nf - 1.0).ok()?.inverse_cdf(0.5 + level / 2.0);
    let half = t * (var / nf).sqrt();
    Some((m - half, m + half))
}

/// Summary statistics; `None` for empty input. Order of `values` does not matter.
pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&v, 0.25);
    let q3 = quantile_sorted(&v, 0.75);
    Some(Summary {
        n: v.len(),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        median: quantile_sorted(&v, 0.5),
        q1,
        q3,
        iqr: q3 - q1,
        ci95: mean_ci(&v, 0.95),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireRow {
    pub participant_id: String,
    pub condition: String,
    pub tlx: Option<TlxResponse>,
    pub usability: Option<UsabilityResponse>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub sessions: usize,
    pub completed: usize,
    pub censored: usize,
    pub time_to_locate: Summary,
    pub interaction_rounds: Summary,
    pub tlx: Option<Summary>,
    pub usability: Option<Summary>,
    pub usability_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub conditions: Vec<ConditionReport>,
    /// Alpha over every complete usability response.
    pub usability_alpha: Option<f64>,
}

/// Per-condition aggregation. `conditions` fixes the order; when empty the
/// conditions present in `sessions` are used, sorted by name.
pub fn aggregate(
    sessions: &[SessionMetrics],
    questionnaires: &[QuestionnaireRow],
    conditions: &[String],
) -> Result<MetricsReport, MetricsError> {
    let names: Vec<String> = if conditions.is_empty() {
        sessions.iter().map(|s| s.condition.clone()).collect::<BTreeSet<_>>().into_iter().collect()
    } else {
        conditions.to_vec()
    };
    if names.is_empty() {
        return Err(MetricsError::EmptyCondition("no sessions".into()));
    }
    let mut out = Vec::new();
    for name in names {
        let ss: Vec<&SessionMetrics> = sessions.iter().filter(|s| s.condition == name).collect();
        let times: Vec<f64> = ss.iter().map(|s| s.time_to_locate).collect();
        let rounds: Vec<f64> = ss.iter().map(|s| s.interaction_rounds as f64).collect();
        let (Some(time_to_locate), Some(interaction_rounds)) = (summarize(&times), summarize(&rounds)) else {
            return Err(MetricsError::EmptyCondition(name));
        };
        let qs: Vec<&QuestionnaireRow> = questionnaires.iter().filter(|q| q.condition == name).collect();
        let tlx: Vec<f64> = qs.iter().filter_map(|q| q.tlx.as_ref()).map(raw_tlx).collect::<Result<_, _>>()?;
        let us: Vec<UsabilityResponse> = qs.iter().filter_map(|q| q.usability).collect();
        let usab: Vec<f64> = us.iter().map(usability_composite).collect::<Result<_, _>>()?;
        out.push(ConditionReport {
            condition: name,
            sessions: ss.len(),
            completed: ss.iter().filter(|s| s.completed).count(),
            censored: ss.iter().filter(|s| s.censored).count(),
            time_to_locate,
            interaction_rounds,
            tlx: summarize(&tlx),
            usability: summarize(&usab),
            usability_alpha: usability_alpha(&us).ok(),
        });
    }
    let all: Vec<UsabilityResponse> = questionnaires.iter().filter_map(|q| q.usability).collect();
    Ok(MetricsReport { conditions: out, usability_alpha: usability_alpha(&all).ok() })
}

fn parse_block<const N: usize>(
    rec: &csv::StringRecord,
    cols: &[usize],
    line: u64,
) -> Result<Option<[f64; N]>, MetricsError> {
    let cells: Vec<&str> = cols.iter().map(|&c| rec.get(c).unwrap_or("").trim()).collect();
    if cells.iter().any(|c| c.is_empty()) {
        return Ok(None);
    }
    let mut out = [0.0; N];
    for (k, c) in cells.iter().enumerate() {
        out[k] = c.parse().map_err(|_| MetricsError::Parse { line, message: format!("not a number: {c:?}") })?;
    }
    Ok(Some(out))
}

fn questionnaire_header() -> Vec<String> {
    let mut h = vec!["participant_id".to_owned(), "condition".to_owned()];
    h.extend(TLX_ITEMS.iter().map(|s| s.to_string()));
    h.extend((1..=USABILITY_ITEMS).map(|k| format!("q{k}")));
    h
}

/// Reads `participant_id,condition,<six TLX items>,q1..q9`. A block with any
/// blank cell is treated as not answered.
pub fn read_questionnaires<R: Read>(r: R) -> Result<Vec<QuestionnaireRow>, MetricsError> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name)).ok_or_else(|| MetricsError::Parse {
            line: 1,
            message: format!("missing column {name}"),
        })
    };
    let want = questionnaire_header();
    let idx: Vec<usize> = want.iter().map(|n| col(n)).collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let tlx = parse_block::<6>(&rec, &idx[2..8], line)?.map(|items| TlxResponse { items });
        let usability = parse_block::<9>(&rec, &idx[8..], line)?.map(|items| UsabilityResponse { items });
        rows.push(QuestionnaireRow {
            participant_id: rec.get(idx[0]).unwrap_or("").to_owned(),
            condition: rec.get(idx[1]).unwrap_or("").to_owned(),
            tlx,
            usability,
        });
    }
    Ok(rows)
}

pub fn write_questionnaires<W: Write>(w: W, rows: &[QuestionnaireRow]) -> Result<(), MetricsError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(questionnaire_header())?;
    for q in rows {
        let mut rec = vec![q.participant_id.clone(), q.condition.clone()];
        match &q.tlx {
            Some(t) => rec.extend(t.items.iter().map(f64::to_string)),
            None => rec.extend(std::iter::repeat_n(String::new(), 6)),
        }
        match &q.usability {
            Some(u) => rec.extend(u.items.iter().map(f64::to_string)),
            None => rec.extend(std::iter::repeat_n(String::new(), USABILITY_ITEMS)),
        }
        wr.write_record(rec)?;
    }
    wr.flush()?;
    Ok(())
}

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

fn ci_cells(s: &Summary) -> [String; 2] {
    match s.ci95 {
        Some((lo, hi)) => [fmt2(lo), fmt2(hi)],
        None => ["n/a".into(), "n/a".into()],
    }
}

/// Plot-ready CSV: one row per condition and metric.
pub fn write_report_csv<W: Write>(w: W, report: &MetricsReport) -> Result<(), MetricsError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["condition", "metric", "n", "mean", "median", "q1", "q3", "iqr", "ci95_low", "ci95_high"])?;
    for c in &report.conditions {
        let rows = [
            ("tlx", c.tlx.as_ref()),
            ("usability", c.usability.as_ref()),
            ("time_to_locate", Some(&c.time_to_locate)),
            ("interaction_rounds", Some(&c.interaction_rounds)),
        ];
        for (metric, s) in rows {
            let Some(s) = s else { continue };
            let [lo, hi] = ci_cells(s);
            wr.write_record([
                c.condition.clone(),
                metric.to_owned(),
                s.n.to_string(),
                fmt2(s.mean),
                fmt2(s.median),
                fmt2(s.q1),
                fmt2(s.q3),
                fmt2(s.iqr),
                lo,
                hi,
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

fn mean_median(s: Option<&Summary>) -> String {
    s.map_or("n/a".to_owned(), |s| format!("{:.2} / {:.2}", s.mean, s.median))
}

/// Table-style text: TLX, time-to-locate and interaction rounds per condition.
pub fn summary_text(report: &MetricsReport) -> String {
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{:<10} {:>8} {:>17} {:>19} {:>21} {:>22}",
        "condition", "sessions", "completed/cens.", "TLX mean / median", "time (s) mean / median", "rounds mean / median"
    );
    for c in &report.conditions {
        let _ = writeln!(
            t,
            "{:<10} {:>8} {:>17} {:>19} {:>21} {:>22}",
            c.condition,
            c.sessions,
            format!("{}/{}", c.completed, c.censored),
            mean_median(c.tlx.as_ref()),
            mean_median(Some(&c.time_to_locate)),
            mean_median(Some(&c.interaction_rounds)),
        );
    }
    let _ = writeln!(t);
    for c in &report.conditions {
        let ci = |s: &Summary| match s.ci95 {
            Some((lo, hi)) => format!("[{lo:.2}, {hi:.2}]"),
            None => "n/a".to_owned(),
        };
        let _ = writeln!(
            t,
            "{}: time IQR {:.2}, 95% CI {}; rounds IQR {:.2}, 95% CI {}",
            c.condition,
            c.time_to_locate.iqr,
            ci(&c.time_to_locate),
            c.interaction_rounds.iqr,
            ci(&c.interaction_rounds)
        );
        if let Some(u) = &c.usability {
            let _ = writeln!(t, "{}: usability mean {:.2}, median {:.2}, 95% CI {}", c.condition, u.mean, u.median, ci(u));
        }
    }
    if let Some(a) = report.usability_alpha {
        let _ = writeln!(t, "usability alpha: {a:.3}");
    }
    t
}
