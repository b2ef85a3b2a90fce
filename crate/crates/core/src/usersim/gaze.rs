use std::io::Write;

use serde::{Deserialize, Serialize};

use super::profile::UserProfile;
use super::UserSimError;
use crate::rng::SimRng;

pub const GAZE_RATE_HZ: f64 = 180.0;
pub const GAZE_DT: f64 = 1.0 / GAZE_RATE_HZ;
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Aoi {
    Bottle,
    Robot,
    #[serde(rename = "TabletUI")]
    TabletUi,
    Elsewhere,
}

impl Aoi {
    /// AOIs the user must act on; long idle fixations on these count as confusion.
    pub fn is_task(self) -> bool {
        matches!(self, Aoi::Bottle | Aoi::TabletUi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub timestamp: f64,
    pub aoi: Aoi,
    pub is_fixation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionEvent {
    pub start: f64,
    pub end: f64,
    pub aoi: Aoi,
    pub acted: bool,
}

impl ConfusionEvent {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Gaze synthesis settings. The confusion rule (one task-AOI fixation of at
/// least `confusion_threshold` with no user action inside it) is a placeholder
/// until a validated rule is available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GazeConfig {
    /// Minimum idle fixation counted as confusion, seconds.
    pub confusion_threshold: f64,
    /// Inserted confusion runs last threshold + U(lo, hi).
    pub confusion_extra: (f64, f64),
    /// Natural fixation duration range, seconds. Must stay below the threshold.
    pub fixation: (f64, f64),
    /// Saccade length range in samples.
    pub saccade_samples: (usize, usize),
    /// After a robot prompt the user looks at the robot or tablet for this long.
    pub prompt_attention: f64,
}

impl Default for GazeConfig {
    fn default() -> Self {
        Self {
            confusion_threshold: 3.0,
            confusion_extra: (0.2, 2.0),
            fixation: (0.2, 1.5),
            saccade_samples: (2, 6),
            prompt_attention: 2.0,
        }
    }
}

impl GazeConfig {
    pub fn validate(&self) -> Result<(), UserSimError> {
        let ok = self.confusion_threshold > 0.0
            && 0.0 <= self.confusion_extra.0
            && self.confusion_extra.0 <= self.confusion_extra.1
            && GAZE_DT <= self.fixation.0
            && self.fixation.0 <= self.fixation.1
            && self.fixation.1 < self.confusion_threshold
            && 1 <= self.saccade_samples.0
            && self.saccade_samples.0 <= self.saccade_samples.1
            && self.prompt_attention >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(UserSimError::InvalidProfile("gaze config out of range".into()))
        }
    }
}

/// What happened during an episode, as seen by the gaze model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub duration: f64,
    /// First moment the user can see the bottle; `None` if never.
    pub locate_time: Option<f64>,
    /// Times the robot spoke.
    pub prompts: Vec<f64>,
    /// Intervals where the robot points at the bottle.
    pub pointing: Vec<(f64, f64)>,
    /// Times of user actions.
    pub actions: Vec<f64>,
}

pub fn sample_time(k: usize) -> f64 {
    k as f64 / GAZE_RATE_HZ
}

fn sample_count(duration: f64) -> usize {
    if duration <= 0.0 {
        0
    } else {
        (duration * GAZE_RATE_HZ - TIME_EPS).ceil() as usize
    }
}

fn first_index_at_or_after(t: f64) -> usize {
    (t * GAZE_RATE_HZ - TIME_EPS).ceil().max(0.0) as usize
}

fn pick(weights: &[(Aoi, f64)], rng: &mut SimRng) -> Aoi {
    let total: f64 = weights.iter().map(|w| w.1).sum();
    let mut u = rng.uniform() * total;
    for &(aoi, w) in weights {
        if u < w {
            return aoi;
        }
        u -= w;
    }
    weights[weights.len() - 1].0
}

fn choose_aoi(tl: &Timeline, cfg: &GazeConfig, t: f64, located: bool, rng: &mut SimRng) -> Aoi {
    let pointing = tl.pointing.iter().any(|&(a, b)| a <= t && t < b);
    let prompted = tl.prompts.iter().any(|&p| p <= t && t < p + cfg.prompt_attention);
    if located {
        if pointing {
            pick(&[(Aoi::Bottle, 0.8), (Aoi::Robot, 0.2)], rng)
        } else if prompted {
            pick(&[(Aoi::Robot, 0.5), (Aoi::TabletUi, 0.3), (Aoi::Bottle, 0.2)], rng)
        } else {
            pick(&[(Aoi::Bottle, 0.5), (Aoi::Robot, 0.2), (Aoi::TabletUi, 0.15), (Aoi::Elsewhere, 0.15)], rng)
        }
    } else if pointing {
        pick(&[(Aoi::Robot, 0.7), (Aoi::Elsewhere, 0.3)], rng)
    } else if prompted {
        pick(&[(Aoi::Robot, 0.6), (Aoi::TabletUi, 0.4)], rng)
    } else {
        pick(&[(Aoi::Elsewhere, 0.6), (Aoi::TabletUi, 0.2), (Aoi::Robot, 0.2)], rng)
    }
}

fn fill(
    out: &mut [Option<(Aoi, bool)>],
    range: std::ops::Range<usize>,
    tl: &Timeline,
    cfg: &GazeConfig,
    located: bool,
    rng: &mut SimRng,
) {
    let mut k = range.start;
    let mut first = true;
    while k < range.end {
        let aoi = if first && located { Aoi::Bottle } else { choose_aoi(tl, cfg, sample_time(k), located, rng) };
        first = false;
        let len = ((rng.uniform_range(cfg.fixation.0, cfg.fixation.1) * GAZE_RATE_HZ) as usize).max(1);
        let end = (k + len).min(range.end);
        for slot in &mut out[k..end] {
            *slot = Some((aoi, true));
        }
        k = end;
        let sacc = cfg.saccade_samples.0 + rng.index(cfg.saccade_samples.1 - cfg.saccade_samples.0 + 1);
        let end = (k + sacc).min(range.end);
        for slot in &mut out[k..end] {
            *slot = Some((Aoi::Elsewhere, false));
        }
        k = end;
    }
}

/// Synthesizes a 180 Hz gaze stream for an episode and inserts confusion runs.
///
/// Before `locate_time` the bottle is never fixated; the first bottle fixation
/// starts at the first sample at or after it. In each action-free gap after
/// that, a confusion run is inserted with probability `step_difficulty`.
/// Returns the stream and the inserted events.
pub fn gaze_stream(
    tl: &Timeline,
    profile: &UserProfile,
    cfg: &GazeConfig,
    rng: &mut SimRng,
) -> (Vec<GazeSample>, Vec<ConfusionEvent>) {
    let n = sample_count(tl.duration);
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut slots: Vec<Option<(Aoi, bool)>> = vec![None; n];
    let k_loc = tl.locate_time.map(first_index_at_or_after).unwrap_or(n).min(n);
    fill(&mut slots, 0..k_loc, tl, cfg, false, rng);
    fill(&mut slots, k_loc..n, tl, cfg, true, rng);

    let mut inserted = Vec::new();
    if k_loc < n {
        let mut actions: Vec<f64> = tl.actions.clone();
        actions.sort_by(f64::total_cmp);
        let mut bounds = vec![sample_time(k_loc)];
        bounds.extend(actions.iter().copied().filter(|&a| a > sample_time(k_loc) && a < tl.duration));
        bounds.push(tl.duration);
        // Keep a margin of a few samples so the run stays inside the gap and stays maximal.
        let margin = 0.5;
        let pad = cfg.saccade_samples.0.max(2);
        for w in bounds.windows(2) {
            let len_extra = rng.uniform_range(cfg.confusion_extra.0, cfg.confusion_extra.1);
            let u_start = rng.uniform();
            let hit = rng.bernoulli(profile.step_difficulty);
            let run = cfg.confusion_threshold + len_extra;
            let room = w[1] - w[0] - 2.0 * margin - run;
            if !hit || room <= 0.0 {
                continue;
            }
            let start = w[0] + margin + u_start * room;
            let k0 = first_index_at_or_after(start);
            let len = (run * GAZE_RATE_HZ).ceil() as usize;
            let k1 = k0 + len;
            if k0 < pad || k1 + pad > n {
                continue;
            }
            // An action exactly on the boundary must not fall inside the run.
            if actions.iter().any(|&a| sample_time(k0) - TIME_EPS <= a && a < sample_time(k1) + TIME_EPS) {
                continue;
            }
            for slot in &mut slots[k0 - pad..k0] {
                *slot = Some((Aoi::Elsewhere, false));
            }
            for slot in &mut slots[k0..k1] {
                *slot = Some((Aoi::Bottle, true));
            }
            for slot in &mut slots[k1..k1 + pad] {
                *slot = Some((Aoi::Elsewhere, false));
            }
            inserted.push(ConfusionEvent { start: sample_time(k0), end: sample_time(k1 - 1) + GAZE_DT, aoi: Aoi::Bottle, acted: false });
        }
    }

    let stream = slots
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            let (aoi, is_fixation) = s.expect("every sample filled");
            GazeSample { timestamp: sample_time(k), aoi, is_fixation }
        })
        .collect();
    (stream, inserted)
}

/// Maximal fixation runs on one task AOI lasting at least `threshold` with no
/// action inside `[start, end)`. A run ends one sample period after its last sample.
pub fn detect_confusion(
    stream: &[GazeSample],
    actions: &[f64],
    threshold: f64,
) -> Result<Vec<ConfusionEvent>, UserSimError> {
    for (i, w) in stream.windows(2).enumerate() {
        if !(w[1].timestamp > w[0].timestamp) {
            return Err(UserSimError::UnorderedStream { index: i + 1 });
        }
    }
    let mut events = Vec::new();
    let mut i = 0;
    while i < stream.len() {
        let s = stream[i];
        if !(s.is_fixation && s.aoi.is_task()) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < stream.len() && stream[j + 1].is_fixation && stream[j + 1].aoi == s.aoi {
            j += 1;
        }
        let start = s.timestamp;
        let end = stream[j].timestamp + GAZE_DT;
        if end - start >= threshold - TIME_EPS && !actions.iter().any(|&a| start <= a && a < end) {
            events.push(ConfusionEvent { start, end, aoi: s.aoi, acted: false });
        }
        i = j + 1;
    }
    Ok(events)
}

/// The first fixation on the bottle, if any.
pub fn first_bottle_fixation(stream: &[GazeSample]) -> Option<f64> {
    stream.iter().find(|s| s.is_fixation && s.aoi == Aoi::Bottle).map(|s| s.timestamp)
}

pub fn write_gaze_csv<W: Write>(w: W, stream: &[GazeSample]) -> Result<(), UserSimError> {
    let mut wr = csv::Writer::from_writer(w);
    for s in stream {
        wr.serialize(s)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_gaze_csv<R: std::io::Read>(r: R) -> Result<Vec<GazeSample>, UserSimError> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rd.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn run(aoi: Aoi, t0: f64, secs: f64) -> Vec<GazeSample> {
        let k0 = (t0 * GAZE_RATE_HZ).round() as usize;
        let n = (secs * GAZE_RATE_HZ).round() as usize;
        (k0..k0 + n).map(|k| GazeSample { timestamp: sample_time(k), aoi, is_fixation: true }).collect()
    }

    fn saccade(t0: f64, secs: f64) -> Vec<GazeSample> {
        run(Aoi::Elsewhere, t0, secs).into_iter().map(|s| GazeSample { is_fixation: false, ..s }).collect()
    }

    #[test]
    fn empty_timeline_empty_stream() {
        let (s, e) = gaze_stream(&Timeline::default(), &UserProfile::default(), &GazeConfig::default(), &mut SimRng::new(0, Stream::Gaze));
        assert!(s.is_empty() && e.is_empty());
    }

    #[test]
    fn one_second_is_180_samples() {
        let tl = Timeline { duration: 1.0, ..Timeline::default() };
        let (s, _) = gaze_stream(&tl, &UserProfile::default(), &GazeConfig::default(), &mut SimRng::new(0, Stream::Gaze));
        assert_eq!(s.len(), 180);
        for w in s.windows(2) {
            assert!((w[1].timestamp - w[0].timestamp - GAZE_DT).abs() < 1e-9);
        }
    }

    #[test]
    fn sub_threshold_fixation_ignored() {
        let s = run(Aoi::Bottle, 0.0, 2.9);
        assert!(detect_confusion(&s, &[], 3.0).unwrap().is_empty());
    }

    #[test]
    fn action_inside_run_suppresses() {
        let s = run(Aoi::Bottle, 0.0, 3.5);
        assert!(detect_confusion(&s, &[1.0], 3.0).unwrap().is_empty());
        assert_eq!(detect_confusion(&s, &[3.6], 3.0).unwrap().len(), 1);
    }

    #[test]
    fn two_disjoint_runs() {
        let mut s = run(Aoi::Bottle, 0.0, 4.0);
        s.extend(saccade(4.0, 0.5));
        s.extend(run(Aoi::TabletUi, 4.5, 4.0));
        let ev = detect_confusion(&s, &[], 3.0).unwrap();
        assert_eq!(ev.len(), 2);
        assert!((ev[0].start - 0.0).abs() < 1e-9 && (ev[0].end - 4.0).abs() < 1e-9);
        assert_eq!(ev[1].aoi, Aoi::TabletUi);
        assert!((ev[1].start - 4.5).abs() < 1e-9 && (ev[1].end - 8.5).abs() < 1e-9);
    }

    #[test]
    fn non_task_aoi_ignored() {
        let s = run(Aoi::Robot, 0.0, 5.0);
        assert!(detect_confusion(&s, &[], 3.0).unwrap().is_empty());
    }

    #[test]
    fn unordered_rejected() {
        let mut s = run(Aoi::Bottle, 0.0, 0.1);
        s.swap(3, 4);
        assert!(matches!(detect_confusion(&s, &[], 3.0), Err(UserSimError::UnorderedStream { index: 4 })));
    }

    #[test]
    fn no_bottle_before_locate() {
        let tl = Timeline { duration: 60.0, locate_time: Some(20.003), prompts: vec![0.0, 10.0], ..Timeline::default() };
        let (s, _) = gaze_stream(&tl, &UserProfile::default(), &GazeConfig::default(), &mut SimRng::new(4, Stream::Gaze));
        let first = first_bottle_fixation(&s).unwrap();
        assert!((20.003..20.003 + GAZE_DT).contains(&first));
    }

    #[test]
    fn never_located_never_bottle() {
        let tl = Timeline { duration: 30.0, ..Timeline::default() };
        let (s, _) = gaze_stream(&tl, &UserProfile::default(), &GazeConfig::default(), &mut SimRng::new(5, Stream::Gaze));
        assert!(first_bottle_fixation(&s).is_none());
    }

    #[test]
    fn inserted_events_recovered_exactly() {
        let p = UserProfile { step_difficulty: 1.0, ..UserProfile::default() };
        for seed in 0..20 {
            let tl = Timeline {
                duration: 90.0,
                locate_time: Some(10.0),
                prompts: vec![0.0, 12.0, 30.0],
                pointing: vec![(5.0, 8.0)],
                actions: vec![25.0, 50.0, 70.0],
            };
            let (s, ins) = gaze_stream(&tl, &p, &GazeConfig::default(), &mut SimRng::new(seed, Stream::Gaze));
            assert!(!ins.is_empty());
            let det = detect_confusion(&s, &tl.actions, 3.0).unwrap();
            assert_eq!(det, ins, "seed {seed}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut s = run(Aoi::TabletUi, 0.0, 0.05);
        s.extend(saccade(0.05, 0.02));
        let mut buf = Vec::new();
        write_gaze_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("timestamp,aoi,is_fixation\n0.0,TabletUI,true\n"), "{text}");
        assert_eq!(read_gaze_csv(buf.as_slice()).unwrap(), s);
    }
}
