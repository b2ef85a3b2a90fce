use serde::{Deserialize, Serialize};

use super::UserSimError;

/// Search-time model, seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchModel {
    /// Unaided search time for a fully oriented user.
    pub base: f64,
    /// Slowdown per unit of disorientation.
    pub disorientation_gain: f64,
    /// Log-scale spread of unaided search.
    pub sigma: f64,
    /// Time to fixate the bottle once the robot points at it.
    pub guided_baseline: f64,
    pub guided_sd: f64,
}

impl Default for SearchModel {
    fn default() -> Self {
        Self { base: 40.0, disorientation_gain: 1.5, sigma: 0.3, guided_baseline: 4.0, guided_sd: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UserProfile {
    pub name: String,
    /// Probability of ignoring a reminder.
    pub forgetfulness: f64,
    /// Scales unaided search time.
    pub disorientation: f64,
    /// Probability a guidance step fails.
    pub step_difficulty: f64,
    pub compliance: f64,
    pub latency_mean: f64,
    pub latency_sd: f64,
    /// Delay between finishing an action and confirming it aloud.
    pub confirm_delay: f64,
    /// Probability a failed response is an outright refusal.
    pub refusal_rate: f64,
    /// While searching without help, seconds between help requests.
    pub help_interval: f64,
    pub max_help_requests: u32,
    pub search: SearchModel,
}

impl Default for UserProfile {
    fn default() -> Self {
        Preset::Healthy.profile()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Healthy,
    Forgets,
    Misplaces,
    NeedsStepByStep,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Healthy, Preset::Forgets, Preset::Misplaces, Preset::NeedsStepByStep];

    pub fn profile(self) -> UserProfile {
        let base = UserProfile {
            name: String::new(),
            forgetfulness: 0.05,
            disorientation: 0.1,
            step_difficulty: 0.02,
            compliance: 0.98,
            latency_mean: 2.0,
            latency_sd: 0.5,
            confirm_delay: 1.0,
            refusal_rate: 0.0,
            help_interval: 25.0,
            max_help_requests: 3,
            search: SearchModel::default(),
        };
        match self {
            Preset::Healthy => UserProfile { name: "healthy".into(), ..base },
            Preset::Forgets => UserProfile {
                name: "forgets".into(),
                forgetfulness: 0.5,
                disorientation: 0.2,
                step_difficulty: 0.05,
                compliance: 0.95,
                latency_mean: 3.0,
                latency_sd: 1.0,
                ..base
            },
            Preset::Misplaces => UserProfile {
                name: "misplaces".into(),
                forgetfulness: 0.1,
                disorientation: 0.8,
                step_difficulty: 0.05,
                compliance: 0.95,
                latency_mean: 3.0,
                latency_sd: 1.0,
                ..base
            },
            Preset::NeedsStepByStep => UserProfile {
                name: "needs_step_by_step".into(),
                forgetfulness: 0.3,
                disorientation: 0.5,
                step_difficulty: 0.3,
                compliance: 0.9,
                latency_mean: 4.0,
                latency_sd: 1.5,
                refusal_rate: 0.05,
                ..base
            },
        }
    }
}

impl UserProfile {
    pub fn validate(&self) -> Result<(), UserSimError> {
        let probs = [
            ("forgetfulness", self.forgetfulness),
            ("disorientation", self.disorientation),
            ("step_difficulty", self.step_difficulty),
            ("compliance", self.compliance),
            ("refusal_rate", self.refusal_rate),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(UserSimError::InvalidProfile(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        let positive = [
            ("latency_mean", self.latency_mean),
            ("help_interval", self.help_interval),
            ("search.base", self.search.base),
            ("search.guided_baseline", self.search.guided_baseline),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(UserSimError::InvalidProfile(format!("{name} must be positive, got {x}")));
            }
        }
        let nonneg = [
            ("latency_sd", self.latency_sd),
            ("confirm_delay", self.confirm_delay),
            ("search.sigma", self.search.sigma),
            ("search.guided_sd", self.search.guided_sd),
            ("search.disorientation_gain", self.search.disorientation_gain),
        ];
        for (name, x) in nonneg {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(UserSimError::InvalidProfile(format!("{name} must be non-negative, got {x}")));
            }
        }
        Ok(())
    }
}
