use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::geometry::{LocalizationConfig, Vec3};
use crate::navigation::{build_costmap, Costmap, InflationParams, SearchConfig};
use crate::orchestrator::{AssistLevel, AssistMode, EpisodeConfig, OrchestratorConfig};
use crate::rng::{SimRng, Stream};
use crate::usersim::{GazeConfig, Preset, UserProfile};
use crate::worldsim::{
    Cell, DepthCamera, DetectorModel, ObjectKind, OccupancyGrid, RegionOfInterest, RobotState, Scene, SceneObject, Shape,
};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

/// A table or shelf. It blocks the planner but is not rendered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Furniture {
    pub label: String,
    pub center: [f64; 2],
    pub size: [f64; 2],
    pub height: f64,
}

/// The pill bottle goes into one slot per seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub bottle: Shape,
    /// Candidate bottle centers.
    pub slots: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Preset(Preset),
    Custom(UserProfile),
}

impl ProfileSpec {
    pub fn resolve(&self) -> UserProfile {
        match self {
            ProfileSpec::Preset(p) => p.profile(),
            ProfileSpec::Custom(u) => u.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub mode: AssistMode,
    pub start_level: AssistLevel,
}

fn default_intent_latency() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    /// ASCII map, relative to the scenario file.
    pub map: PathBuf,
    pub camera: DepthCamera,
    pub robot_start: Pose,
    pub rois: Vec<RegionOfInterest>,
    #[serde(default)]
    pub furniture: Vec<Furniture>,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
    #[serde(default)]
    pub placement: Option<Placement>,
    #[serde(default)]
    pub detector: DetectorModel,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub inflation: InflationParams,
    #[serde(default)]
    pub localization: LocalizationConfig,
    pub profile: ProfileSpec,
    #[serde(default)]
    pub gaze: GazeConfig,
    #[serde(default)]
    pub orchestrator: OrchestratorConfig,
    pub conditions: BTreeMap<String, ConditionSpec>,
    #[serde(default)]
    pub episode: EpisodeConfig,
    #[serde(default = "default_intent_latency")]
    pub intent_latency: f64,
    /// Seeds used by `batch` when no count is given.
    #[serde(default)]
    pub seeds: Vec<u64>,
}

/// A parsed, validated scenario with its map and planning costmap.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub path: PathBuf,
    pub grid: OccupancyGrid,
    /// Map plus furniture footprints.
    pub costmap: Costmap,
    pub hash: String,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::ScenarioInvalid(msg.into())
}

/// Stamps furniture footprints into a copy of the grid.
fn planning_grid(grid: &OccupancyGrid, furniture: &[Furniture]) -> OccupancyGrid {
    let mut g = grid.clone();
    for f in furniture {
        let (x0, x1) = (f.center[0] - f.size[0] / 2.0, f.center[0] + f.size[0] / 2.0);
        let (y0, y1) = (f.center[1] - f.size[1] / 2.0, f.center[1] + f.size[1] / 2.0);
        for j in 0..g.height() {
            for i in 0..g.width() {
                let (cx, cy) = g.cell_center(i, j);
                if (x0..=x1).contains(&cx) && (y0..=y1).contains(&cy) {
                    g.set(i, j, Cell::Occupied);
                }
            }
        }
    }
    g
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_owned(), source: e })?;
        let config: ScenarioConfig =
            serde_json::from_str(&text).map_err(|e| CliError::ScenarioParse { path: path.to_owned(), source: e })?;
        Self::from_config(config, path)
    }

    /// `path` locates the scenario file; the map is resolved next to it.
    pub fn from_config(config: ScenarioConfig, path: &Path) -> Result<Self, CliError> {
        if config.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version {} unsupported, expected {SCENARIO_SCHEMA_VERSION}",
                config.schema_version
            )));
        }
        let map_path = path.parent().unwrap_or(Path::new(".")).join(&config.map);
        let map_text =
            std::fs::read_to_string(&map_path).map_err(|e| CliError::Io { path: map_path.clone(), source: e })?;
        let grid = OccupancyGrid::parse_ascii(&map_text).map_err(|e| CliError::Map { path: map_path.clone(), source: e })?;
        let costmap = build_costmap(&planning_grid(&grid, &config.furniture), config.inflation);

        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&config).expect("config serializes"));
        h.update(b"\n");
        h.update(map_text.as_bytes());
        h.update(b"\n");
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        let hash = hex::encode(h.finalize());

        let s = Self { config, path: path.to_owned(), grid, costmap, hash };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        let c = &self.config;
        c.camera.intrinsics.validate().map_err(|e| invalid(format!("camera: {e}")))?;
        c.detector.validate().map_err(|e| invalid(e.to_string()))?;
        c.search.nav.dwa.validate().map_err(|e| invalid(format!("search: {e}")))?;
        c.profile.resolve().validate().map_err(|e| invalid(e.to_string()))?;
        c.gaze.validate().map_err(|e| invalid(e.to_string()))?;
        if c.rois.is_empty() {
            return Err(invalid("at least one ROI is required"));
        }
        for r in &c.rois {
            if self.costmap.blocked_at(r.x, r.y) {
                return Err(invalid(format!("ROI {} at ({}, {}) is blocked or off the map", r.id, r.x, r.y)));
            }
        }
        let s = c.robot_start;
        if self.costmap.blocked_at(s.x, s.y) {
            return Err(invalid(format!("robot start ({}, {}) is blocked or off the map", s.x, s.y)));
        }
        if c.conditions.is_empty() {
            return Err(invalid("at least one condition is required"));
        }
        if !(c.episode.cap > 0.0 && c.episode.cap.is_finite()) {
            return Err(invalid(format!("episode cap must be positive, got {}", c.episode.cap)));
        }
        if !(c.intent_latency >= 0.0) {
            return Err(invalid("intent_latency must be non-negative"));
        }
        if !c.orchestrator.roi_labels.is_empty() && c.orchestrator.roi_labels.len() != c.rois.len() {
            return Err(invalid("orchestrator.roi_labels must match the ROI list"));
        }
        match &c.placement {
            Some(p) if p.slots.is_empty() => return Err(invalid("placement needs at least one slot")),
            Some(_) if c.objects.iter().any(|o| o.kind == ObjectKind::PillBottle) => {
                return Err(invalid("fixed objects may not include a pill bottle when placement is given"))
            }
            _ => {}
        }
        self.scene(0)?;
        Ok(())
    }

    /// The scene for one seed, with the bottle placed.
    pub fn scene(&self, seed: u64) -> Result<Scene, CliError> {
        let c = &self.config;
        let mut objects = c.objects.clone();
        if let Some(p) = &c.placement {
            let k = SimRng::new(seed, Stream::Placement).index(p.slots.len());
            let [x, y, z] = p.slots[k];
            objects.push(SceneObject { kind: ObjectKind::PillBottle, position: Vec3::new(x, y, z), shape: p.bottle });
        }
        let scene = Scene::new(self.grid.clone(), c.rois.clone(), objects);
        scene.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(scene)
    }

    pub fn condition_names(&self) -> Vec<String> {
        self.config.conditions.keys().cloned().collect()
    }

    /// Orchestrator settings for a condition.
    pub fn orchestrator(&self, condition: &str) -> Result<OrchestratorConfig, CliError> {
        let spec = self.config.conditions.get(condition).ok_or_else(|| CliError::UnknownCondition {
            name: condition.to_owned(),
            known: self.condition_names(),
        })?;
        let mut o = self.config.orchestrator.clone();
        o.mode = spec.mode;
        o.start_level = spec.start_level;
        if o.roi_labels.is_empty() {
            o.roi_labels = self.config.rois.iter().map(|r| r.label.clone()).collect();
        }
        Ok(o)
    }

    pub fn robot_start(&self) -> RobotState {
        let p = self.config.robot_start;
        RobotState::at(p.x, p.y, p.heading)
    }
}
