//! JSON scenario files.
//!
//! Every section is optional; omitted sections take the defaults of the
//! five-device reference scenario. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "seed": 42,
//!   "output_dir": "results",
//!   "profiles": [{ "id": 0, "cpu_freq": 1e9, "eff_capacitance": 1e-28,
//!                  "cycles_per_sample": 1e6, "data_size": 120,
//!                  "comm_time_norm": 0.2, "weight_energy": 1.0,
//!                  "weight_time": 1.0, "cost_sensitivity": 1.0 }],
//!   "game": { "law": { "nu": 10, "a": 1, "theta_min": 0.01, "theta_max": 0.99 },
//!             "reward_min": 0, "reward_max": 10, "beta": 40, "kappa_acc": 10,
//!             "follower_tol": 1e-6, "leader_grid": 256, "max_interaction_rounds": 20 },
//!   "training": { "aggregator": { "kind": "fed_avg" }, "eps_global": 0.01,
//!                 "max_rounds": 500, "time_scale": 1.0,
//!                 "solver": { "l2_reg": 0.01, "max_local_iters": 2000 } },
//!   "partition": { "mode": "iid", "seed": null },
//!   "dataset": { "synthetic": { "classes": 3, "dim": 10, "samples": 600, "separation": 3.0 } },
//!   "sweeps": { "reward": [0.0, 0.5, 1.0], "commtime": [0.1, 0.5, 1.0],
//!               "commtime_ue": 2, "commtime_reward": 5.0, "theta": [0.1, 0.5, 0.9] }
//! }
//! ```
//!
//! `dataset` may instead be `{ "idx": { "images": "...", "labels": "...",
//! "data_dir": "..." } }`; relative paths resolve against `data_dir`, or
//! `FEDBARGAIN_DATA_DIR` when `data_dir` is absent.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::cost::{CostError, UeProfile};
use crate::data::{resolve_data_dir, PartitionMode, PartitionSpec};
use crate::fl::TrainConfig;
use crate::game::search::linspace;
use crate::game::{default_profiles, GameConfig};

/// Reward points in the default reward sweep.
pub const DEFAULT_REWARD_POINTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub profiles: Vec<UeProfile>,
    pub game: GameConfig,
    pub training: TrainConfig,
    pub partition: PartitionConfig,
    pub dataset: DatasetSource,
    pub sweeps: SweepConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            output_dir: PathBuf::from("results"),
            profiles: default_profiles(),
            game: GameConfig::default(),
            training: TrainConfig::default(),
            partition: PartitionConfig::default(),
            dataset: DatasetSource::default(),
            sweeps: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionConfig {
    pub mode: PartitionMode,
    /// Partition seed; the master seed when absent.
    pub seed: Option<u64>,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            mode: PartitionMode::Iid,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic(SyntheticParams),
    Idx(IdxPaths),
}

impl Default for DatasetSource {
    fn default() -> Self {
        Self::Synthetic(SyntheticParams::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticParams {
    pub classes: usize,
    pub dim: usize,
    pub samples: usize,
    pub separation: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            classes: 3,
            dim: 10,
            samples: 600,
            separation: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdxPaths {
    pub images: PathBuf,
    pub labels: PathBuf,
    #[serde(default)]
    pub data_dir: Option<PathBuf>,
}

impl IdxPaths {
    /// Image and label paths with relative entries joined onto the data directory.
    pub fn resolved(&self) -> (PathBuf, PathBuf) {
        let dir = resolve_data_dir(self.data_dir.clone());
        let join = |p: &Path| match &dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        };
        (join(&self.images), join(&self.labels))
    }
}

/// Value grids for the three sweeps. Empty grids are filled with defaults
/// derived from the rest of the configuration when the file is loaded.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub reward: Option<Vec<f64>>,
    pub commtime: Option<Vec<f64>>,
    pub commtime_ue: Option<u32>,
    pub commtime_reward: Option<f64>,
    pub theta: Option<Vec<f64>>,
}

impl ScenarioConfig {
    pub fn reward_grid(&self) -> &[f64] {
        self.sweeps.reward.as_deref().unwrap_or_default()
    }

    pub fn commtime_grid(&self) -> &[f64] {
        self.sweeps.commtime.as_deref().unwrap_or_default()
    }

    pub fn theta_grid(&self) -> &[f64] {
        self.sweeps.theta.as_deref().unwrap_or_default()
    }

    pub fn partition_spec(&self) -> PartitionSpec {
        PartitionSpec {
            mode: self.partition.mode,
            num_clients: self.profiles.len(),
            seed: self.partition.seed.unwrap_or(self.seed),
        }
    }

    /// Replaces absent sweep settings with defaults derived from the game.
    pub fn fill_defaults(&mut self) {
        let g = &self.game;
        let law = &g.law;
        let s = &mut self.sweeps;
        s.reward
            .get_or_insert_with(|| linspace(g.reward_min, g.reward_max, DEFAULT_REWARD_POINTS));
        s.commtime
            .get_or_insert_with(|| (1..=10).map(|i| i as f64 / 10.0).collect());
        if s.commtime_ue.is_none() {
            let middle = self.profiles.get(self.profiles.len() / 2);
            s.commtime_ue = middle.map(|p| p.id);
        }
        s.commtime_reward
            .get_or_insert(g.reward_min + 0.5 * (g.reward_max - g.reward_min));
        s.theta
            .get_or_insert_with(|| linspace(law.theta_min, law.theta_max, 50));
    }

    /// Checks every invariant, reporting the first violation with its key path.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let invalid = |path: String, message: String| Err(HarnessError::Validation { path, message });

        if self.profiles.is_empty() {
            return invalid("profiles".into(), "at least one profile is required".into());
        }
        let mut ids = HashSet::new();
        for (i, p) in self.profiles.iter().enumerate() {
            if let Err(CostError::Domain { what, value, range }) = p.validate() {
                return invalid(format!("profiles[{i}].{what}"), format!("{value} is outside {range}"));
            }
            if !ids.insert(p.id) {
                return invalid(format!("profiles[{i}].id"), format!("duplicate id {}", p.id));
            }
        }
        if let Err(e) = self.game.validate() {
            return invalid("game".into(), e.to_string());
        }
        if let Err(e) = self.training.validate() {
            return invalid("training".into(), e.to_string());
        }
        if let PartitionMode::Dirichlet { alpha } = self.partition.mode {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return invalid("partition.mode.dirichlet.alpha".into(), format!("{alpha} must be > 0"));
            }
        }
        if let DatasetSource::Synthetic(s) = &self.dataset {
            if s.classes < 2 || s.dim == 0 || s.samples < s.classes.max(self.profiles.len()) {
                return invalid(
                    "dataset.synthetic".into(),
                    "need classes >= 2, dim >= 1 and samples >= max(classes, number of profiles)".into(),
                );
            }
            if !(s.separation >= 0.0 && s.separation.is_finite()) {
                return invalid("dataset.synthetic.separation".into(), "must be finite and >= 0".into());
            }
        }

        let g = &self.game;
        let law = &g.law;
        check_grid("sweeps.reward", self.sweeps.reward.as_deref(), |r| r >= g.reward_min && r <= g.reward_max)?;
        check_grid("sweeps.commtime", self.sweeps.commtime.as_deref(), |t| t > 0.0 && t <= 1.0)?;
        check_grid("sweeps.theta", self.sweeps.theta.as_deref(), |t| t >= law.theta_min && t <= law.theta_max)?;
        match self.sweeps.commtime_ue {
            Some(id) if self.profiles.iter().any(|p| p.id == id) => {}
            Some(id) => return invalid("sweeps.commtime_ue".into(), format!("no profile with id {id}")),
            None => return invalid("sweeps.commtime_ue".into(), "missing".into()),
        }
        match self.sweeps.commtime_reward {
            Some(r) if r >= g.reward_min && r <= g.reward_max => {}
            other => {
                return invalid(
                    "sweeps.commtime_reward".into(),
                    format!("{other:?} outside [{}, {}]", g.reward_min, g.reward_max),
                )
            }
        }
        Ok(())
    }

    /// SHA-256 of the resolved configuration, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        let canonical = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

fn check_grid(path: &str, grid: Option<&[f64]>, ok: impl Fn(f64) -> bool) -> Result<(), HarnessError> {
    let grid = grid.unwrap_or_default();
    if grid.is_empty() {
        return Err(HarnessError::Validation {
            path: path.into(),
            message: "grid must be non-empty".into(),
        });
    }
    match grid.iter().position(|&v| !(v.is_finite() && ok(v))) {
        Some(i) => Err(HarnessError::Validation {
            path: format!("{path}[{i}]"),
            message: format!("{} is outside the model bounds", grid[i]),
        }),
        None => Ok(()),
    }
}

/// Parses a scenario from JSON text, fills defaults and validates it.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, HarnessError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| HarnessError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, fills and validates a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, HarnessError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// The reference scenario with defaults filled.
pub fn default_scenario() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.fill_defaults();
    cfg
}
