//! Scenario loading, sweeps, end-to-end runs and result files.
//!
//! | operation          | files written                          |
//! |--------------------|----------------------------------------|
//! | [`emit_reward`]    | `reward_sweep.csv`                     |
//! | [`emit_commtime`]  | `commtime_sweep.csv`                   |
//! | [`emit_leader`]    | `leader_curve.csv`, `equilibrium.json` |
//! | [`emit_run`]       | `rounds.csv`, `report.json`            |

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

pub use config::{default_scenario, load_config, parse_config, ScenarioConfig};
pub use output::{fmt_float, write_csv, write_json, CsvRecord, RunMetadata};
pub use run::{run_end_to_end, RunOptions, RunReport};
pub use sweep::{cost_tradeoff, leader_curve, sweep_commtime, sweep_reward, LeaderCurve, SweepResult};

use crate::cost::CostError;
use crate::data::DataError;
use crate::fl::FlError;
use crate::game::GameError;

pub const REWARD_SWEEP_CSV: &str = "reward_sweep.csv";
pub const COMMTIME_SWEEP_CSV: &str = "commtime_sweep.csv";
pub const LEADER_CURVE_CSV: &str = "leader_curve.csv";
pub const EQUILIBRIUM_JSON: &str = "equilibrium.json";
pub const ROUNDS_CSV: &str = "rounds.csv";
pub const REPORT_JSON: &str = "report.json";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid config at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("CSV error on {path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Fl(#[from] FlError),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::Validation { .. } => 2,
            _ => 1,
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(output::io_err(dir))
}

pub fn emit_reward(cfg: &ScenarioConfig, dir: &Path) -> Result<SweepResult<sweep::RewardRecord>, HarnessError> {
    let res = sweep_reward(cfg)?;
    ensure_dir(dir)?;
    write_csv(&dir.join(REWARD_SWEEP_CSV), &res.records)?;
    Ok(res)
}

pub fn emit_commtime(
    cfg: &ScenarioConfig,
    ue_id: u32,
    dir: &Path,
) -> Result<SweepResult<sweep::CommtimeRecord>, HarnessError> {
    let res = sweep_commtime(cfg, ue_id)?;
    ensure_dir(dir)?;
    write_csv(&dir.join(COMMTIME_SWEEP_CSV), &res.records)?;
    Ok(res)
}

#[derive(Serialize)]
struct EquilibriumFile<'a> {
    metadata: &'a RunMetadata,
    reward_star: f64,
    theta_star: &'a [f64],
    payments: &'a [f64],
    leader_utility: f64,
    curve_argmax_reward: f64,
}

pub fn emit_leader(cfg: &ScenarioConfig, dir: &Path) -> Result<LeaderCurve, HarnessError> {
    let curve = leader_curve(cfg)?;
    ensure_dir(dir)?;
    write_csv(&dir.join(LEADER_CURVE_CSV), &curve.curve.records)?;
    let eq = &curve.equilibrium;
    write_json(
        &dir.join(EQUILIBRIUM_JSON),
        &EquilibriumFile {
            metadata: &curve.curve.metadata,
            reward_star: eq.reward_star,
            theta_star: &eq.theta_star,
            payments: &eq.payments,
            leader_utility: eq.leader_utility,
            curve_argmax_reward: curve.curve.records[curve.argmax].reward,
        },
    )?;
    Ok(curve)
}

pub fn emit_run(cfg: &ScenarioConfig, opts: &RunOptions, dir: &Path) -> Result<RunReport, HarnessError> {
    let report = run_end_to_end(cfg, opts)?;
    ensure_dir(dir)?;
    let ids: Vec<u32> = cfg.profiles.iter().map(|p| p.id).collect();
    let rows = report.round_rows(&ids);
    if rows.is_empty() {
        // header only
        let header = run::RoundRow::header_line();
        fs::write(dir.join(ROUNDS_CSV), header).map_err(output::io_err(dir))?;
    } else {
        write_csv(&dir.join(ROUNDS_CSV), &rows)?;
    }
    write_json(&dir.join(REPORT_JSON), &report)?;
    Ok(report)
}
