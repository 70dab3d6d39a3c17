//! Equilibrium-then-train runs.

use serde::Serialize;

use super::config::{DatasetSource, ScenarioConfig};
use super::output::{fmt_float, CsvRecord, RunMetadata};
use super::HarnessError;
use crate::cost;
use crate::data::{gen_synthetic, load_idx, partition, Dataset};
use crate::fl::{train_federated, ClientTiming, FlError, RoundRecord};
use crate::game::{interaction_loop, StackelbergOutcome};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Multiplies every equilibrium accuracy before training; values below 1
    /// ask devices for more accurate local solves.
    pub theta_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { theta_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSummary {
    pub reward_star: f64,
    pub theta_star: Vec<f64>,
    pub payments: Vec<f64>,
    pub leader_utility: f64,
    pub interaction_rounds: usize,
}

impl From<&StackelbergOutcome> for EquilibriumSummary {
    fn from(o: &StackelbergOutcome) -> Self {
        Self {
            reward_star: o.reward_star,
            theta_star: o.theta_star.clone(),
            payments: o.payments.clone(),
            leader_utility: o.leader_utility,
            interaction_rounds: o.trace.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub metadata: RunMetadata,
    pub equilibrium: EquilibriumSummary,
    /// Accuracies handed to the trainer, after `theta_scale`.
    pub training_thetas: Vec<f64>,
    pub rounds_used: usize,
    pub converged: bool,
    pub final_loss: Option<f64>,
    pub final_accuracy: Option<f64>,
    pub final_grad_norm: Option<f64>,
    pub sim_time: f64,
    /// Set when training aborted.
    pub failure: Option<String>,
    #[serde(skip)]
    pub rounds: Vec<RoundRecord>,
}

/// One row of `rounds.csv`: one client in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRow<'a> {
    pub record: &'a RoundRecord,
    pub client: usize,
    pub ue_id: u32,
}

const ROUND_COLUMNS: [&str; 10] = [
    "round",
    "ue_id",
    "target_theta",
    "local_iters",
    "grad_ratio",
    "capped",
    "global_loss",
    "global_accuracy",
    "global_grad_norm",
    "sim_time",
];

impl RoundRow<'_> {
    /// CSV header with trailing newline, for runs that recorded no rounds.
    pub fn header_line() -> String {
        format!("{}\n", ROUND_COLUMNS.join(","))
    }
}

impl CsvRecord for RoundRow<'_> {
    fn header(&self) -> Vec<String> {
        ROUND_COLUMNS.map(String::from).to_vec()
    }

    fn fields(&self) -> Vec<String> {
        let r = self.record;
        let k = self.client;
        vec![
            r.round.to_string(),
            self.ue_id.to_string(),
            fmt_float(r.target_thetas[k]),
            r.local_iters[k].to_string(),
            fmt_float(r.grad_ratios[k]),
            r.capped[k].to_string(),
            fmt_float(r.global_loss),
            fmt_float(r.global_accuracy),
            fmt_float(r.global_grad_norm),
            fmt_float(r.sim_time),
        ]
    }
}

impl RunReport {
    pub fn round_rows(&self, ue_ids: &[u32]) -> Vec<RoundRow<'_>> {
        self.rounds
            .iter()
            .flat_map(|record| {
                ue_ids
                    .iter()
                    .enumerate()
                    .map(move |(client, &ue_id)| RoundRow { record, client, ue_id })
            })
            .collect()
    }
}

/// Dataset named by the scenario; synthetic data is drawn with the master seed.
pub fn load_dataset(cfg: &ScenarioConfig) -> Result<Dataset, HarnessError> {
    Ok(match &cfg.dataset {
        DatasetSource::Synthetic(s) => gen_synthetic(s.classes, s.dim, s.samples, s.separation, cfg.seed)?,
        DatasetSource::Idx(paths) => {
            let (images, labels) = paths.resolved();
            load_idx(images, labels)?
        }
    })
}

/// Solves the game through the leader/follower exchange, then trains with
/// the negotiated accuracies. Training failures are reported, not raised.
pub fn run_end_to_end(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunReport, HarnessError> {
    if !(opts.theta_scale > 0.0 && opts.theta_scale.is_finite()) {
        return Err(HarnessError::Validation {
            path: "theta_scale".into(),
            message: format!("{} must be positive", opts.theta_scale),
        });
    }
    let outcome = interaction_loop(&cfg.profiles, &cfg.game)?;
    let thetas: Vec<f64> = outcome
        .theta_star
        .iter()
        .map(|t| (t * opts.theta_scale).min(cfg.game.law.theta_max))
        .collect();

    let dataset = load_dataset(cfg)?;
    let shards = partition(&dataset, &cfg.partition_spec())?;
    let timings: Vec<ClientTiming> = cfg
        .profiles
        .iter()
        .map(|p| ClientTiming {
            iter_time: cost::local_iter_time(p),
            comm_time_norm: p.comm_time_norm,
        })
        .collect();

    let mut report = RunReport {
        metadata: RunMetadata::new(cfg.hash(), cfg.seed),
        equilibrium: EquilibriumSummary::from(&outcome),
        training_thetas: thetas.clone(),
        rounds_used: 0,
        converged: false,
        final_loss: None,
        final_accuracy: None,
        final_grad_norm: None,
        sim_time: 0.0,
        failure: None,
        rounds: Vec::new(),
    };
    match train_federated(&shards, &thetas, &timings, &cfg.training) {
        Ok(trained) => {
            report.rounds_used = trained.rounds();
            report.converged = trained.converged;
            report.sim_time = trained.sim_time();
            if let Some(last) = trained.records.last() {
                report.final_loss = Some(last.global_loss);
                report.final_accuracy = Some(last.global_accuracy);
                report.final_grad_norm = Some(last.global_grad_norm);
            } else {
                report.final_grad_norm = Some(trained.initial_grad_norm);
            }
            report.rounds = trained.records;
        }
        Err(FlError::Diverged { round, what, records }) => {
            report.failure = Some(format!("training diverged in round {round}: non-finite {what}"));
            report.rounds_used = records.len();
            report.sim_time = records.iter().map(|r| r.sim_time).sum();
            report.rounds = records;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}
