use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate, AggregatorKind, ClientUpdate};
use super::local::{local_solve, LocalSolve, Prox, SolverConfig};
use super::model::{accuracy, loss_and_grad, ModelWeights};
use super::FlError;
use crate::data::Shard;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub aggregator: AggregatorKind,
    pub solver: SolverConfig,
    /// Stop once the full-data gradient norm is at most this.
    pub eps_global: f64,
    pub max_rounds: usize,
    /// Seconds charged per unit of normalized communication time.
    pub time_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            aggregator: AggregatorKind::FedAvg,
            solver: SolverConfig::default(),
            eps_global: 1e-2,
            max_rounds: 500,
            time_scale: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), FlError> {
        self.aggregator.validate()?;
        self.solver.validate()?;
        if !(self.eps_global > 0.0 && self.eps_global.is_finite()) {
            return Err(FlError::Config(format!("eps_global must be > 0, got {}", self.eps_global)));
        }
        if self.max_rounds == 0 {
            return Err(FlError::Config("max_rounds must be >= 1".into()));
        }
        if !(self.time_scale >= 0.0 && self.time_scale.is_finite()) {
            return Err(FlError::Config("time_scale must be >= 0".into()));
        }
        Ok(())
    }
}

/// Simulated duration of one client's work in a round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClientTiming {
    /// Seconds per local iteration.
    pub iter_time: f64,
    /// Normalized communication time of one upload.
    pub comm_time_norm: f64,
}

impl Default for ClientTiming {
    fn default() -> Self {
        Self {
            iter_time: 1.0,
            comm_time_norm: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: usize,
    pub local_iters: Vec<usize>,
    pub grad_ratios: Vec<f64>,
    pub target_thetas: Vec<f64>,
    pub capped: Vec<bool>,
    pub global_loss: f64,
    pub global_accuracy: f64,
    pub global_grad_norm: f64,
    /// Slowest client's `iterations * iter_time + comm_time_norm * time_scale`.
    pub sim_time: f64,
    pub aggregation_fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub weights: ModelWeights,
    pub records: Vec<RoundRecord>,
    pub initial_grad_norm: f64,
    pub converged: bool,
}

impl TrainOutcome {
    pub fn rounds(&self) -> usize {
        self.records.len()
    }

    pub fn sim_time(&self) -> f64 {
        self.records.iter().map(|r| r.sim_time).sum()
    }
}

/// Synchronous federated training from zero weights.
///
/// Each round broadcasts the global model, runs every client's local solver
/// to its own relative accuracy, and aggregates the results in client order.
/// Training stops when the gradient norm on the union of all shards reaches
/// `eps_global` or after `max_rounds`. `timings` may be empty, in which case
/// every iteration costs one time unit and uploads are free.
pub fn train_federated(
    shards: &[Shard],
    thetas: &[f64],
    timings: &[ClientTiming],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, FlError> {
    cfg.validate()?;
    if shards.is_empty() {
        return Err(FlError::NoClients);
    }
    if thetas.len() != shards.len() || !(timings.is_empty() || timings.len() == shards.len()) {
        return Err(FlError::Dimension(format!(
            "{} shards, {} accuracies, {} timings",
            shards.len(),
            thetas.len(),
            timings.len()
        )));
    }
    let union = Shard::concat(shards).expect("shards are non-empty");
    let l2 = cfg.solver.l2_reg;
    let mu = cfg.aggregator.proximal_mu();

    let mut weights = ModelWeights::zeros(union.num_classes(), union.dim());
    let (_, grad) = loss_and_grad(&weights, &union, l2)?;
    let initial_grad_norm = grad.norm();
    let mut grad_norm = initial_grad_norm;
    let mut records: Vec<RoundRecord> = Vec::new();

    while grad_norm > cfg.eps_global && records.len() < cfg.max_rounds {
        let round = records.len() + 1;
        let anchor = weights.clone();
        let solves: Result<Vec<LocalSolve>, FlError> = shards
            .par_iter()
            .zip(thetas.par_iter())
            .map(|(shard, &theta)| {
                let prox = mu.map(|mu| Prox { mu, anchor: &anchor });
                local_solve(&anchor, shard, theta, &cfg.solver, prox)
            })
            .collect();
        let solves = match solves {
            Ok(s) => s,
            Err(FlError::NonFinite(what)) => return Err(diverged(round, what, records)),
            Err(e) => return Err(e),
        };
        let updates: Vec<ClientUpdate> = solves
            .iter()
            .zip(shards)
            .map(|(s, shard)| ClientUpdate {
                weights: s.weights.clone(),
                shard_size: shard.len(),
                local_loss: s.objectives[0],
            })
            .collect();
        let agg = aggregate(&updates, &cfg.aggregator)?;
        if !agg.weights.is_finite() {
            return Err(diverged(round, "aggregated weights".into(), records));
        }
        weights = agg.weights;

        let (loss, grad) = match loss_and_grad(&weights, &union, l2) {
            Ok(v) => v,
            Err(FlError::NonFinite(what)) => return Err(diverged(round, what, records)),
            Err(e) => return Err(e),
        };
        grad_norm = grad.norm();
        let sim_time = solves
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let t = timings.get(k).copied().unwrap_or_default();
                s.iterations as f64 * t.iter_time + t.comm_time_norm * cfg.time_scale
            })
            .fold(0.0, f64::max);
        records.push(RoundRecord {
            round,
            local_iters: solves.iter().map(|s| s.iterations).collect(),
            grad_ratios: solves.iter().map(|s| s.ratio).collect(),
            target_thetas: thetas.to_vec(),
            capped: solves.iter().map(|s| s.capped).collect(),
            global_loss: loss,
            global_accuracy: accuracy(&weights, &union)?,
            global_grad_norm: grad_norm,
            sim_time,
            aggregation_fallback: agg.fell_back,
        });
    }

    Ok(TrainOutcome {
        weights,
        records,
        initial_grad_norm,
        converged: grad_norm <= cfg.eps_global,
    })
}

fn diverged(round: usize, what: String, records: Vec<RoundRecord>) -> FlError {
    FlError::Diverged { round, what, records }
}
