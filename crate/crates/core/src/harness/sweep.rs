//! Parameter sweeps over the incentive game.

use rayon::prelude::*;
use serde::Serialize;

use super::config::ScenarioConfig;
use super::output::{fmt_float, CsvRecord, RunMetadata};
use super::HarnessError;
use crate::cost::{self, CostTerms, UeProfile};
use crate::game::{self, bs_utility, nash_lower_level, StackelbergOutcome};

/// Records of one sweep plus the provenance of the run that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<R> {
    pub records: Vec<R>,
    pub metadata: RunMetadata,
}

fn metadata(cfg: &ScenarioConfig) -> RunMetadata {
    RunMetadata::new(cfg.hash(), cfg.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RewardRecord {
    pub reward: f64,
    pub ue_id: u32,
    pub theta_star: f64,
    pub local_iters: f64,
    pub utility: f64,
}

impl CsvRecord for RewardRecord {
    fn header(&self) -> Vec<String> {
        ["r", "ue_id", "theta_star", "local_iters", "utility"].map(String::from).to_vec()
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_float(self.reward),
            self.ue_id.to_string(),
            fmt_float(self.theta_star),
            fmt_float(self.local_iters),
            fmt_float(self.utility),
        ]
    }
}

/// Every device's best response at every reward in the sweep grid.
/// Records are ordered by reward, then by device.
pub fn sweep_reward(cfg: &ScenarioConfig) -> Result<SweepResult<RewardRecord>, HarnessError> {
    let law = &cfg.game.law;
    let per_point = cfg
        .reward_grid()
        .par_iter()
        .map(|&r| {
            let responses = nash_lower_level(&cfg.profiles, r, &cfg.game)?;
            cfg.profiles
                .iter()
                .zip(responses)
                .map(|(p, b)| {
                    Ok(RewardRecord {
                        reward: r,
                        ue_id: p.id,
                        theta_star: b.theta,
                        local_iters: cost::local_iterations(b.theta, law)?,
                        utility: b.utility,
                    })
                })
                .collect::<Result<Vec<_>, HarnessError>>()
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(SweepResult {
        records: per_point.into_iter().flatten().collect(),
        metadata: metadata(cfg),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommtimeRecord {
    pub comm_time_norm: f64,
    pub ue_id: u32,
    pub reward: f64,
    pub theta_star: f64,
    pub local_iters: f64,
    pub global_rounds: f64,
    pub utility: f64,
}

impl CsvRecord for CommtimeRecord {
    fn header(&self) -> Vec<String> {
        ["comm_time_norm", "ue_id", "r", "theta_star", "local_iters", "global_rounds", "utility"]
            .map(String::from)
            .to_vec()
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_float(self.comm_time_norm),
            self.ue_id.to_string(),
            fmt_float(self.reward),
            fmt_float(self.theta_star),
            fmt_float(self.local_iters),
            fmt_float(self.global_rounds),
            fmt_float(self.utility),
        ]
    }
}

/// One device's best response as its channel degrades, at the configured
/// sweep reward.
pub fn sweep_commtime(cfg: &ScenarioConfig, ue_id: u32) -> Result<SweepResult<CommtimeRecord>, HarnessError> {
    let base = cfg
        .profiles
        .iter()
        .find(|p| p.id == ue_id)
        .ok_or_else(|| HarnessError::Validation {
            path: "sweeps.commtime_ue".into(),
            message: format!("no profile with id {ue_id}"),
        })?;
    let reward = cfg.sweeps.commtime_reward.unwrap_or(cfg.game.reward_min);
    let law = &cfg.game.law;
    let records = cfg
        .commtime_grid()
        .par_iter()
        .map(|&tau| {
            let p = UeProfile {
                comm_time_norm: tau,
                ..base.clone()
            };
            let b = game::best_response(&p, reward, &cfg.game)?;
            Ok(CommtimeRecord {
                comm_time_norm: tau,
                ue_id,
                reward,
                theta_star: b.theta,
                local_iters: cost::local_iterations(b.theta, law)?,
                global_rounds: cost::global_rounds(b.theta, law)?,
                utility: b.utility,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(SweepResult {
        records,
        metadata: metadata(cfg),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaderRecord {
    pub reward: f64,
    /// Largest (worst) local accuracy among the followers.
    pub theta_hat: f64,
    pub global_rounds: f64,
    pub bs_utility: f64,
    pub normalized_utility: f64,
    pub total_payment: f64,
    pub thetas: Vec<f64>,
    #[serde(skip)]
    ue_ids: Vec<u32>,
}

impl CsvRecord for LeaderRecord {
    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["r", "theta_hat", "global_rounds", "bs_utility", "normalized_utility", "total_payment"]
            .map(String::from)
            .to_vec();
        h.extend(self.ue_ids.iter().map(|id| format!("theta_ue{id}")));
        h
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![
            fmt_float(self.reward),
            fmt_float(self.theta_hat),
            fmt_float(self.global_rounds),
            fmt_float(self.bs_utility),
            fmt_float(self.normalized_utility),
            fmt_float(self.total_payment),
        ];
        f.extend(self.thetas.iter().map(|&t| fmt_float(t)));
        f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaderCurve {
    pub curve: SweepResult<LeaderRecord>,
    /// Index of the curve maximum, first occurrence on ties.
    pub argmax: usize,
    pub equilibrium: StackelbergOutcome,
}

impl<R: Serialize> Serialize for SweepResult<R> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SweepResult", 2)?;
        st.serialize_field("records", &self.records)?;
        st.serialize_field("metadata", &self.metadata)?;
        st.end()
    }
}

/// Scales leader utilities into [0, 1] with the sweep maximum at exactly 1:
/// division by the maximum when every value is non-negative, min-max scaling
/// otherwise.
pub fn normalize_utilities(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    values
        .iter()
        .map(|&v| {
            if max == min {
                1.0
            } else if min >= 0.0 {
                v / max
            } else {
                (v - min) / (max - min)
            }
        })
        .collect()
}

/// Leader utility along the reward grid with followers at their lower-level
/// Nash equilibrium, plus the backward-induction equilibrium.
pub fn leader_curve(cfg: &ScenarioConfig) -> Result<LeaderCurve, HarnessError> {
    let law = &cfg.game.law;
    let ue_ids: Vec<u32> = cfg.profiles.iter().map(|p| p.id).collect();
    let points = cfg
        .reward_grid()
        .par_iter()
        .map(|&r| {
            let thetas: Vec<f64> = nash_lower_level(&cfg.profiles, r, &cfg.game)?
                .iter()
                .map(|b| b.theta)
                .collect();
            let utility = bs_utility(&cfg.profiles, r, &thetas, &cfg.game)?;
            Ok((r, thetas, utility))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let utilities: Vec<f64> = points.iter().map(|(_, _, u)| *u).collect();
    let normalized = normalize_utilities(&utilities);
    let argmax = game::search::argmax(&utilities).expect("reward grid is non-empty");
    let records = points
        .into_iter()
        .zip(normalized)
        .map(|((reward, thetas, bs_utility), normalized_utility)| {
            let theta_hat = thetas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(LeaderRecord {
                reward,
                theta_hat,
                global_rounds: cost::global_rounds(theta_hat, law)?,
                bs_utility,
                normalized_utility,
                total_payment: thetas.iter().map(|t| reward * (1.0 - t)).sum(),
                thetas,
                ue_ids: ue_ids.clone(),
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    Ok(LeaderCurve {
        curve: SweepResult {
            records,
            metadata: metadata(cfg),
        },
        argmax,
        equilibrium: game::leader_optimize(&cfg.profiles, &cfg.game)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffRecord {
    pub theta: f64,
    pub ue_id: u32,
    pub local_iters: f64,
    pub global_rounds: f64,
    pub per_round_cost: f64,
    pub session_cost: f64,
}

impl CsvRecord for TradeoffRecord {
    fn header(&self) -> Vec<String> {
        ["theta", "ue_id", "local_iters", "global_rounds", "per_round_cost", "session_cost"]
            .map(String::from)
            .to_vec()
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_float(self.theta),
            self.ue_id.to_string(),
            fmt_float(self.local_iters),
            fmt_float(self.global_rounds),
            fmt_float(self.per_round_cost),
            fmt_float(self.session_cost),
        ]
    }
}

/// Local iterations, global rounds and device costs along the accuracy grid.
pub fn cost_tradeoff(cfg: &ScenarioConfig) -> Result<SweepResult<TradeoffRecord>, HarnessError> {
    let law = &cfg.game.law;
    let mut records = Vec::new();
    for &theta in cfg.theta_grid() {
        for p in &cfg.profiles {
            let terms = CostTerms::of(p);
            records.push(TradeoffRecord {
                theta,
                ue_id: p.id,
                local_iters: cost::local_iterations(theta, law)?,
                global_rounds: cost::global_rounds(theta, law)?,
                per_round_cost: terms.per_round(theta, law)?,
                session_cost: terms.session(theta, law)?,
            });
        }
    }
    Ok(SweepResult {
        records,
        metadata: metadata(cfg),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::default_scenario;

    #[test]
    fn normalization_peaks_at_one() {
        let n = normalize_utilities(&[2.0, 4.0, 1.0]);
        assert_eq!(n, vec![0.5, 1.0, 0.25]);
        let n = normalize_utilities(&[-1.0, 3.0, 1.0]);
        assert_eq!(n, vec![0.0, 1.0, 0.5]);
        assert_eq!(normalize_utilities(&[5.0, 5.0]), vec![1.0, 1.0]);
    }

    #[test]
    fn single_point_reward_grid() {
        let mut cfg = default_scenario();
        cfg.sweeps.reward = Some(vec![3.0]);
        let res = sweep_reward(&cfg).unwrap();
        assert_eq!(res.records.len(), cfg.profiles.len());
        assert!(res.records.iter().all(|r| r.reward == 3.0));
    }

    #[test]
    fn costless_device_is_flat_in_commtime() {
        let mut cfg = default_scenario();
        for p in &mut cfg.profiles {
            p.cost_sensitivity = 0.0;
        }
        let res = sweep_commtime(&cfg, 2).unwrap();
        assert!(res.records.iter().all(|r| r.theta_star == cfg.game.law.theta_min));
    }

    #[test]
    fn negligible_leader_benefit_peaks_at_min_reward() {
        let mut cfg = default_scenario();
        cfg.game.beta = 1e-9;
        let curve = leader_curve(&cfg).unwrap();
        assert_eq!(curve.argmax, 0);
        assert_eq!(curve.curve.records[0].normalized_utility, 1.0);
    }

    #[test]
    fn tradeoff_table_shape() {
        let cfg = default_scenario();
        let res = cost_tradeoff(&cfg).unwrap();
        assert_eq!(res.records.len(), cfg.theta_grid().len() * cfg.profiles.len());
    }
}
