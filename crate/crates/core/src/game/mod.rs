//! Two-level Stackelberg incentive game.
//!
//! The base station (leader) offers a reward rate `r` per unit of contributed
//! local accuracy. Each device (follower) picks its local relative accuracy
//! `theta` to maximize `r * (1 - theta) - session_cost(theta)`. Follower
//! utilities do not depend on each other, so the lower-level Nash equilibrium
//! is the vector of independent best responses. The leader anticipates those
//! responses (backward induction) and picks the reward that maximizes
//! `beta * ln(1 + kappa_acc * (1 - max_k theta_k)) - r * sum_k (1 - theta_k)`.

pub mod search;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{AccuracyLaw, CostError, CostTerms, UeProfile};
use search::{golden_max, grid_max, linspace, Probe};

/// Points in the coarse grid every golden-section answer is checked against.
pub const CHECK_GRID: usize = 64;
/// Points in the fallback grid used when the coarse check disagrees.
pub const FALLBACK_GRID: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("reward {reward} outside [{min}, {max}]")]
    RewardOutOfBounds { reward: f64, min: f64, max: f64 },
    #[error("theta {theta} outside [{min}, {max}]")]
    ThetaOutOfBounds { theta: f64, min: f64, max: f64 },
    #[error("the game needs at least one follower")]
    NoFollowers,
    #[error("expected {expected} accuracy values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
    #[error("leader and followers did not settle within {} rounds", trace.len())]
    NotConverged { trace: Vec<TraceEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameConfig {
    pub law: AccuracyLaw,
    pub reward_min: f64,
    pub reward_max: f64,
    /// Scale of the leader's benefit from global accuracy.
    pub beta: f64,
    /// Curvature of the leader's benefit.
    pub kappa_acc: f64,
    pub follower_tol: f64,
    pub leader_grid: usize,
    pub max_interaction_rounds: usize,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            law: AccuracyLaw::default(),
            reward_min: 0.0,
            reward_max: 10.0,
            beta: 40.0,
            kappa_acc: 10.0,
            follower_tol: 1e-6,
            leader_grid: 256,
            max_interaction_rounds: 20,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<(), GameError> {
        self.law.validate()?;
        let bad = |msg: &str| Err(GameError::InvalidConfig(msg.to_string()));
        if !(self.reward_min >= 0.0 && self.reward_min < self.reward_max && self.reward_max.is_finite()) {
            return bad("reward bounds must satisfy 0 <= reward_min < reward_max");
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive");
        }
        if !(self.kappa_acc > 0.0 && self.kappa_acc.is_finite()) {
            return bad("kappa_acc must be positive");
        }
        if !(self.follower_tol > 0.0 && self.follower_tol.is_finite()) {
            return bad("follower_tol must be positive");
        }
        if self.leader_grid < 2 {
            return bad("leader_grid must be at least 2");
        }
        if self.max_interaction_rounds == 0 {
            return bad("max_interaction_rounds must be at least 1");
        }
        Ok(())
    }

    fn reward_span(&self) -> f64 {
        self.reward_max - self.reward_min
    }

    fn check_reward(&self, r: f64) -> Result<(), GameError> {
        if r >= self.reward_min && r <= self.reward_max {
            Ok(())
        } else {
            Err(GameError::RewardOutOfBounds {
                reward: r,
                min: self.reward_min,
                max: self.reward_max,
            })
        }
    }
}

/// A follower's chosen accuracy and the utility it earns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestResponse {
    pub theta: f64,
    pub utility: f64,
    /// True when the golden-section answer failed the grid cross-check and the
    /// dense fallback grid was used.
    pub fallback: bool,
}

/// One leader offer and the followers' answer to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub round: usize,
    pub reward: f64,
    pub thetas: Vec<f64>,
    pub leader_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackelbergOutcome {
    pub reward_star: f64,
    pub theta_star: Vec<f64>,
    pub leader_utility: f64,
    pub payments: Vec<f64>,
    pub trace: Vec<TraceEntry>,
}

impl StackelbergOutcome {
    fn at(reward: f64, responses: &[BestResponse], leader_utility: f64, trace: Vec<TraceEntry>) -> Self {
        let theta_star: Vec<f64> = responses.iter().map(|b| b.theta).collect();
        let payments = theta_star.iter().map(|t| reward * (1.0 - t)).collect();
        Self {
            reward_star: reward,
            theta_star,
            leader_utility,
            payments,
            trace,
        }
    }
}

/// Follower utility: payment for contributed accuracy minus session cost.
pub fn ue_utility(p: &UeProfile, theta: f64, r: f64, law: &AccuracyLaw) -> Result<f64, GameError> {
    if !(theta >= law.theta_min && theta <= law.theta_max) {
        return Err(GameError::ThetaOutOfBounds {
            theta,
            min: law.theta_min,
            max: law.theta_max,
        });
    }
    if r.is_nan() || r < 0.0 {
        return Err(GameError::RewardOutOfBounds {
            reward: r,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    Ok(utility_of(&CostTerms::of(p), theta, r, law))
}

fn utility_of(terms: &CostTerms, theta: f64, r: f64, law: &AccuracyLaw) -> f64 {
    match terms.session(theta, law) {
        Ok(cost) => r * (1.0 - theta) - cost,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// The follower's utility-maximizing accuracy for reward `r`.
///
/// Golden-section search on `[theta_min, theta_max]`, compared against both
/// endpoints and a 64-point grid. If the grid beats the search by more than
/// `10 * follower_tol` in utility, the maximum of a 4096-point grid is refined
/// by golden-section inside its neighbouring cells instead.
pub fn best_response(p: &UeProfile, r: f64, cfg: &GameConfig) -> Result<BestResponse, GameError> {
    cfg.check_reward(r)?;
    let law = &cfg.law;
    let terms = CostTerms::of(p);
    let f = |theta: f64| utility_of(&terms, theta, r, law);
    let (lo, hi) = (law.theta_min, law.theta_max);

    let mut best = Probe { x: lo, value: f(lo) };
    for candidate in [golden_max(f, lo, hi, cfg.follower_tol), Probe { x: hi, value: f(hi) }] {
        if candidate.beats(&best) {
            best = candidate;
        }
    }

    let (_, coarse) = grid_max(f, lo, hi, CHECK_GRID);
    if coarse.value <= best.value + 10.0 * cfg.follower_tol {
        return Ok(BestResponse {
            theta: best.x,
            utility: best.value,
            fallback: false,
        });
    }

    let (i, dense) = grid_max(f, lo, hi, FALLBACK_GRID);
    let cell = (hi - lo) / (FALLBACK_GRID - 1) as f64;
    let a = if i == 0 { lo } else { lo + cell * (i - 1) as f64 };
    let b = (lo + cell * (i + 1) as f64).min(hi);
    let mut best = dense;
    let refined = golden_max(f, a, b, cfg.follower_tol);
    if refined.beats(&best) {
        best = refined;
    }
    Ok(BestResponse {
        theta: best.x,
        utility: best.value,
        fallback: true,
    })
}

/// Lower-level Nash equilibrium: every follower's best response, in input order.
pub fn nash_lower_level(
    profiles: &[UeProfile],
    r: f64,
    cfg: &GameConfig,
) -> Result<Vec<BestResponse>, GameError> {
    if profiles.is_empty() {
        return Err(GameError::NoFollowers);
    }
    profiles.par_iter().map(|p| best_response(p, r, cfg)).collect()
}

/// Leader utility for reward `r` given the followers' accuracies.
pub fn bs_utility(profiles: &[UeProfile], r: f64, thetas: &[f64], cfg: &GameConfig) -> Result<f64, GameError> {
    if profiles.is_empty() {
        return Err(GameError::NoFollowers);
    }
    if thetas.len() != profiles.len() {
        return Err(GameError::LengthMismatch {
            expected: profiles.len(),
            got: thetas.len(),
        });
    }
    let law = &cfg.law;
    let mut worst = f64::NEG_INFINITY;
    let mut contributed = 0.0;
    for &theta in thetas {
        if !(theta >= law.theta_min && theta <= law.theta_max) {
            return Err(GameError::ThetaOutOfBounds {
                theta,
                min: law.theta_min,
                max: law.theta_max,
            });
        }
        worst = worst.max(theta);
        contributed += 1.0 - theta;
    }
    Ok(cfg.beta * (1.0 + cfg.kappa_acc * (1.0 - worst)).ln() - r * contributed)
}

/// Leader utility when followers best-respond to `r`.
pub fn induced_leader_utility(profiles: &[UeProfile], r: f64, cfg: &GameConfig) -> Result<(f64, Vec<BestResponse>), GameError> {
    let responses = nash_lower_level(profiles, r, cfg)?;
    let thetas: Vec<f64> = responses.iter().map(|b| b.theta).collect();
    Ok((bs_utility(profiles, r, &thetas, cfg)?, responses))
}

/// Backward induction: grid search over the reward range followed by
/// golden-section refinement inside the cells around the grid maximum.
pub fn leader_optimize(profiles: &[UeProfile], cfg: &GameConfig) -> Result<StackelbergOutcome, GameError> {
    cfg.validate()?;
    if profiles.is_empty() {
        return Err(GameError::NoFollowers);
    }
    let grid = linspace(cfg.reward_min, cfg.reward_max, cfg.leader_grid);
    let values = grid
        .par_iter()
        .map(|&r| induced_leader_utility(profiles, r, cfg).map(|(u, _)| u))
        .collect::<Result<Vec<f64>, _>>()?;
    let i = search::argmax(&values).expect("leader grid is non-empty");

    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let objective = |r: f64| {
        induced_leader_utility(profiles, r, cfg)
            .map(|(u, _)| u)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let mut best = Probe { x: grid[i], value: values[i] };
    let refined = golden_max(objective, lo, hi, cfg.follower_tol * cfg.reward_span());
    if refined.beats(&best) {
        best = refined;
    }

    let (utility, responses) = induced_leader_utility(profiles, best.x, cfg)?;
    let thetas = responses.iter().map(|b| b.theta).collect();
    let trace = vec![TraceEntry {
        round: 0,
        reward: best.x,
        thetas,
        leader_utility: utility,
    }];
    Ok(StackelbergOutcome::at(best.x, &responses, utility, trace))
}

/// Round-by-round leader/follower exchange.
///
/// Round 0 offers the midpoint of the reward range. In every round the
/// followers answer the current offer with their best responses, then the
/// leader re-solves its problem against the followers' best-response map and
/// posts a new offer. The exchange stops once consecutive offers differ by at
/// most `follower_tol * (reward_max - reward_min)`.
pub fn interaction_loop(profiles: &[UeProfile], cfg: &GameConfig) -> Result<StackelbergOutcome, GameError> {
    cfg.validate()?;
    if profiles.is_empty() {
        return Err(GameError::NoFollowers);
    }
    let stop = cfg.follower_tol * cfg.reward_span();
    let mut offer = cfg.reward_min + 0.5 * cfg.reward_span();
    let mut trace = Vec::new();
    for round in 0..cfg.max_interaction_rounds {
        let (utility, responses) = induced_leader_utility(profiles, offer, cfg)?;
        trace.push(TraceEntry {
            round,
            reward: offer,
            thetas: responses.iter().map(|b| b.theta).collect(),
            leader_utility: utility,
        });
        let next = leader_optimize(profiles, cfg)?.reward_star;
        if (next - offer).abs() <= stop {
            return Ok(StackelbergOutcome::at(offer, &responses, utility, trace));
        }
        offer = next;
    }
    Err(GameError::NotConverged { trace })
}

/// Ready-made five-device scenario: equal data sizes, channels from good
/// (`tau = 0.2`) to poor (`tau = 1.0`), CPUs spread over 1–3 GHz.
pub fn default_profiles() -> Vec<UeProfile> {
    let freqs = [1.0e9, 1.5e9, 2.0e9, 2.5e9, 3.0e9];
    let taus = [0.2, 0.4, 0.6, 0.8, 1.0];
    freqs
        .iter()
        .zip(taus)
        .enumerate()
        .map(|(id, (&f, tau))| UeProfile {
            id: id as u32,
            cpu_freq: f,
            eff_capacitance: 1e-28,
            cycles_per_sample: 1e6,
            data_size: 120,
            comm_time_norm: tau,
            weight_energy: 1.0,
            weight_time: 1.0,
            cost_sensitivity: 1.0,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_profile() -> UeProfile {
        UeProfile {
            id: 0,
            cpu_freq: 1.0,
            eff_capacitance: 1.0,
            cycles_per_sample: 1.0,
            data_size: 1,
            comm_time_norm: 0.5,
            weight_energy: 1.0,
            weight_time: 1.0,
            cost_sensitivity: 1.0,
        }
    }

    fn costless() -> UeProfile {
        UeProfile { cost_sensitivity: 0.0, ..unit_profile() }
    }

    #[test]
    fn utility_hand_values() {
        let law = AccuracyLaw { nu: 1.0, ..Default::default() };
        let theta = (-1.0f64).exp();
        // 10 (1 - e^-1) - 2.5 / (1 - e^-1) = 2.36626382...
        let u = ue_utility(&unit_profile(), theta, 10.0, &law).unwrap();
        assert_relative_eq!(u, 2.3662638211, epsilon = 1e-9);
        let u0 = ue_utility(&unit_profile(), 0.4, 0.0, &law).unwrap();
        assert!(u0 <= 0.0);
        assert_eq!(ue_utility(&costless(), 0.4, 2.0, &law).unwrap(), 2.0 * 0.6);
        assert!(ue_utility(&unit_profile(), 0.999, 1.0, &law).is_err());
    }

    #[test]
    fn costless_follower_plays_theta_min() {
        let cfg = GameConfig::default();
        for r in [0.5, 3.0, 10.0] {
            let b = best_response(&costless(), r, &cfg).unwrap();
            assert_eq!(b.theta, cfg.law.theta_min);
        }
    }

    #[test]
    fn reward_outside_bounds_rejected() {
        let cfg = GameConfig::default();
        assert!(matches!(
            best_response(&unit_profile(), 11.0, &cfg),
            Err(GameError::RewardOutOfBounds { .. })
        ));
        assert!(matches!(nash_lower_level(&[], 1.0, &cfg), Err(GameError::NoFollowers)));
    }

    #[test]
    fn singleton_and_symmetric_nash() {
        let cfg = GameConfig::default();
        let p = default_profiles()[2].clone();
        let single = nash_lower_level(std::slice::from_ref(&p), 2.0, &cfg).unwrap();
        assert_eq!(single[0], best_response(&p, 2.0, &cfg).unwrap());
        let same = nash_lower_level(&[p.clone(), p.clone(), p], 2.0, &cfg).unwrap();
        assert_eq!(same[0].theta, same[1].theta);
        assert_eq!(same[1].theta, same[2].theta);
    }

    #[test]
    fn leader_utility_hand_values() {
        let cfg = GameConfig {
            beta: 1.0,
            kappa_acc: 1.0,
            ..Default::default()
        };
        let ps = vec![unit_profile(), unit_profile()];
        // ln 1.5 - 0.1 = 0.305465...
        let u = bs_utility(&ps, 0.1, &[0.5, 0.5], &cfg).unwrap();
        assert_relative_eq!(u, 1.5f64.ln() - 0.1, epsilon = 1e-15);
        let free = bs_utility(&ps, 0.0, &[0.5, 0.3], &cfg).unwrap();
        assert_relative_eq!(free, 1.5f64.ln(), epsilon = 1e-15);
        assert!(bs_utility(&ps, 0.1, &[0.5], &cfg).is_err());

        let flat = GameConfig { kappa_acc: 1e-12, ..cfg };
        let u = bs_utility(&ps, 2.0, &[0.99, 0.99], &flat).unwrap();
        assert_relative_eq!(u, -2.0 * 0.02, epsilon = 1e-9);
    }

    #[test]
    fn costless_single_follower_pays_minimum() {
        let cfg = GameConfig::default();
        let out = leader_optimize(&[costless()], &cfg).unwrap();
        assert_eq!(out.reward_star, cfg.reward_min);
        assert_eq!(out.theta_star, vec![cfg.law.theta_min]);

        let looped = interaction_loop(&[costless()], &cfg).unwrap();
        assert!(looped.trace.len() <= 2);
        assert_eq!(looped.reward_star, cfg.reward_min);
    }

    #[test]
    fn negligible_benefit_pays_minimum() {
        let cfg = GameConfig {
            beta: 1e-9,
            ..Default::default()
        };
        let out = leader_optimize(&default_profiles(), &cfg).unwrap();
        assert_eq!(out.reward_star, cfg.reward_min);
    }

    #[test]
    fn payments_are_reward_times_contribution() {
        let cfg = GameConfig::default();
        let out = leader_optimize(&default_profiles(), &cfg).unwrap();
        for (pay, theta) in out.payments.iter().zip(&out.theta_star) {
            assert_eq!(*pay, out.reward_star * (1.0 - theta));
            assert!(*pay >= 0.0);
        }
        assert!(!out.trace.is_empty());
    }

    #[test]
    fn interaction_loop_reports_non_convergence() {
        let cfg = GameConfig {
            max_interaction_rounds: 1,
            ..Default::default()
        };
        match interaction_loop(&default_profiles(), &cfg) {
            Err(GameError::NotConverged { trace }) => assert_eq!(trace.len(), 1),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn identical_followers_answer_identically_every_round() {
        let p = default_profiles()[1].clone();
        let out = interaction_loop(&[p.clone(), p.clone(), p], &GameConfig::default()).unwrap();
        for entry in &out.trace {
            assert!(entry.thetas.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn config_validation() {
        let cfg = GameConfig {
            reward_min: 5.0,
            reward_max: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = GameConfig {
            leader_grid: 1,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        assert!(GameConfig::default().validate().is_ok());
    }
}
