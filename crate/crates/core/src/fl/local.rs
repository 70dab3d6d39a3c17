use serde::{Deserialize, Serialize};

use super::model::{loss_and_grad, ModelWeights};
use super::FlError;
use crate::data::Shard;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Ridge coefficient; must be positive for the accuracy-driven stopping rule.
    pub l2_reg: f64,
    pub max_local_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            l2_reg: 1e-2,
            max_local_iters: 2000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), FlError> {
        if !(self.l2_reg > 0.0 && self.l2_reg.is_finite()) {
            return Err(FlError::Config(format!("l2_reg must be > 0, got {}", self.l2_reg)));
        }
        if self.max_local_iters == 0 {
            return Err(FlError::Config("max_local_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// Proximal term `(mu / 2) * ||w - anchor||^2` added to a local objective.
#[derive(Debug, Clone, Copy)]
pub struct Prox<'a> {
    pub mu: f64,
    pub anchor: &'a ModelWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolve {
    pub weights: ModelWeights,
    pub iterations: usize,
    /// Final gradient norm divided by the gradient norm at the start point.
    pub ratio: f64,
    /// True when `max_local_iters` ran out before the ratio reached its target.
    pub capped: bool,
    /// Local objective at every iterate, starting point included.
    pub objectives: Vec<f64>,
}

/// Fixed step size `1 / L` from the smoothness bound of the local objective:
/// half the largest squared row norm (bias included), plus the ridge and
/// proximal curvature.
pub fn step_size(shard: &Shard, l2: f64, mu: f64) -> f64 {
    let max_row = (0..shard.len())
        .map(|i| shard.row(i).iter().map(|x| x * x).sum::<f64>() + 1.0)
        .fold(0.0, f64::max);
    1.0 / (0.5 * max_row + l2 + mu)
}

fn objective_and_grad(w: &ModelWeights, shard: &Shard, l2: f64, prox: Option<Prox<'_>>) -> Result<(f64, ModelWeights), FlError> {
    let (mut f, mut g) = loss_and_grad(w, shard, l2)?;
    if let Some(Prox { mu, anchor }) = prox {
        let mut offset = w.clone();
        offset.axpy(-1.0, anchor);
        f += 0.5 * mu * offset.norm_sq();
        g.axpy(mu, &offset);
    }
    Ok((f, g))
}

/// Full-batch gradient descent from `start` until the gradient norm drops to
/// `theta` times its initial value, or the iteration cap is hit.
pub fn local_solve(
    start: &ModelWeights,
    shard: &Shard,
    theta: f64,
    cfg: &SolverConfig,
    prox: Option<Prox<'_>>,
) -> Result<LocalSolve, FlError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(FlError::Config(format!("local accuracy {theta} outside (0, 1)")));
    }
    if !start.is_finite() {
        return Err(FlError::NonFinite("starting weights".into()));
    }
    // mu = 0 takes exactly the plain path.
    let prox = prox.filter(|p| p.mu != 0.0);
    if let Some(p) = prox {
        if !(p.mu > 0.0 && p.mu.is_finite()) {
            return Err(FlError::Config(format!("proximal mu {} must be >= 0", p.mu)));
        }
        start.check_shape(p.anchor)?;
    }
    let step = step_size(shard, cfg.l2_reg, prox.map_or(0.0, |p| p.mu));

    let mut w = start.clone();
    let (f0, mut g) = objective_and_grad(&w, shard, cfg.l2_reg, prox)?;
    let initial = g.norm();
    let mut objectives = vec![f0];
    if initial == 0.0 {
        return Ok(LocalSolve {
            weights: w,
            iterations: 0,
            ratio: 0.0,
            capped: false,
            objectives,
        });
    }
    let target = theta * initial;
    let mut norm = initial;
    let mut iterations = 0;
    while norm > target && iterations < cfg.max_local_iters {
        w.axpy(-step, &g);
        let (f, next) = objective_and_grad(&w, shard, cfg.l2_reg, prox)?;
        objectives.push(f);
        g = next;
        norm = g.norm();
        iterations += 1;
    }
    Ok(LocalSolve {
        weights: w,
        iterations,
        ratio: norm / initial,
        capped: norm > target,
        objectives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_synthetic;

    fn shard() -> Shard {
        gen_synthetic(3, 4, 60, 2.0, 9).unwrap().as_shard()
    }

    #[test]
    fn lax_target_stops_quickly() {
        let s = shard();
        let out = local_solve(&ModelWeights::zeros(3, 4), &s, 0.999, &SolverConfig::default(), None).unwrap();
        assert!(out.iterations <= 1);
        assert!(!out.capped);
    }

    #[test]
    fn zero_mu_matches_plain_objective() {
        let s = shard();
        let start = ModelWeights::zeros(3, 4);
        let cfg = SolverConfig::default();
        let plain = local_solve(&start, &s, 0.2, &cfg, None).unwrap();
        let prox = local_solve(&start, &s, 0.2, &cfg, Some(Prox { mu: 0.0, anchor: &start })).unwrap();
        assert_eq!(plain, prox);
    }

    #[test]
    fn objective_never_increases() {
        let s = shard();
        let start = ModelWeights::zeros(3, 4);
        for prox in [None, Some(Prox { mu: 0.5, anchor: &start })] {
            let out = local_solve(&start, &s, 0.01, &SolverConfig::default(), prox).unwrap();
            assert!(out.objectives.windows(2).all(|w| w[1] <= w[0]));
            assert!(out.ratio <= 0.01 || out.capped);
        }
    }

    #[test]
    fn iteration_cap_is_flagged() {
        let s = shard();
        let cfg = SolverConfig { max_local_iters: 2, ..Default::default() };
        let out = local_solve(&ModelWeights::zeros(3, 4), &s, 1e-6, &cfg, None).unwrap();
        assert_eq!(out.iterations, 2);
        assert!(out.capped);
    }

    #[test]
    fn optimal_start_returns_immediately() {
        // Two identical points with opposite labels: the data gradient at zero
        // weights cancels and the ridge gradient vanishes there.
        let ds = crate::data::Dataset::new(vec![0.5, 0.5], vec![0, 1], 2, 1).unwrap();
        let cfg = SolverConfig { l2_reg: 1e-3, ..Default::default() };
        let out = local_solve(&ModelWeights::zeros(2, 1), &ds.as_shard(), 0.5, &cfg, None).unwrap();
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn rejects_bad_theta() {
        let s = shard();
        assert!(local_solve(&ModelWeights::zeros(3, 4), &s, 1.0, &SolverConfig::default(), None).is_err());
        assert!(local_solve(&ModelWeights::zeros(3, 4), &s, 0.0, &SolverConfig::default(), None).is_err());
    }
}
