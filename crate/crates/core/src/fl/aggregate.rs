use serde::{Deserialize, Serialize};

use super::model::ModelWeights;
use super::FlError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AggregatorKind {
    #[default]
    FedAvg,
    /// Local objectives carry `(mu / 2) * ||w - w_global||^2`; averaging is FedAvg's.
    FedProx { mu: f64 },
    /// Weights proportional to `shard_size * local_loss^q`.
    FairWeighted { q: f64 },
}

impl AggregatorKind {
    pub fn validate(&self) -> Result<(), FlError> {
        let (name, v) = match *self {
            Self::FedAvg => return Ok(()),
            Self::FedProx { mu } => ("mu", mu),
            Self::FairWeighted { q } => ("q", q),
        };
        if v.is_finite() && v >= 0.0 {
            Ok(())
        } else {
            Err(FlError::Config(format!("{name} must be finite and >= 0, got {v}")))
        }
    }

    pub fn proximal_mu(&self) -> Option<f64> {
        match *self {
            Self::FedProx { mu } => Some(mu),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClientUpdate {
    pub weights: ModelWeights,
    pub shard_size: usize,
    /// Client loss on the model it received this round.
    pub local_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub weights: ModelWeights,
    /// Mixing coefficients, one per client, summing to one.
    pub coefficients: Vec<f64>,
    /// True when fairness weights were all zero and FedAvg weights were used.
    pub fell_back: bool,
}

fn normalized(raw: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = raw.iter().sum();
    (total > 0.0 && total.is_finite()).then(|| raw.iter().map(|r| r / total).collect())
}

/// Convex combination of client models.
pub fn aggregate(updates: &[ClientUpdate], kind: &AggregatorKind) -> Result<Aggregate, FlError> {
    kind.validate()?;
    let first = updates.first().ok_or(FlError::NoClients)?;
    for u in &updates[1..] {
        first.weights.check_shape(&u.weights)?;
    }
    let sizes: Vec<f64> = updates.iter().map(|u| u.shard_size as f64).collect();
    let by_size = normalized(&sizes).ok_or_else(|| FlError::Config("all shard sizes are zero".into()))?;

    let (coefficients, fell_back) = match *kind {
        AggregatorKind::FedAvg | AggregatorKind::FedProx { .. } => (by_size, false),
        AggregatorKind::FairWeighted { q: 0.0 } => (by_size, false),
        AggregatorKind::FairWeighted { q } => {
            let raw: Vec<f64> = updates
                .iter()
                .map(|u| u.shard_size as f64 * u.local_loss.max(0.0).powf(q))
                .collect();
            match normalized(&raw) {
                Some(c) => (c, false),
                None => (by_size, true),
            }
        }
    };

    let mut weights = ModelWeights::zeros(first.weights.classes(), first.weights.dim());
    for (u, c) in updates.iter().zip(&coefficients) {
        weights.axpy(*c, &u.weights);
    }
    Ok(Aggregate {
        weights,
        coefficients,
        fell_back,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn update(values: Vec<f64>, size: usize, loss: f64) -> ClientUpdate {
        ClientUpdate {
            weights: ModelWeights::from_values(2, 1, values).unwrap(),
            shard_size: size,
            local_loss: loss,
        }
    }

    #[test]
    fn fedavg_weights_by_size() {
        let ups = [update(vec![4.0, 0.0, 0.0, 8.0], 1, 1.0), update(vec![0.0, 4.0, 8.0, 0.0], 3, 1.0)];
        let agg = aggregate(&ups, &AggregatorKind::FedAvg).unwrap();
        assert_eq!(agg.coefficients, vec![0.25, 0.75]);
        assert_eq!(agg.weights.values(), &[1.0, 3.0, 6.0, 2.0]);
    }

    #[test]
    fn fairness_favours_lossy_clients() {
        let ups = [update(vec![0.0; 4], 10, 1.0), update(vec![0.0; 4], 10, 3.0)];
        let agg = aggregate(&ups, &AggregatorKind::FairWeighted { q: 1.0 }).unwrap();
        assert_eq!(agg.coefficients, vec![0.25, 0.75]);
    }

    #[test]
    fn zero_losses_fall_back_to_fedavg() {
        let ups = [update(vec![1.0; 4], 1, 0.0), update(vec![3.0; 4], 1, 0.0)];
        let agg = aggregate(&ups, &AggregatorKind::FairWeighted { q: 2.0 }).unwrap();
        assert!(agg.fell_back);
        assert_eq!(agg.coefficients, vec![0.5, 0.5]);
    }

    #[test]
    fn identical_models_survive_any_rule() {
        let w = vec![0.3, -1.2, 2.5, 0.125];
        for kind in [
            AggregatorKind::FedAvg,
            AggregatorKind::FedProx { mu: 0.1 },
            AggregatorKind::FairWeighted { q: 2.0 },
        ] {
            let ups = [update(w.clone(), 5, 0.5), update(w.clone(), 7, 2.0), update(w.clone(), 1, 1.0)];
            let agg = aggregate(&ups, &kind).unwrap();
            for (a, b) in agg.weights.values().iter().zip(&w) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        assert!(matches!(aggregate(&[], &AggregatorKind::FedAvg), Err(FlError::NoClients)));
        let odd = ClientUpdate {
            weights: ModelWeights::zeros(3, 1),
            shard_size: 1,
            local_loss: 1.0,
        };
        assert!(aggregate(&[update(vec![0.0; 4], 1, 1.0), odd], &AggregatorKind::FedAvg).is_err());
        assert!(aggregate(&[update(vec![0.0; 4], 1, 1.0)], &AggregatorKind::FedProx { mu: -1.0 }).is_err());
    }
}
