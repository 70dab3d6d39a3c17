use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, Shard};

/// Dirichlet draws are retried with incremented seeds at most this many times.
pub const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionMode {
    Iid,
    /// Per-class client proportions drawn from a symmetric Dirichlet.
    Dirichlet { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub mode: PartitionMode,
    pub num_clients: usize,
    pub seed: u64,
}

/// Splits `ds` into `spec.num_clients` disjoint, non-empty shards whose union
/// is the whole dataset. Indices inside each shard are ascending.
pub fn partition(ds: &Dataset, spec: &PartitionSpec) -> Result<Vec<Shard>, DataError> {
    let m = spec.num_clients;
    if m == 0 || m > ds.len() {
        return Err(DataError::Invalid(format!(
            "cannot split {} samples across {m} clients",
            ds.len()
        )));
    }
    let assignment = match spec.mode {
        PartitionMode::Iid => iid(ds.len(), m, spec.seed),
        PartitionMode::Dirichlet { alpha } => {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(DataError::Invalid(format!("dirichlet alpha {alpha} must be > 0")));
            }
            (0..MAX_RESAMPLES as u64)
                .map(|attempt| dirichlet(ds, m, alpha, spec.seed.wrapping_add(attempt)))
                .find(|groups| groups.iter().all(|g| !g.is_empty()))
                .ok_or(DataError::PartitionFailed { attempts: MAX_RESAMPLES })?
        }
    };
    Ok(assignment
        .into_iter()
        .map(|mut idx| {
            idx.sort_unstable();
            ds.subset(idx)
        })
        .collect())
}

fn iid(n: usize, m: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut groups = Vec::with_capacity(m);
    let mut start = 0;
    for c in 0..m {
        let size = n / m + usize::from(c < n % m);
        groups.push(order[start..start + size].to_vec());
        start += size;
    }
    groups
}

fn dirichlet(ds: &Dataset, m: usize, alpha: f64, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Gamma::new(alpha, 1.0).expect("alpha validated by caller");
    let mut groups = vec![Vec::new(); m];
    for class in 0..ds.num_classes() {
        let mut members: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels()[i] == class).collect();
        members.shuffle(&mut rng);
        let draws: Vec<f64> = (0..m).map(|_| rng.sample(gamma)).collect();
        let total: f64 = draws.iter().sum();
        let mut cumulative = 0.0;
        let mut start = 0;
        for (client, w) in draws.iter().enumerate() {
            cumulative += w;
            // A NaN ratio (all draws underflowed) casts to 0 and is clamped.
            let end = if client == m - 1 {
                members.len()
            } else {
                ((cumulative / total) * members.len() as f64).round() as usize
            };
            let end = end.clamp(start, members.len());
            groups[client].extend_from_slice(&members[start..end]);
            start = end;
        }
    }
    groups
}

/// Normalized label histogram of a shard.
pub fn label_histogram(shard: &Shard) -> Vec<f64> {
    let mut h = vec![0.0; shard.num_classes()];
    for &l in shard.labels() {
        h[l] += 1.0;
    }
    let n = shard.len().max(1) as f64;
    h.iter_mut().for_each(|x| *x /= n);
    h
}

/// Total-variation distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
