use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DataError, Dataset};

/// Attempts at drawing well-spread class directions when there are more
/// classes than dimensions.
const DIRECTION_ATTEMPTS: usize = 1000;

/// Gaussian blobs: `k` classes with unit-variance noise around means placed
/// on a sphere of radius `separation`. Class `c` gets `n / k` samples, plus
/// one for the first `n % k` classes. Features are min-max scaled to [0, 1]
/// per column afterwards.
pub fn gen_synthetic(k: usize, d: usize, n: usize, separation: f64, seed: u64) -> Result<Dataset, DataError> {
    if k < 2 || d == 0 || n < k {
        return Err(DataError::Invalid(format!(
            "synthetic data needs k >= 2, d >= 1, n >= k (got k={k}, d={d}, n={n})"
        )));
    }
    if !(separation.is_finite() && separation >= 0.0) {
        return Err(DataError::Invalid(format!("separation {separation} must be finite and >= 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<Vec<f64>> = class_directions(k, d, &mut rng)
        .into_iter()
        .map(|u| u.into_iter().map(|x| x * separation).collect())
        .collect();

    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (c, mean) in means.iter().enumerate() {
        let count = n / k + usize::from(c < n % k);
        for _ in 0..count {
            features.extend(mean.iter().map(|m| m + rng.sample::<f64, _>(StandardNormal)));
            labels.push(c);
        }
    }
    min_max_scale(&mut features, d);
    Dataset::new(features, labels, k, d)
}

/// Unit vectors, orthonormal when `k <= d`; otherwise random with a minimum
/// pairwise chord of 0.5 when one can be found.
fn class_directions(k: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let gaussian = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..d).map(|_| rng.sample(StandardNormal)).collect() };
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(k);
    while dirs.len() < k {
        if dirs.len() < d {
            let mut v = gaussian(rng);
            for u in &dirs {
                let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
            }
            if normalize(&mut v) {
                dirs.push(v);
            }
            continue;
        }
        let mut last = Vec::new();
        for _ in 0..DIRECTION_ATTEMPTS {
            let mut v = gaussian(rng);
            if !normalize(&mut v) {
                continue;
            }
            let spread = dirs.iter().all(|u| chord(u, &v) >= 0.5);
            last = v;
            if spread {
                break;
            }
        }
        if !last.is_empty() {
            dirs.push(last);
        }
    }
    dirs
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

fn chord(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn min_max_scale(features: &mut [f64], d: usize) {
    for j in 0..d {
        let column = features.iter().skip(j).step_by(d);
        let (lo, hi) = column.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let span = hi - lo;
        for x in features.iter_mut().skip(j).step_by(d) {
            *x = if span > 0.0 { (*x - lo) / span } else { 0.0 };
        }
    }
}
