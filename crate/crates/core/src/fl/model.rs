use serde::Serialize;

use super::FlError;
use crate::data::Shard;

/// Multinomial logistic regression parameters: one row per class, each row
/// holding `dim` feature weights followed by a bias.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelWeights {
    classes: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ModelWeights {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Self {
            classes,
            cols: dim + 1,
            values: vec![0.0; classes * (dim + 1)],
        }
    }

    pub fn from_values(classes: usize, dim: usize, values: Vec<f64>) -> Result<Self, FlError> {
        if values.len() != classes * (dim + 1) {
            return Err(FlError::Dimension(format!(
                "{} values for a {classes} x {} weight matrix",
                values.len(),
                dim + 1
            )));
        }
        Ok(Self { classes, cols: dim + 1, values })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.cols - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, class: usize, col: usize) -> f64 {
        self.values[class * self.cols + col]
    }

    pub fn row(&self, class: usize) -> &[f64] {
        &self.values[class * self.cols..(class + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &ModelWeights) {
        self.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += alpha * b);
    }

    pub fn max_abs_diff(&self, other: &ModelWeights) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn same_shape(&self, other: &ModelWeights) -> bool {
        self.classes == other.classes && self.cols == other.cols
    }

    pub(crate) fn check_shape(&self, other: &ModelWeights) -> Result<(), FlError> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(FlError::Dimension(format!(
                "{}x{} vs {}x{} weight matrices",
                self.classes, self.cols, other.classes, other.cols
            )))
        }
    }

    fn logits_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.cols - 1;
        for (c, z) in out.iter_mut().enumerate() {
            let row = self.row(c);
            *z = row[..d].iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + row[d];
        }
    }
}

fn check_inputs(w: &ModelWeights, shard: &Shard) -> Result<(), FlError> {
    if shard.is_empty() {
        return Err(FlError::EmptyShard);
    }
    if w.dim() != shard.dim() {
        return Err(FlError::Dimension(format!(
            "model expects {} features, shard has {}",
            w.dim(),
            shard.dim()
        )));
    }
    if let Some(&l) = shard.labels().iter().find(|&&l| l >= w.classes()) {
        return Err(FlError::Dimension(format!("label {l} >= model class count {}", w.classes())));
    }
    if !w.is_finite() {
        return Err(FlError::NonFinite("model weights".into()));
    }
    Ok(())
}

/// Mean softmax cross-entropy over `shard` plus `(l2 / 2) * ||w||_F^2`, and
/// its gradient.
pub fn loss_and_grad(w: &ModelWeights, shard: &Shard, l2: f64) -> Result<(f64, ModelWeights), FlError> {
    check_inputs(w, shard)?;
    let k = w.classes();
    let d = w.dim();
    let mut grad = ModelWeights::zeros(k, d);
    let mut z = vec![0.0; k];
    let mut loss = 0.0;
    for (x, y) in shard.rows() {
        w.logits_into(x, &mut z);
        let peak = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shifted_true = z[y] - peak;
        let mut total = 0.0;
        for zc in z.iter_mut() {
            *zc = (*zc - peak).exp();
            total += *zc;
        }
        loss += total.ln() - shifted_true;
        for (c, pc) in z.iter().enumerate() {
            let residual = pc / total - if c == y { 1.0 } else { 0.0 };
            let row = &mut grad.values[c * (d + 1)..(c + 1) * (d + 1)];
            row[..d].iter_mut().zip(x).for_each(|(g, xi)| *g += residual * xi);
            row[d] += residual;
        }
    }
    let n = shard.len() as f64;
    loss /= n;
    grad.values.iter_mut().for_each(|g| *g /= n);
    if l2 > 0.0 {
        loss += 0.5 * l2 * w.norm_sq();
        grad.axpy(l2, w);
    }
    if !loss.is_finite() || !grad.is_finite() {
        return Err(FlError::NonFinite("loss or gradient".into()));
    }
    Ok((loss, grad))
}

/// Fraction of samples whose largest logit is the true label (first class wins ties).
pub fn accuracy(w: &ModelWeights, shard: &Shard) -> Result<f64, FlError> {
    check_inputs(w, shard)?;
    let mut z = vec![0.0; w.classes()];
    let hits = shard
        .rows()
        .filter(|(x, y)| {
            w.logits_into(x, &mut z);
            crate::game::search::argmax(&z) == Some(*y)
        })
        .count();
    Ok(hits as f64 / shard.len() as f64)
}
