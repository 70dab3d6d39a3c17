//! Datasets, client shards, and their provenance.

mod idx;
mod partition;
mod synthetic;

use std::path::PathBuf;

use thiserror::Error;

pub use idx::{encode_idx_images, encode_idx_labels, load_idx, parse_idx_images, parse_idx_labels, write_idx, IdxImages, IMAGES_MAGIC, LABELS_MAGIC};
pub use partition::{label_histogram, partition, total_variation, PartitionMode, PartitionSpec, MAX_RESAMPLES};
pub use synthetic::gen_synthetic;

/// Environment variable naming the directory that holds IDX files.
pub const DATA_DIR_ENV: &str = "FEDBARGAIN_DATA_DIR";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("bad IDX magic in {file}: expected {expected:#010x}, found {found:#010x}")]
    BadMagic {
        file: String,
        expected: u32,
        found: u32,
    },
    #[error("truncated IDX payload in {file}: expected {expected} bytes, found {found}")]
    Truncated {
        file: String,
        expected: usize,
        found: usize,
    },
    #[error("IDX image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("could not draw non-empty shards after {attempts} attempts; use more samples or a larger alpha")]
    PartitionFailed { attempts: usize },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Labelled samples, features stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    num_classes: usize,
    dim: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<usize>, num_classes: usize, dim: usize) -> Result<Self, DataError> {
        let n = labels.len();
        if num_classes < 2 {
            return Err(DataError::Invalid(format!("need at least 2 classes, got {num_classes}")));
        }
        if n < num_classes {
            return Err(DataError::Invalid(format!("{n} samples cannot cover {num_classes} classes")));
        }
        if dim == 0 || features.len() != n * dim {
            return Err(DataError::Invalid(format!(
                "feature matrix has {} entries, expected {n} x {dim}",
                features.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(DataError::Invalid(format!("label {bad} >= class count {num_classes}")));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(DataError::Invalid("non-finite feature".into()));
        }
        Ok(Self {
            features,
            labels,
            num_classes,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: Vec<usize>) -> Shard {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in &indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Shard {
            indices,
            features,
            labels,
            num_classes: self.num_classes,
            dim: self.dim,
        }
    }

    /// The whole dataset as a single shard.
    pub fn as_shard(&self) -> Shard {
        self.subset((0..self.len()).collect())
    }
}

/// One client's slice of a dataset. `indices` point back into the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Shard {
    pub indices: Vec<usize>,
    features: Vec<f64>,
    labels: Vec<usize>,
    num_classes: usize,
    dim: usize,
}

impl Shard {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], usize)> {
        self.features.chunks_exact(self.dim).zip(self.labels.iter().copied())
    }

    /// Concatenation of several shards, in order.
    pub fn concat(shards: &[Shard]) -> Option<Shard> {
        let first = shards.first()?;
        let mut out = Shard {
            indices: Vec::new(),
            features: Vec::new(),
            labels: Vec::new(),
            num_classes: first.num_classes,
            dim: first.dim,
        };
        for s in shards {
            out.indices.extend_from_slice(&s.indices);
            out.features.extend_from_slice(&s.features);
            out.labels.extend_from_slice(&s.labels);
        }
        Some(out)
    }
}

/// Directory holding IDX files: the configured path if any, otherwise
/// `FEDBARGAIN_DATA_DIR`.
pub fn resolve_data_dir(configured: Option<PathBuf>) -> Option<PathBuf> {
    configured.or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
}
