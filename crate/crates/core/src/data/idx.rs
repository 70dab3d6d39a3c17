//! IDX binary container (the MNIST distribution format).
//!
//! All integers are big-endian `u32`. Image files start with magic
//! `0x00000803`, then item count, rows, cols, then one unsigned byte per
//! pixel. Label files start with magic `0x00000801`, then item count, then one
//! byte per label.

use std::fs;
use std::path::Path;

use super::{DataError, Dataset};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Raw decoded image file.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn read_u32(bytes: &[u8], at: usize, file: &str) -> Result<u32, DataError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| DataError::Truncated {
            file: file.to_string(),
            expected: at + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32, file: &str) -> Result<(), DataError> {
    let found = read_u32(bytes, 0, file)?;
    if found != expected {
        return Err(DataError::BadMagic {
            file: file.to_string(),
            expected,
            found,
        });
    }
    Ok(())
}

fn payload<'a>(bytes: &'a [u8], header: usize, len: usize, file: &str) -> Result<&'a [u8], DataError> {
    let expected = header + len;
    if bytes.len() < expected {
        return Err(DataError::Truncated {
            file: file.to_string(),
            expected,
            found: bytes.len(),
        });
    }
    Ok(&bytes[header..expected])
}

pub fn parse_idx_images(bytes: &[u8], file: &str) -> Result<IdxImages, DataError> {
    check_magic(bytes, IMAGES_MAGIC, file)?;
    let count = read_u32(bytes, 4, file)? as usize;
    let rows = read_u32(bytes, 8, file)? as usize;
    let cols = read_u32(bytes, 12, file)? as usize;
    let pixels = payload(bytes, 16, count * rows * cols, file)?.to_vec();
    Ok(IdxImages { count, rows, cols, pixels })
}

pub fn parse_idx_labels(bytes: &[u8], file: &str) -> Result<Vec<u8>, DataError> {
    check_magic(bytes, LABELS_MAGIC, file)?;
    let count = read_u32(bytes, 4, file)? as usize;
    Ok(payload(bytes, 8, count, file)?.to_vec())
}

pub fn encode_idx_images(pixels: &[u8], count: usize, rows: usize, cols: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + pixels.len());
    for word in [IMAGES_MAGIC, count as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    fs::read(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads an IDX image/label pair. Pixels are scaled by 1/255; the class count
/// is one more than the largest label (at least 2).
pub fn load_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let (images, labels) = (images.as_ref(), labels.as_ref());
    let img = parse_idx_images(&read_file(images)?, &images.display().to_string())?;
    let lbl = parse_idx_labels(&read_file(labels)?, &labels.display().to_string())?;
    if img.count != lbl.len() {
        return Err(DataError::CountMismatch {
            images: img.count,
            labels: lbl.len(),
        });
    }
    let features = img.pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    let labels: Vec<usize> = lbl.iter().map(|&l| usize::from(l)).collect();
    let num_classes = labels.iter().max().map_or(2, |&m| (m + 1).max(2));
    Dataset::new(features, labels, num_classes, img.rows * img.cols)
}

/// Writes `ds` as an IDX pair with images of shape `rows x cols`. Features are
/// quantized to `round(255 * x)` after clamping to [0, 1].
pub fn write_idx(
    ds: &Dataset,
    rows: usize,
    cols: usize,
    images: impl AsRef<Path>,
    labels: impl AsRef<Path>,
) -> Result<(), DataError> {
    if rows * cols != ds.dim() {
        return Err(DataError::Invalid(format!(
            "image shape {rows}x{cols} does not match feature dimension {}",
            ds.dim()
        )));
    }
    if ds.num_classes() > 256 {
        return Err(DataError::Invalid("IDX labels hold at most 256 classes".into()));
    }
    let pixels: Vec<u8> = ds
        .features()
        .iter()
        .map(|x| (x.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let label_bytes: Vec<u8> = ds.labels().iter().map(|&l| l as u8).collect();
    for (path, bytes) in [
        (images.as_ref(), encode_idx_images(&pixels, ds.len(), rows, cols)),
        (labels.as_ref(), encode_idx_labels(&label_bytes)),
    ] {
        fs::write(path, bytes).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}
