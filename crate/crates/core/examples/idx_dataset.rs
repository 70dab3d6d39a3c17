//! Loads MNIST-style IDX files from `FEDBARGAIN_DATA_DIR` when they are
//! there; otherwise writes a small synthetic set in IDX form and reads it
//! back.

use fedbargain::data::{gen_synthetic, load_idx, resolve_data_dir, write_idx, Dataset};

const IMAGES: &str = "train-images-idx3-ubyte";
const LABELS: &str = "train-labels-idx1-ubyte";

fn describe(ds: &Dataset) {
    let mut counts = vec![0usize; ds.num_classes()];
    for &l in ds.labels() {
        counts[l] += 1;
    }
    println!("{} samples, {} features, class counts {counts:?}", ds.len(), ds.dim());
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if let Some(dir) = resolve_data_dir(None) {
        let (images, labels) = (dir.join(IMAGES), dir.join(LABELS));
        if images.exists() && labels.exists() {
            let ds = load_idx(&images, &labels)?;
            describe(&ds);
            return Ok(());
        }
        eprintln!("{} has no {IMAGES}/{LABELS}; using synthetic data", dir.display());
    }

    let ds = gen_synthetic(4, 16, 200, 3.0, 5)?;
    let tmp = tempdir()?;
    let (images, labels) = (tmp.join("images.idx"), tmp.join("labels.idx"));
    write_idx(&ds, 4, 4, &images, &labels)?;
    let back = load_idx(&images, &labels)?;
    describe(&back);
    let err = ds
        .features()
        .iter()
        .zip(back.features())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("largest quantization error {err:.4} (at most 1/510)");
    assert_eq!(ds.labels(), back.labels());
    std::fs::remove_dir_all(&tmp)?;
    Ok(())
}

fn tempdir() -> std::io::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join(format!("fedbargain-idx-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}
