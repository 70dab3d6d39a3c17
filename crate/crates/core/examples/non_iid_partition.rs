//! Label skew of Dirichlet partitions as the concentration shrinks.

use fedbargain::data::{gen_synthetic, label_histogram, partition, total_variation, PartitionMode, PartitionSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = gen_synthetic(10, 8, 2000, 3.0, 1)?;
    let global = label_histogram(&ds.as_shard());

    for mode in [
        PartitionMode::Iid,
        PartitionMode::Dirichlet { alpha: 10.0 },
        PartitionMode::Dirichlet { alpha: 1.0 },
        PartitionMode::Dirichlet { alpha: 0.1 },
    ] {
        let shards = partition(&ds, &PartitionSpec { mode, num_clients: 10, seed: 3 })?;
        let tv: Vec<f64> = shards.iter().map(|s| total_variation(&label_histogram(s), &global)).collect();
        let mean = tv.iter().sum::<f64>() / tv.len() as f64;
        let sizes: Vec<usize> = shards.iter().map(|s| s.len()).collect();
        println!("{mode:?}: mean distance from global label mix {mean:.3}, sizes {sizes:?}");
    }
    Ok(())
}
