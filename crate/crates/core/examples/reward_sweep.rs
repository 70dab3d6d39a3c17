//! Writes the reward sweep, communication-time sweep and leader curve for
//! the reference scenario as CSV.
//!
//!     cargo run --example reward_sweep -- [output-dir]

use std::path::PathBuf;

use fedbargain::harness::{self, default_scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "results/sweeps".into()).into();
    let cfg = default_scenario();

    let reward = harness::emit_reward(&cfg, &dir)?;
    let ue = cfg.sweeps.commtime_ue.unwrap_or(0);
    let commtime = harness::emit_commtime(&cfg, ue, &dir)?;
    let leader = harness::emit_leader(&cfg, &dir)?;

    println!("{} reward records, {} commtime records", reward.records.len(), commtime.records.len());
    for p in &cfg.profiles {
        let curve: Vec<f64> = reward.records.iter().filter(|r| r.ue_id == p.id).map(|r| r.theta_star).collect();
        println!("ue{}: theta* from {:.4} at r=0 to {:.4} at r=10", p.id, curve[0], curve[curve.len() - 1]);
    }
    let best = &leader.curve.records[leader.argmax];
    println!(
        "leader curve peaks at r = {:.4} (utility {:.4}); refined r* = {:.5}",
        best.reward, best.bs_utility, leader.equilibrium.reward_star
    );
    println!("wrote {}", dir.display());
    Ok(())
}
