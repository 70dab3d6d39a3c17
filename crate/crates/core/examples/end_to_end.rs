//! Negotiate local accuracies, then train with them.
//!
//!     cargo run --example end_to_end -- [config.json]

use fedbargain::harness::{default_scenario, load_config, run_end_to_end, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => load_config(path)?,
        None => default_scenario(),
    };

    for scale in [1.0, 0.5] {
        let report = run_end_to_end(&cfg, &RunOptions { theta_scale: scale })?;
        if let Some(f) = &report.failure {
            return Err(f.clone().into());
        }
        let thetas: Vec<String> = report.training_thetas.iter().map(|t| format!("{t:.3}")).collect();
        println!(
            "theta scale {scale}: r* {:.4}, thetas [{}], {} rounds, accuracy {:.3}, simulated time {:.2}",
            report.equilibrium.reward_star,
            thetas.join(", "),
            report.rounds_used,
            report.final_accuracy.unwrap_or(f64::NAN),
            report.sim_time
        );
    }
    Ok(())
}
