//! One device's utility over its accuracy choice, and its best response as
//! the reward rises.

use fedbargain::game::{best_response, default_profiles, ue_utility, GameConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GameConfig::default();
    let device = &default_profiles()[2];

    let r = 5.0;
    println!("utility of ue{} at r = {r}", device.id);
    for theta in [0.01, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.8] {
        println!("  theta {theta:>4.2}: {:>8.4}", ue_utility(device, theta, r, &cfg.law)?);
    }

    println!("\nbest response");
    for r in [0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0] {
        let b = best_response(device, r, &cfg)?;
        println!("  r {r:>4.1}: theta* {:.5}  utility {:>8.4}", b.theta, b.utility);
    }
    Ok(())
}
