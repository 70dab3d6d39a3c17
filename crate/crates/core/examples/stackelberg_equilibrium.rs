//! The base station and five devices settle on a reward through repeated
//! offers; the result matches direct backward induction.

use fedbargain::game::{default_profiles, interaction_loop, leader_optimize, GameConfig, GameError};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profiles = default_profiles();
    let cfg = GameConfig::default();

    let outcome = match interaction_loop(&profiles, &cfg) {
        Ok(o) => o,
        Err(GameError::NotConverged { trace }) => {
            eprintln!("no agreement after {} offers", trace.len());
            std::process::exit(1);
        }
        Err(e) => return Err(e.into()),
    };
    for t in &outcome.trace {
        let thetas: Vec<String> = t.thetas.iter().map(|x| format!("{x:.4}")).collect();
        println!("offer {}: r = {:.5}, thetas [{}], leader {:.4}", t.round, t.reward, thetas.join(", "), t.leader_utility);
    }
    println!("\nagreed reward {:.5}, leader utility {:.4}", outcome.reward_star, outcome.leader_utility);
    for (p, (theta, pay)) in profiles.iter().zip(outcome.theta_star.iter().zip(&outcome.payments)) {
        println!("  ue{}: theta {theta:.4}, paid {pay:.4}", p.id);
    }

    let direct = leader_optimize(&profiles, &cfg)?;
    println!("backward induction alone: r* = {:.5}", direct.reward_star);
    Ok(())
}
