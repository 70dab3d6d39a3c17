//! How a device's local accuracy trades local iterations against global
//! rounds, and what that costs each of the five reference devices.

use fedbargain::cost::{self, AccuracyLaw, CostTerms};
use fedbargain::game::default_profiles;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let law = AccuracyLaw::default();
    let profiles = default_profiles();

    println!("{:>6} {:>10} {:>10}", "theta", "local", "rounds");
    for theta in [0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.95] {
        println!(
            "{theta:>6.2} {:>10.2} {:>10.2}",
            cost::local_iterations(theta, &law)?,
            cost::global_rounds(theta, &law)?
        );
    }

    println!("\nsession cost per device");
    print!("{:>6}", "theta");
    for p in &profiles {
        print!(" {:>9}", format!("ue{}", p.id));
    }
    println!();
    for theta in [0.05, 0.1, 0.2, 0.4, 0.6, 0.8] {
        print!("{theta:>6.2}");
        for p in &profiles {
            print!(" {:>9.3}", CostTerms::of(p).session(theta, &law)?);
        }
        println!();
    }

    for p in &profiles {
        println!(
            "ue{}: {:.3e} J and {:.3e} s per iteration, upload {:.1}",
            p.id,
            cost::local_iter_energy(p),
            cost::local_iter_time(p),
            p.comm_time_norm
        );
    }
    Ok(())
}
