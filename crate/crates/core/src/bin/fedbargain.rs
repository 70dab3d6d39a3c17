use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fedbargain::harness::{self, HarnessError, RunOptions, ScenarioConfig};

#[derive(Parser)]
#[command(name = "fedbargain", version, about = "Incentive game and federated training simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file; the built-in five-device scenario when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides the config's `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Best responses of every device over the reward grid.
    SweepReward,
    /// One device's best response over the communication-time grid.
    SweepCommtime {
        /// Device id; the config's `sweeps.commtime_ue` when omitted.
        #[arg(long)]
        ue: Option<u32>,
    },
    /// Leader utility over the reward grid and the equilibrium summary.
    LeaderCurve,
    /// Solve the game, then train with the negotiated accuracies.
    Run {
        /// Multiply every equilibrium accuracy by this factor before training.
        #[arg(long, default_value_t = 1.0)]
        theta_scale: f64,
    },
}

fn scenario(common: &Common) -> Result<ScenarioConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(path) => harness::load_config(path)?,
        None => harness::default_scenario(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<ExitCode, HarnessError> {
    let cfg = scenario(&cli.common).map_err(|e| match e {
        // an unreadable config file is a configuration problem
        HarnessError::Io { path, source } => HarnessError::Validation {
            path: path.display().to_string(),
            message: source.to_string(),
        },
        other => other,
    })?;
    let dir = cfg.output_dir.clone();
    match &cli.command {
        Command::SweepReward => {
            let res = harness::emit_reward(&cfg, &dir)?;
            println!("wrote {} records to {}", res.records.len(), dir.join(harness::REWARD_SWEEP_CSV).display());
        }
        Command::SweepCommtime { ue } => {
            let ue = ue.or(cfg.sweeps.commtime_ue).unwrap_or_default();
            let res = harness::emit_commtime(&cfg, ue, &dir)?;
            println!("wrote {} records to {}", res.records.len(), dir.join(harness::COMMTIME_SWEEP_CSV).display());
        }
        Command::LeaderCurve => {
            let curve = harness::emit_leader(&cfg, &dir)?;
            println!(
                "r* = {:.6}, curve argmax r = {:.6}; wrote {}",
                curve.equilibrium.reward_star,
                curve.curve.records[curve.argmax].reward,
                dir.display()
            );
        }
        Command::Run { theta_scale } => {
            let report = harness::emit_run(&cfg, &RunOptions { theta_scale: *theta_scale }, &dir)?;
            if let Some(failure) = &report.failure {
                eprintln!("error: {failure}");
                return Ok(ExitCode::from(1));
            }
            println!(
                "r* = {:.6}, rounds = {}, converged = {}, accuracy = {:.4}",
                report.equilibrium.reward_star,
                report.rounds_used,
                report.converged,
                report.final_accuracy.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.workers.max(1))
        .build()
        .expect("thread pool");
    match pool.install(|| execute(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
