use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sparsense_harness::config::{self, PRESETS};
use sparsense_harness::oracle;
use sparsense_harness::report::{run_experiment, write_outputs, Averaging};
use sparsense_harness::verify::{self, Outcome};

#[derive(Parser)]
#[command(name = "sparsense", version, about = "Online sparse spectrum estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML experiment file and write CSV results.
    Run {
        /// Preset name (see `list`) or path to a config file.
        experiment: String,
        /// Override the number of trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Rescale to this window length, keeping M/N fixed.
        #[arg(long)]
        scale: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Also write a whitespace-separated `.dat` file per curve set.
        #[arg(long)]
        gnuplot: bool,
        /// Average per-trial dB values instead of linear r-MSE.
        #[arg(long)]
        mean_of_db: bool,
    },
    /// List the built-in presets.
    List {
        /// Print the TOML of this preset.
        #[arg(long)]
        show: Option<String>,
    },
    /// Run the randomized support-recovery and bias property suites.
    Verify {
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cross-check core operations against brute-force references.
    Oracle {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { experiment, trials, seed, scale, out, gnuplot, mean_of_db } => {
            let mut spec = config::load(&experiment)?;
            if let Some(len) = scale {
                spec = config::rescale(&spec, len)?;
            }
            if let Some(t) = trials {
                spec.trials = t;
            }
            if let Some(s) = seed {
                spec.seed = s;
            }
            spec.validate()?;
            let averaging = if mean_of_db { Averaging::Decibel } else { Averaging::Linear };
            let start = Instant::now();
            let results = run_experiment(&spec)?;
            eprintln!("{}: {} trial(s) in {:.1?}", spec.name, spec.trials, start.elapsed());
            for res in &results {
                for row in res.summary(averaging) {
                    println!(
                        "M={:<5} {:<16} final {:>8.2} dB  steady {:>8.2} dB  s {:>6.1}  to -15 dB {:>8.0} ({}/{})",
                        row.measurements,
                        row.label,
                        row.final_rmse_db,
                        row.steady_rmse_db,
                        row.final_s_mean,
                        row.iters_to_minus15_db,
                        row.reached_minus15_db,
                        row.trials
                    );
                }
            }
            let written = write_outputs(&out, &results, averaging, gnuplot)
                .with_context(|| format!("writing results to {}", out.display()))?;
            for path in written {
                eprintln!("wrote {}", path.display());
            }
        }
        Command::List { show: Some(name) } => {
            let (_, text) =
                PRESETS.iter().find(|(n, _)| *n == name).with_context(|| format!("no preset named {name:?}"))?;
            print!("{text}");
        }
        Command::List { show: None } => {
            for (name, _) in PRESETS {
                let spec = config::preset(name).expect("shipped presets parse");
                println!("{name:<14} {}", spec.description);
            }
        }
        Command::Verify { draws, seed } => report_outcomes(verify::run_all(draws, seed))?,
        Command::Oracle { seed } => report_outcomes(oracle::run_all(seed))?,
    }
    Ok(())
}

fn report_outcomes(outcomes: Vec<Outcome>) -> Result<()> {
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    for o in &outcomes {
        println!("{o}");
    }
    anyhow::ensure!(failed == 0, "{failed} check(s) failed");
    Ok(())
}
