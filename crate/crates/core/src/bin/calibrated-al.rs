use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use calibrated_al::data::{gen_blobs, gen_two_moons, make_imbalanced, write_csv};
use calibrated_al::experiment::{emit_reports, run_experiment, ExperimentConfig};
use calibrated_al::sampling::{score_probability_file, write_scores, Sampler};
use calibrated_al::{Purpose, Result, RngStream};

#[derive(Parser)]
#[command(version, about = "Pool-based active learning simulations")]
struct Cli {
    /// Replace the configured seeds (comma-separated); `gen-data` uses the first.
    #[arg(long, global = true, value_delimiter = ',')]
    seed_override: Vec<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of an experiment config and write its reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dump_samples: bool,
    },
    /// Score each row of a CSV of class probabilities.
    Score {
        #[arg(long)]
        method: Sampler,
        #[arg(long)]
        probs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic labeled dataset.
    GenData {
        #[arg(long, value_enum)]
        generator: Generator,
        /// Total rows (two_moons).
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0.2)]
        noise: f64,
        #[arg(long, default_value_t = 100)]
        n_per_class: usize,
        #[arg(long, default_value_t = 3)]
        num_classes: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        spread: f64,
        /// Classes to thin out (comma-separated).
        #[arg(long, value_delimiter = ',')]
        minority: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        ratio: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Generator {
    Blobs,
    TwoMoons,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            dump_samples,
        } => {
            let mut c = ExperimentConfig::from_file(&config)?;
            if !cli.seed_override.is_empty() {
                c.seeds = cli.seed_override;
            }
            c.dump_samples |= dump_samples;
            c.validate()?;
            let out = out
                .or_else(|| c.output_dir.clone())
                .ok_or_else(|| calibrated_al::Error::Config("no --out given and no output_dir in config".into()))?;
            let outcome = run_experiment(&c)?;
            emit_reports(&outcome, &out)?;
            println!("cycle  labeled  accuracy         oe               ece");
            for r in &outcome.summary {
                println!(
                    "{:>5}  {:>7}  {:.4} ± {:.4}  {:.4} ± {:.4}  {:.4} ± {:.4}",
                    r.cycle, r.labeled, r.accuracy.mean, r.accuracy.std, r.oe.mean, r.oe.std, r.ece.mean, r.ece.std
                );
            }
            println!("reports written to {}", out.display());
        }
        Command::Score { method, probs, out } => {
            let scores = score_probability_file(method, &probs)?;
            write_scores(&out, &scores)?;
        }
        Command::GenData {
            generator,
            n,
            noise,
            n_per_class,
            num_classes,
            dim,
            spread,
            minority,
            ratio,
            out,
        } => {
            let seed = cli.seed_override.first().copied().unwrap_or(0);
            let mut rng = RngStream::new(seed, Purpose::DataGen);
            let mut d = match generator {
                Generator::Blobs => gen_blobs(n_per_class, num_classes, dim, spread, &mut rng)?,
                Generator::TwoMoons => gen_two_moons(n, noise, &mut rng)?,
            };
            if !minority.is_empty() {
                let classes: BTreeSet<usize> = minority.into_iter().collect();
                d = make_imbalanced(
                    &d,
                    &classes,
                    ratio,
                    &mut RngStream::with_substream(seed, Purpose::DataGen, 1),
                )?;
            }
            write_csv(&d, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
