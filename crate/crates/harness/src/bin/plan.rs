use std::path::PathBuf;
use std::process::ExitCode;

use aags_harness::{oracles, read_records, run_to_dir, summarize, ExecMode, ExperimentConfig, HarnessError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "plan", version, about = "Run and summarize ambiguity-attitude planning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play every cell of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides run.out; default `results`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed (overrides run.seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 1 runs serially.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Aggregate `records.csv` of a finished run into `summary.json`.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run a brute-force reference check.
    Oracle {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(oracles::NAMES))]
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config, out, seed, jobs } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.run.seed = seed;
            }
            let out = out.or_else(|| cfg.run.out.clone()).unwrap_or_else(|| PathBuf::from("results"));
            let exp = run_to_dir(&cfg, ExecMode::from_jobs(jobs), &out)?;
            print_summary(&exp.summary);
            eprintln!("{} records written to {}", exp.records.len(), out.display());
        }
        Command::Summarize { input } => {
            let records = read_records(&input.join("records.csv"))?;
            let summary = summarize(&records)?;
            aags_harness::runner::write_json_file(&input.join("summary.json"), &summary)?;
            print_summary(&summary);
        }
        Command::Oracle { name, seed } => {
            let report = oracles::run(&name, seed)?;
            println!("{report}");
            if !report.passed {
                return Err(HarnessError::Config(format!("oracle {name} disagrees")));
            }
        }
    }
    Ok(())
}

fn print_summary(rows: &[aags_harness::SummaryRow]) {
    println!("env\talgo\talpha\tdist\tn\treturn\tsteps\tsuccess");
    for r in rows {
        let alpha = r.alpha.map(|a| a.to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{}\t{}\t{}\t{}\t{}\t{:.4}±{:.4}\t{:.1}\t{:.2}",
            r.env,
            r.algo,
            alpha,
            r.distance_bucket,
            r.episodes,
            r.discounted_return_mean,
            r.discounted_return_std,
            r.steps_mean,
            r.success_rate
        );
    }
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
