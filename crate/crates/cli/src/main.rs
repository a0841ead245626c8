use std::path::PathBuf;
use std::process::ExitCode;

use bsde_lab::experiment::{catalog_listing, run_experiment, ExperimentConfig, RunOptions};
use bsde_lab::LabError;
use clap::{Parser, Subcommand};

const EXIT_VERDICT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "bsde-lab", version, about = "Numerical laboratory for Lipschitz BSDEs and g-expectations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file
    Run {
        config: PathBuf,
        /// Override `paths.seed`
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (takes precedence over BSDE_LAB_OUT and `output.dir`)
        #[arg(long, env = "BSDE_LAB_OUT")]
        out_dir: Option<PathBuf>,
        /// Worker threads
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Multiply every tolerance by this factor
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
    /// List built-in generators, forward models, terminals and experiment kinds
    List,
}

fn exit_code(e: &LabError) -> u8 {
    match e {
        LabError::NumericalFailure { .. } => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

fn fail(e: LabError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn run(config: PathBuf, seed: Option<u64>, out_dir: Option<PathBuf>, jobs: usize, tolerance_scale: f64) -> ExitCode {
    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => return fail(LabError::Io(format!("{}: {e}", config.display()))),
    };
    let cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", config.display());
            return ExitCode::from(exit_code(&e));
        }
    };
    if jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: could not size the worker pool: {e}");
        }
    }
    let opts = RunOptions { seed, tolerance_scale };
    let bundle = match run_experiment(&cfg, &text, &opts) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let dir = out_dir
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("bsde-lab-out"));
    if let Err(e) = bundle.write(&dir) {
        return fail(e);
    }
    for v in &bundle.verdicts {
        println!(
            "{} {} {} (observed {:.6e}, tolerance {:.6e}){}",
            if v.pass { "PASS" } else { "FAIL" },
            v.id,
            v.label,
            v.observed,
            v.tolerance,
            if v.detail.is_empty() { String::new() } else { format!(" {}", v.detail) }
        );
    }
    println!("wrote {}", dir.display());
    if bundle.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERDICT)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", catalog_listing());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            seed,
            out_dir,
            jobs,
            tolerance_scale,
        } => run(config, seed, out_dir, jobs, tolerance_scale),
    }
}
