use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod design_io;
mod error;
mod external;
mod problem;

use config::RunConfig;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "krigrisk", version, about = "Failure-probability estimation with Kriging surrogates")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

/// Overrides applied on top of the configuration file.
#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// J_Rn, J1, J2, J3, J4, J_Dev or J_Sn_ref.
    #[arg(long, global = true)]
    criterion: Option<String>,
    /// Number of sequential evaluations after the initial design.
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long, global = true)]
    cloud_size: Option<usize>,
    /// Quantile levels, comma separated or repeated.
    #[arg(long, global = true, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Credible-interval split: a number in (0, 1) or "optimize".
    #[arg(long, global = true)]
    beta: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Failure report from fitted models or a design table.
    Estimate {
        #[arg(long)]
        model: Vec<PathBuf>,
        #[arg(long)]
        design: Option<PathBuf>,
    },
    /// Sequential design; writes the per-iteration history and final report.
    Sur {
        #[arg(long)]
        initial_design: Option<PathBuf>,
    },
    /// Crude Monte Carlo on the oracle itself.
    McBaseline {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Maximin Latin hypercube design.
    Lhs {
        #[arg(long)]
        size: Option<usize>,
        /// Also run the oracle on the design.
        #[arg(long)]
        evaluate: bool,
    },
    /// Fast estimators versus brute-force references on small clouds.
    Oracle,
    /// Fits one model per response column of a design table.
    Fit {
        #[arg(long)]
        design: Option<PathBuf>,
        /// Kernel family or "loo".
        #[arg(long)]
        family: Option<String>,
    },
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(d) = &common.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(c) = &common.criterion {
        cfg.sur.criterion = c.clone();
    }
    if let Some(b) = common.budget {
        cfg.sur.budget = b;
    }
    if let Some(n) = common.cloud_size {
        cfg.estimate.cloud_size = n;
        cfg.sur.cloud_size = n;
        cfg.oracle_check.cloud_size = n;
    }
    if !common.alpha.is_empty() {
        cfg.report.alphas = common.alpha.clone();
    }
    if let Some(b) = &common.beta {
        cfg.report.beta = b.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = load(&cli.common)?;
    match cli.command {
        Cmd::Estimate { model, design } => {
            if !model.is_empty() {
                cfg.estimate.models = model;
            }
            if design.is_some() {
                cfg.estimate.design = design;
            }
            let report = commands::estimate(&cfg)?;
            print!("{}", report.to_text());
        }
        Cmd::Sur { initial_design } => {
            if initial_design.is_some() {
                cfg.sur.initial_design = initial_design;
            }
            let out = commands::sur(&cfg)?;
            println!(
                "stopped: {:?} after {} evaluations",
                out.stop,
                out.state.design_size()
            );
            print!("{}", out.state.last().report.to_text());
        }
        Cmd::McBaseline { samples } => {
            if let Some(n) = samples {
                cfg.mc.samples = n;
            }
            print!("{}", commands::mc_baseline(&cfg)?);
        }
        Cmd::Lhs { size, evaluate } => {
            if let Some(n) = size {
                cfg.lhs.size = n;
            }
            let t = commands::lhs(&cfg, evaluate)?;
            println!("{} points written to {}", t.points.len(), cfg.out_dir.join("design.csv").display());
        }
        Cmd::Oracle => {
            print!("{}", commands::oracle_check(&cfg)?);
        }
        Cmd::Fit { design, family } => {
            if design.is_some() {
                cfg.fit.design = design;
            }
            if let Some(f) = family {
                cfg.fit.family = f;
            }
            for (j, f) in commands::fit_cmd(&cfg)?.iter().enumerate() {
                println!("response {}: {} loo_rmse {:e}", j + 1, f.posterior.kernel().family, f.loo_rmse);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("krigrisk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
