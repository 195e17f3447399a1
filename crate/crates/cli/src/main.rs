//! `polarsim` — polarizer cascade, Bell-combination, and EPR
//! coincidence simulations from the command line.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! budget exceeded.

mod commands;
mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{apply_config_text, parse_grid, RunConfig};

#[derive(Parser)]
#[command(
    name = "polarsim",
    version,
    about = "Polarizer cascades, Bell combinations, and EPR coincidences under quantum and hidden-variable models"
)]
struct Cli {
    /// Config file (flat `key = value` lines, `#` comments, optional [sections])
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long, global = true, value_name = "FMT")]
    format: Option<String>,
    /// Write the report to this path instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<String>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Pedestal of the generalized Malus law, in [0, 1]
    #[arg(long, global = true, value_name = "EPS")]
    epsilon: Option<f64>,
    /// Base RNG seed
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,
    /// Quadrature tolerance
    #[arg(long, global = true, value_name = "TOL")]
    tol: Option<f64>,
    /// Hidden-variable response steepness parameter a
    #[arg(long = "hv-a", global = true, value_name = "A")]
    hv_a: Option<f64>,
    /// Hidden-variable response exponent e
    #[arg(long = "hv-e", global = true, value_name = "E")]
    hv_e: Option<f64>,
    /// Hidden-variable response contrast parameter c
    #[arg(long = "hv-c", global = true, value_name = "C")]
    hv_c: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-polarizer transmission over a deviation grid
    Transmit {
        /// Response law: ideal, malus, or hv
        #[arg(long)]
        law: Option<String>,
        /// Deviation grid in degrees, start:stop:step
        #[arg(long)]
        grid: Option<String>,
    },
    /// Transmission through a polarizer cascade
    Cascade {
        /// Comma-separated axis angles in degrees; first must be 0
        #[arg(long)]
        axes: Option<String>,
        /// Model: qm, hv, or both
        #[arg(long)]
        model: Option<String>,
    },
    /// Minimum-transmission middle-polarizer sweep over alpha
    Sweep {
        /// Model: qm, hv, or both
        #[arg(long)]
        model: Option<String>,
        /// Alpha grid in degrees, start:stop:step
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Bell combination operator-norm search and CHSH reference values
    Bell {
        /// Scenario: classical, tensor, or free
        #[arg(long)]
        scenario: Option<String>,
        /// Operator dimension: 2, 4, or 8
        #[arg(long)]
        dim: Option<usize>,
        /// Random restarts for the search
        #[arg(long)]
        restarts: Option<usize>,
        /// CHSH analyzer settings in degrees: a,a',b,b'
        #[arg(long)]
        settings: Option<String>,
    },
    /// Monte Carlo EPR coincidence curve under the hidden-variable model
    Epr {
        /// Comma-separated relative analyzer angles in degrees
        #[arg(long)]
        angles: Option<String>,
        /// Photon pairs per grid point
        #[arg(long)]
        n: Option<u64>,
    },
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("polarsim: {msg}");
    ExitCode::from(2)
}

/// Merges defaults, config file, and flags (in that precedence order)
/// into the final `RunConfig`.
fn resolve_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file `{}`: {e}", path.display()))?;
        apply_config_text(&mut cfg, &text)
            .map_err(|e| format!("in config file `{}`: {}", path.display(), e.message))?;
    }
    // Global flags, routed through the same keyed setters as the file.
    let mut set = |key: &str, value: Option<String>| -> Result<(), String> {
        if let Some(v) = value {
            cfg.apply(key, &v).map_err(|e| e.message)?;
        }
        Ok(())
    };
    set("output.format", cli.format.clone())?;
    set("output.path", cli.out.clone())?;
    set("threads", cli.threads.map(|v| v.to_string()))?;
    set("epsilon", cli.epsilon.map(|v| v.to_string()))?;
    set("seed", cli.seed.map(|v| v.to_string()))?;
    set("tol", cli.tol.map(|v| v.to_string()))?;
    set("hv.a", cli.hv_a.map(|v| v.to_string()))?;
    set("hv.e", cli.hv_e.map(|v| v.to_string()))?;
    set("hv.c", cli.hv_c.map(|v| v.to_string()))?;
    match &cli.command {
        Command::Transmit { law, grid } => {
            set("transmit.law", law.clone())?;
            if let Some(g) = grid {
                cfg.grid = parse_grid(g).map_err(|e| e.message)?;
            }
        }
        Command::Cascade { axes, model } => {
            set("cascade.axes", axes.clone())?;
            set("cascade.model", model.clone())?;
        }
        Command::Sweep { model, alpha } => {
            set("sweep.model", model.clone())?;
            if let Some(g) = alpha {
                cfg.grid = parse_grid(g).map_err(|e| e.message)?;
            }
        }
        Command::Bell {
            scenario,
            dim,
            restarts,
            settings,
        } => {
            set("bell.scenario", scenario.clone())?;
            set("bell.dim", dim.map(|v| v.to_string()))?;
            set("bell.restarts", restarts.map(|v| v.to_string()))?;
            set("bell.settings", settings.clone())?;
        }
        Command::Epr { angles, n } => {
            set("epr.angles", angles.clone())?;
            set("n_pairs", n.map(|v| v.to_string()))?;
        }
    }
    cfg.validate().map_err(|e| e.message)?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve_config(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => return usage_error(msg),
    };
    if cfg.threads > 0 {
        // Ignore the error from a pool that is already configured (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    let result = match &cli.command {
        Command::Transmit { .. } => commands::run_transmit(&cfg),
        Command::Cascade { .. } => commands::run_cascade(&cfg),
        Command::Sweep { .. } => commands::run_sweep(&cfg),
        Command::Bell { .. } => commands::run_bell(&cfg),
        Command::Epr { .. } => commands::run_epr(&cfg),
    };
    let report = match result {
        Ok(report) => report,
        Err(e) => {
            eprintln!("polarsim: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let rendered = report.render(cfg.format);
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered.as_bytes()) {
                return usage_error(format!("cannot write output path `{path}`: {e}"));
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(rendered.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
        }
    }
    ExitCode::SUCCESS
}
