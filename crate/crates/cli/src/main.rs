use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qfp_cli::config::{resolve, ExperimentConfig};
use qfp_cli::runner;
use qfp_cli::CliError;

/// Fokker-Planck master-equation solver bench: classical references and
/// matrix-level emulations of quantum linear-ODE integration strategies.
#[derive(Parser)]
#[command(name = "qfp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trajectory/moments/solver-log CSVs.
    Run {
        /// Builtin preset name (exp1..exp4) or path to a JSON config.
        #[arg(long, conflicts_with = "preset")]
        config: Option<String>,
        /// Builtin preset name (exp1..exp4).
        #[arg(long)]
        preset: Option<String>,
        /// Output directory (default: ./out/<experiment-name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the RNG seed of seeded solvers.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run two experiments and report trace distance and moment gaps at
    /// shared time stamps.
    Compare {
        /// First experiment: preset name or JSON config path.
        #[arg(long)]
        a: String,
        /// Second experiment: preset name or JSON config path.
        #[arg(long)]
        b: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a builtin parameter sweep and write its summary CSV.
    Sweep {
        /// Study name: "steady-state" (1D double-well accuracy table) or
        /// "spiral-variance" (2D variance-vs-time curves).
        #[arg(long)]
        study: String,
        #[arg(long, default_value = "out/sweep")]
        out: PathBuf,
    },
    /// Assemble the generator for a config and print a structure report.
    Validate {
        #[arg(long, conflicts_with = "preset")]
        config: Option<String>,
        #[arg(long)]
        preset: Option<String>,
        /// If given, also writes the generator in coordinate CSV form.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(config: Option<&str>, preset: Option<&str>) -> Result<ExperimentConfig, CliError> {
    match (config, preset) {
        (Some(c), None) => resolve(c),
        (None, Some(p)) => resolve(p),
        (None, None) => Err(CliError::Validation(String::from(
            "either --config or --preset is required",
        ))),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, preset, out, seed } => {
            let mut cfg = load(config.as_deref(), preset.as_deref())?;
            if let Some(s) = seed {
                runner::override_seed(&mut cfg, s);
            }
            let out_dir = out.unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let artifacts = runner::execute(&cfg)?;
            runner::write_artifacts(&artifacts, &out_dir)?;
            println!(
                "{}: {} states on {} grid points -> {}",
                cfg.name,
                artifacts.trajectory.len(),
                artifacts.grid.total_points(),
                out_dir.display()
            );
            for (key, value) in &artifacts.summary {
                println!("  {key} = {value}");
            }
            Ok(())
        }
        Command::Compare { a, b, out, seed } => {
            let mut cfg_a = resolve(&a)?;
            let mut cfg_b = resolve(&b)?;
            if let Some(s) = seed {
                runner::override_seed(&mut cfg_a, s);
                runner::override_seed(&mut cfg_b, s);
            }
            let run_a = runner::execute(&cfg_a)?;
            let run_b = runner::execute(&cfg_b)?;
            let rows = runner::compare_runs(&run_a, &run_b)?;
            let last = rows.last().expect("compare_runs returns at least one row");
            println!(
                "{} vs {}: {} shared stamps; final trace distance {:.6e}, mean gap {:.6e}, variance gap {:.6e}",
                cfg_a.name, cfg_b.name, rows.len(), last.l1_distance, last.mean_gap, last.var_gap
            );
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)
                    .map_err(|e| CliError::Validation(format!("{}: {e}", dir.display())))?;
                runner::write_comparison(&rows, &dir.join("comparison.csv"))?;
                println!("  wrote {}", dir.join("comparison.csv").display());
            }
            Ok(())
        }
        Command::Sweep { study, out } => match study.as_str() {
            "steady-state" => {
                runner::sweep_steady_state(&out)?;
                println!("wrote {}", out.join("sweep_steady_state.csv").display());
                Ok(())
            }
            "spiral-variance" => {
                runner::sweep_spiral_variance(&out)?;
                println!("wrote {}", out.join("sweep_spiral_variance.csv").display());
                Ok(())
            }
            other => Err(CliError::Validation(format!(
                "unknown study \"{other}\"; expected steady-state or spiral-variance"
            ))),
        },
        Command::Validate { config, preset, out } => {
            let cfg = load(config.as_deref(), preset.as_deref())?;
            let report = runner::run_validate(&cfg, out.as_deref())?;
            print!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
