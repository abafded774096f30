use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use doral::harness::{emit_csv, render_plots, resolve, run_experiment, PlotFormat, PRESET_NAMES};

#[derive(Parser)]
#[command(name = "doral", version, about = "Budgeted contextual bandits with delayed feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a preset name or a TOML config file.
    Run {
        config: String,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of replications.
        #[arg(long)]
        reps: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip chart rendering.
        #[arg(long)]
        no_plots: bool,
        /// Chart format.
        #[arg(long, value_enum, default_value = "svg")]
        format: Format,
        /// Suppress per-replication progress lines.
        #[arg(long, short)]
        quiet: bool,
    },
    /// List the built-in presets.
    Presets,
    /// Check a config file or preset without running it.
    Validate { config: String },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Svg,
    Png,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match resolve(&config) {
            Ok(cfg) => {
                eprintln!(
                    "{}: ok ({} policies, {} replications)",
                    cfg.scenario,
                    cfg.policies.len(),
                    cfg.replications
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Run {
            config,
            seed,
            reps,
            out,
            no_plots,
            format,
            quiet,
        } => {
            let mut cfg = match resolve(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(r) = reps {
                cfg.replications = r;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if let Err(e) = cfg.validate() {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            let progress = |line: &str| eprintln!("{line}");
            let progress: Option<&(dyn Fn(&str) + Sync)> = if quiet { None } else { Some(&progress) };
            let result = match run_experiment(&cfg, progress) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let results = [result];
            let paths = match emit_csv(&results, &cfg.output_dir) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            println!("{}", paths.curves.display());
            println!("{}", paths.runs.display());
            println!("{}", paths.diagnostics.display());
            if !no_plots {
                let format = match format {
                    Format::Svg => PlotFormat::Svg,
                    Format::Png => PlotFormat::Png,
                };
                match render_plots(&results, &cfg.output_dir, format) {
                    Ok(files) => files.iter().for_each(|f| println!("{}", f.display())),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            ExitCode::SUCCESS
        }
    }
}
