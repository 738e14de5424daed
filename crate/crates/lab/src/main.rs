use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use indep_core::euclidean::TorusGrid;
use indep_core::RandomSource;
use indep_lab::{run, validate, ExperimentConfig, LabCliError};

#[derive(Parser)]
#[command(name = "lab", version, about = "Run independence-density experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write results plus a manifest.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Create or inspect grid files.
    Grid {
        #[command(subcommand)]
        action: GridAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GridKind {
    Constant,
    RandomBinary,
    Blobs,
}

#[derive(Subcommand)]
enum GridAction {
    /// Write a generated grid and its JSON sidecar.
    Gen {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "blobs")]
        kind: GridKind,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        side: f64,
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Fill value for constant grids.
        #[arg(long, default_value_t = 1.0)]
        value: f64,
        /// Cell probability for random binary grids.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 32)]
        count: usize,
        #[arg(long, default_value_t = 0.02)]
        r_min: f64,
        #[arg(long, default_value_t = 0.08)]
        r_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "grid")]
        label: String,
    },
    /// Print a grid file's metadata as JSON.
    Info { file: PathBuf },
}

fn fail(e: &LabCliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, out } => {
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            } else {
                cfg.output_dir = cfg.resolve(&cfg.output_dir.clone());
            }
            match run(&cfg) {
                Ok(summary) => {
                    for o in &summary.outputs {
                        println!("{}  {}", o.sha256, summary.output_dir.join(&o.name).display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Validate { config } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let diags = validate(&cfg);
            if diags.is_empty() {
                println!("ok");
                ExitCode::SUCCESS
            } else {
                for d in &diags {
                    println!("{d}");
                }
                ExitCode::from(2)
            }
        }
        Command::Grid { action } => match grid(action) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&e),
        },
    }
}

fn grid(action: GridAction) -> Result<(), LabCliError> {
    match action {
        GridAction::Gen {
            file,
            kind,
            d,
            side,
            n,
            value,
            p,
            count,
            r_min,
            r_max,
            seed,
            label,
        } => {
            let source = RandomSource::new(seed);
            let g = match kind {
                GridKind::Constant => TorusGrid::constant(d, side, n, value)?,
                GridKind::RandomBinary => TorusGrid::random_binary(d, side, n, p, &source)?,
                GridKind::Blobs => TorusGrid::random_blobs(d, side, n, count, r_min, r_max, &source)?,
            };
            g.save(&file, &label)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&g.metadata(&label)).expect("metadata serializes")
            );
        }
        GridAction::Info { file } => {
            let g = TorusGrid::load(&file)?;
            let label = file.file_stem().and_then(|s| s.to_str()).unwrap_or("grid");
            println!(
                "{}",
                serde_json::to_string_pretty(&g.metadata(label)).expect("metadata serializes")
            );
        }
    }
    Ok(())
}
