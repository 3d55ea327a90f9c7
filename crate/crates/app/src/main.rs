use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use casimir_app::config::RunConfig;
use casimir_app::material_file::MaterialDb;
use casimir_app::recipes;
use casimir_app::run::{run, RunOptions};
use clap::{ArgGroup, Parser};
use log::{error, warn};

const EXIT_SCHEMA: u8 = 2;
const EXIT_FLAGGED: u8 = 3;

/// Casimir energies and pressures between periodic nanowire-array slabs.
#[derive(Debug, Parser)]
#[command(name = "casimir", version, group(ArgGroup::new("input").required(true).args(["config", "recipe"])))]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Shipped recipe: fig2 … fig7.
    #[arg(long, value_name = "NAME")]
    recipe: Option<String>,
    /// Use the recipe's reduced-resolution variant.
    #[arg(long, requires = "recipe")]
    desk_scale: bool,
    /// Output directory (overrides the configuration).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, value_name = "N", default_value_t = 0)]
    workers: usize,
    /// Exit 0 even when some points exceed their error tolerance.
    #[arg(long)]
    allow_flagged: bool,
    /// Register a material file under a name (repeatable).
    #[arg(long, value_name = "NAME=FILE")]
    material: Vec<String>,
    /// Write the reflection and translation matrices of every node.
    #[arg(long)]
    dump_matrices: bool,
    /// Print the parsed configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(Failure::Schema(msg)) => {
            eprintln!("configuration error:\n{msg}");
            ExitCode::from(EXIT_SCHEMA)
        }
        Err(Failure::Other(e)) => {
            error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}

enum Failure {
    Schema(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn execute(cli: Cli) -> Result<ExitCode, Failure> {
    let mut db = MaterialDb::builtin();
    for arg in &cli.material {
        db.register_arg(arg).map_err(|e| Failure::Schema(format!("{e:#}")))?;
    }
    let text = match (&cli.config, &cli.recipe) {
        (Some(path), _) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(name)) => recipes::recipe(name, cli.desk_scale)
            .ok_or_else(|| Failure::Schema(format!("unknown recipe `{name}` (known: {})", recipes::NAMES.join(", "))))?
            .to_string(),
        (None, None) => unreachable!("clap requires one input"),
    };
    let config = RunConfig::parse(&text).map_err(|e| Failure::Schema(e.to_string()))?;
    config.validate(&db).map_err(|e| Failure::Schema(e.to_string()))?;
    if cli.print_config {
        print!("{}", config.to_toml()?);
        return Ok(ExitCode::SUCCESS);
    }
    let out = cli.out.unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let opts = RunOptions { out, workers: cli.workers, dump_matrices: cli.dump_matrices };
    let summary = run(&config, &db, &opts)?;
    for f in &summary.files {
        println!("{}", f.display());
    }
    if summary.flagged > 0 {
        if cli.allow_flagged {
            warn!("{} flagged points (allowed)", summary.flagged);
        } else {
            error!("{} points exceed their error tolerance or failed; see the manifest", summary.flagged);
            return Ok(ExitCode::from(EXIT_FLAGGED));
        }
    }
    Ok(ExitCode::SUCCESS)
}
