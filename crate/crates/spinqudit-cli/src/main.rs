mod commands;
mod config;
mod svg;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Simulation, tomography and figure recipes for a spin-7/2 nuclear qudit.
#[derive(Parser)]
#[command(name = "spinqudit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults are used for missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config field by dotted path, e.g. `rabi.periods=3`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Populations and <Iz> under a covariant or subspace drive.
    Rabi,
    /// Cat-state preparation by Givens chain or virtual SNAP.
    Cat,
    /// Shot simulation, reconstruction and bootstrap validation.
    Tomography,
    /// Wigner function grids and maps.
    Wigner,
    /// Knill-Laflamme and logical-gate checks of the spin-cat code.
    Catcode,
    /// Cross-coupling contrast sweep.
    Floquet,
    /// Print the effective configuration and exit.
    Config,
    /// Print the JSON schema of the run configuration or the run manifest.
    Schema {
        #[arg(value_enum, default_value = "config")]
        which: SchemaKind,
    },
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum SchemaKind {
    Config,
    Manifest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Rabi => "rabi",
            Command::Cat => "cat",
            Command::Tomography => "tomography",
            Command::Wigner => "wigner",
            Command::Catcode => "catcode",
            Command::Floquet => "floquet",
            Command::Config => "config",
            Command::Schema { .. } => "schema",
        }
    }
}

pub enum CliError {
    Config(String),
    Numerical(String),
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<spinqudit::Error> for CliError {
    fn from(e: spinqudit::Error) -> Self {
        use spinqudit::Error::*;
        match e {
            InvalidArgument(_) | DimensionMismatch { .. } | Unsupported(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}

#[derive(serde::Serialize, schemars::JsonSchema)]
struct RunManifest<'a> {
    command: &'a str,
    tool_version: &'a str,
    config_sha256: String,
    seed: u64,
    outputs: Vec<String>,
    wall_time_s: f64,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SPINQUDIT_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("SPINQUDIT_THREADS: '{v}' is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    if let Command::Schema { which } = cli.command {
        let schema = match which {
            SchemaKind::Config => schemars::schema_for!(config::RunConfig),
            SchemaKind::Manifest => schemars::schema_for!(RunManifest<'static>),
        };
        println!("{}", serde_json::to_string_pretty(&schema).expect("schema serialises"));
        return Ok(());
    }
    let text = match &cli.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let mut cfg = config::load(text.as_deref(), &cli.overrides)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    let canonical = serde_json::to_string_pretty(&cfg).expect("config serialises");
    if cli.command == Command::Config {
        println!("{canonical}");
        return Ok(());
    }
    let start = Instant::now();
    let dir = PathBuf::from(&cfg.output_dir);
    std::fs::create_dir_all(&dir)?;
    let mut out = commands::Outputs::new(dir.clone());
    out.write("config.json", &canonical)?;
    match cli.command {
        Command::Rabi => commands::rabi(&cfg, &mut out)?,
        Command::Cat => commands::cat(&cfg, &mut out)?,
        Command::Tomography => commands::tomography(&cfg, &mut out)?,
        Command::Wigner => commands::wigner(&cfg, &mut out)?,
        Command::Catcode => commands::catcode(&cfg, &mut out)?,
        Command::Floquet => commands::floquet(&cfg, &mut out)?,
        Command::Config | Command::Schema { .. } => unreachable!(),
    }
    let manifest = RunManifest {
        command: cli.command.name(),
        tool_version: env!("CARGO_PKG_VERSION"),
        config_sha256: hex(&Sha256::digest(canonical.as_bytes())),
        seed: cfg.seed,
        outputs: out.files.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    std::fs::write(dir.join("run_manifest.json"), serde_json::to_string_pretty(&manifest).expect("manifest serialises"))?;
    for line in &out.summary {
        println!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
