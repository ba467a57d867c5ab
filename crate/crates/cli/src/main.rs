use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sqg_cli::{exit, run, CliError, Command, LoadedConfig};

#[derive(Parser)]
#[command(name = "sqg", version, about = "Time-periodic solutions of the dissipative quasi-geostrophic equation")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct Shared {
    /// TOML run configuration; reference values when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overrides `output.dir`
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `seed`
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the probe suite and norm evaluation
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Sub {
    /// Successive approximation of the periodic solution
    Solve,
    /// Periodic solution of the linear problem
    Linear,
    /// Initial-value run from a snapshot
    Evolve {
        /// Initial datum (SQGF snapshot)
        theta0: PathBuf,
    },
    /// Estimate-ratio probes on the reference corpus
    Verify,
    /// Besov norm and block spectrum of a snapshot
    Besov {
        snapshot: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sqg: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let mut loaded = match &cli.shared.config {
        Some(path) => LoadedConfig::from_path(path)?,
        None => LoadedConfig::reference(),
    };
    if let Some(seed) = cli.shared.seed {
        loaded.config.seed = seed;
    }
    if let Some(threads) = cli.shared.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let out = cli.shared.out.clone().unwrap_or_else(|| loaded.config.output.dir.clone());
    let command = match cli.command {
        Sub::Solve => Command::Solve,
        Sub::Linear => Command::Linear,
        Sub::Evolve { theta0 } => Command::Evolve { theta0 },
        Sub::Verify => Command::Verify,
        Sub::Besov { snapshot, s, p, q } => Command::Besov { snapshot, s, p, q },
    };
    let code = run(&command, &loaded, &out, cli.shared.threads)?;
    if code != exit::OK {
        eprintln!("sqg: {} finished with exit status {code}, see {}", command.name(), out.display());
    }
    Ok(code)
}
