use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use cbtext::error::Error;
use cbtext::pipeline::{run, Command, Overrides, RunConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Stage {
    Ingest,
    Score,
    Topics,
    Counts,
    Series,
    Econ,
    Report,
}

impl From<Stage> for Command {
    fn from(s: Stage) -> Self {
        match s {
            Stage::Ingest => Command::Ingest,
            Stage::Score => Command::Score,
            Stage::Topics => Command::Topics,
            Stage::Counts => Command::Counts,
            Stage::Series => Command::Series,
            Stage::Econ => Command::Econ,
            Stage::Report => Command::Report,
        }
    }
}

/// Text indicators and econometrics for central-bank communications.
#[derive(Debug, Parser)]
#[command(name = "cbtext", version)]
struct Cli {
    /// Stage to run; `report` runs them all.
    #[arg(value_enum)]
    command: Stage,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace existing output files.
    #[arg(long)]
    force: bool,
}

fn init_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("CBTEXT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config {
            field: "CBTEXT_THREADS".into(),
            message: format!("expected a positive integer, got {raw:?}"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let overrides = Overrides {
        seed: cli.seed,
        output_dir: cli.out.clone(),
    };
    let result = init_threads()
        .and_then(|()| RunConfig::load_with(&cli.config, &overrides))
        .and_then(|cfg| run(cli.command.into(), &cfg, cli.force));
    match result {
        Ok(files) => {
            for f in files {
                println!("{f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            // Display already carries the nested causes.
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
