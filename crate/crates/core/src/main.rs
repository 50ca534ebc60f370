use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use emr_bench::cli::{self, CliError, RefactorOptions, RunConfig};

#[derive(Parser)]
#[command(name = "emr-bench", version, about = "Extract Method refactoring benchmark harness")]
struct Args {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Scripted mock fixture used for every model instead of HTTP endpoints.
    #[arg(long, global = true)]
    mock: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest, filter, sample and preprocess the corpus.
    Sample,
    /// Refactor every benchmark sample with every model and strategy.
    Refactor {
        /// Reuse records from an interrupted run with the same config.
        #[arg(long)]
        resume: bool,
    },
    /// Write report CSVs for a finished run.
    Report {
        /// Run directory; defaults to the config's output_dir.
        run_dir: Option<PathBuf>,
    },
    /// Analyze developer-survey ratings.
    Survey {
        ratings: PathBuf,
        /// Output directory; defaults to the ratings file's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(args: &Args) -> Result<RunConfig, CliError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required for this command".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(j) = args.jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        cfg.jobs = Some(j);
    }
    if let Some(mock) = &args.mock {
        cfg.use_mock(mock)?;
    }
    Ok(cfg)
}

fn run(args: &Args) -> anyhow::Result<()> {
    match &args.command {
        Command::Sample => {
            let cfg = load_config(args)?;
            let s = cli::cmd_sample(&cfg)?;
            println!(
                "{} problems, {} samples benchmarked, {} exclusions; manifest {}",
                s.problems_selected,
                s.samples_benchmarked,
                s.exclusions,
                s.manifest_path.display()
            );
        }
        Command::Refactor { resume } => {
            let cfg = load_config(args)?;
            let s = cli::cmd_refactor(&cfg, RefactorOptions { resume: *resume })?;
            for a in &s.approaches {
                println!("{:<32} TPP {:.3} ({}/{})", a.approach, a.tpp, a.successes, a.samples);
            }
            println!("{} records ({} resumed) -> {}", s.records, s.resumed, s.records_path.display());
        }
        Command::Report { run_dir } => {
            let dir = match run_dir {
                Some(d) => d.clone(),
                None => load_config(args)?.output_dir,
            };
            for p in cli::cmd_report(&dir)? {
                println!("{}", p.display());
            }
        }
        Command::Survey { ratings, out } => {
            let out = out.clone().unwrap_or_else(|| {
                ratings
                    .parent()
                    .filter(|p| !p.as_os_str().is_empty())
                    .map_or_else(|| PathBuf::from("."), PathBuf::from)
            });
            let paths = cli::cmd_survey(ratings, &out)
                .with_context(|| format!("survey analysis of {}", ratings.display()))?;
            for p in paths {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = err
                .chain()
                .find_map(|e| e.downcast_ref::<CliError>())
                .map_or(1, CliError::exit_code);
            eprintln!("error: {err:#}");
            ExitCode::from(code as u8)
        }
    }
}
