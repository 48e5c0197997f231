use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use adarl::oracle::{DpOptions, GridDp};
use adarl_harness::config::{ExperimentConfig, TuneParam};
use adarl_harness::error::{HarnessError, Result};
use adarl_harness::{report, runner, tune};
use clap::{Parser, Subcommand};
use rand::SeedableRng;

#[derive(Parser)]
#[command(
    name = "adarl",
    version,
    about = "Run adaptive discretization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replication and write metrics and partition dumps.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-search one agent parameter.
    Tune {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated values, e.g. `0.01,0.1,1`.
        #[arg(long)]
        grid: Option<String>,
        /// bonus_scale, split_scale, epsilon or lipschitz.
        #[arg(long)]
        param: Option<String>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize metrics files as a TSV table.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the environment on a grid and export V* and Q*.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        resolution: u32,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| HarnessError::Config(format!("grid value `{v}` is not a number")))
        })
        .collect()
}

fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            reps,
            seed,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(r) = reps {
                cfg.experiment.reps = r;
            }
            if let Some(s) = seed {
                cfg.experiment.base_seed = s;
            }
            cfg.validate()?;
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            let files = runner::run_experiment(&cfg, &dir)?;
            println!("{}", files.metrics.display());
        }
        Command::Tune {
            config,
            grid,
            param,
            reps,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let section = cfg.tune.clone().unwrap_or_default();
            let grid = match grid {
                Some(g) => parse_grid(&g)?,
                None => section.grid.clone(),
            };
            let param = match param {
                Some(p) => p.parse::<TuneParam>()?,
                None => section.param,
            };
            let result = tune::tune(&cfg, param, &grid, reps.unwrap_or(section.reps))?;
            let path = out.unwrap_or_else(|| cfg.output.dir.join("tune.tsv"));
            write_text(&path, &result.to_tsv())?;
            print!("{}", result.to_tsv());
            println!("best {} = {}", param.name(), result.best);
        }
        Command::Report { files, out } => {
            let table = report::to_tsv(&report::report_files(&files)?);
            match out {
                Some(path) => write_text(&path, &table)?,
                None => print!("{table}"),
            }
        }
        Command::Oracle {
            config,
            resolution,
            samples,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let env = runner::build_env(&cfg)?;
            let opts = DpOptions {
                resolution,
                mc_samples: samples,
                seed: cfg.experiment.base_seed,
            };
            let dp = GridDp::solve(env.as_ref(), opts)?;
            let path = out.unwrap_or_else(|| cfg.output.dir.join("oracle.bin"));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
            }
            let file = File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
            dp.write_binary(BufWriter::new(file))
                .map_err(|e| HarnessError::io(&path, e))?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.experiment.base_seed);
            let start = env.reset(&mut rng);
            println!("V*_1(start) = {}", dp.value_at(env.as_ref(), 1, &start));
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
