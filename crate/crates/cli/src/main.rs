use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use contrail::bounds::{self, BoundReport};
use contrail::environment::NoiseModel;
use contrail::harness::{self, ExperimentConfig, ScenarioId};
use contrail::learner::{gradient_check, GRADCHECK_ABS_FLOOR, GRADCHECK_REL_TOL};
use contrail::{Error, Result};

#[derive(Parser)]
#[command(name = "contrail", version, about = "Continual transfer experiments on synthetic regression tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the built-in task specifications.
    Tasks,
    /// Run one scenario or all of them and write reports.
    Run {
        /// Scenario id (iso, iso_noise, s1..s6) or `all`.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        no_noise: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a bound, e.g. `bounds min_target_sample --param epsilon1=0.1 --param delta=0.05 --param d_max=10`.
    Bounds {
        name: String,
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<String>,
        #[arg(long, value_enum, default_value_t = BoundFormat::Kv)]
        format: BoundFormat,
    },
    /// Write per-task curve and sample data for external plotting.
    Plotdata {
        #[arg(long)]
        with_models: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        no_noise: bool,
    },
    /// Compare analytic and finite-difference gradients on random models.
    Gradcheck {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundFormat {
    Kv,
    Csv,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Tasks => {
            for t in harness::builtin_tasks(NoiseModel::gaussian(harness::NOISE_MEAN, harness::NOISE_STD), 30) {
                println!(
                    "{}: {} on [{}, {}], {} points, noise N({}, {}) when enabled",
                    t.id, t.function, t.domain_lo, t.domain_hi, t.sample_size, t.noise.mean, t.noise.std
                );
            }
            Ok(())
        }
        Command::Run { scenario, config, reps, seed, no_noise, out } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(r) = reps {
                cfg.repetitions = r;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if no_noise {
                cfg.noise_enabled = false;
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            let scenarios: Vec<ScenarioId> = if scenario == "all" {
                ScenarioId::ALL.to_vec()
            } else {
                vec![scenario.parse()?]
            };
            let records = harness::run_many(&scenarios, &cfg)?;
            let summary = harness::summarize(&records)?;
            for path in harness::write_run(&records, &summary, &cfg)? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Bounds { name, params, format } => {
            let mut map = BTreeMap::new();
            for p in params {
                let (k, v) = p
                    .split_once('=')
                    .ok_or_else(|| Error::Validation(format!("parameter `{p}` is not of the form k=v")))?;
                if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                    return Err(Error::Validation(format!("parameter `{}` given twice", k.trim())));
                }
            }
            let report = bounds::evaluate(&name, &map)?;
            match format {
                BoundFormat::Kv => print!("{}", report.to_kv()),
                BoundFormat::Csv => println!("{}\n{}", BoundReport::CSV_HEADER, report.to_csv_row()),
            }
            Ok(())
        }
        Command::Plotdata { with_models, out, seed, no_noise } => {
            let mut cfg = ExperimentConfig::default();
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            cfg.noise_enabled = !no_noise;
            for path in harness::plot_builtin_tasks(&cfg, with_models, &out)? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Gradcheck { trials, seed } => {
            if trials == 0 {
                return Err(Error::Validation("trials must be positive".into()));
            }
            let report = gradient_check(trials, seed)?;
            println!(
                "gradcheck: {} trials, {} failed, worst relative error {:.3e} (tolerance {GRADCHECK_REL_TOL:e}, floor {GRADCHECK_ABS_FLOOR:e})",
                report.trials, report.failures, report.worst_relative
            );
            if report.passed() {
                Ok(())
            } else {
                Err(Error::State(format!("{} of {} gradient checks failed", report.failures, report.trials)))
            }
        }
    }
}
