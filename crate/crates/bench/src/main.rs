use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sppa_bench::{preset, read_trace, run_experiment, sweep, BenchError, ExperimentConfig};

/// Run, sweep and analyse solver experiments.
#[derive(Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and print its JSON summary.
    Run {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        iters: Option<usize>,
        /// Restart period; `none` disables restarts.
        #[arg(long)]
        restart: Option<String>,
        /// Where to write the trace CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a config once per value of one parameter, in parallel.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of C, r, rho, restart_every, seed, iters.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
    /// Fit the log-log slope of a metric over the second half of a trace.
    Slope {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value = "residual_sq")]
        metric: String,
    },
}

fn load(config: Option<PathBuf>, preset_name: Option<String>) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = match (config, preset_name) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(&name)?,
        (None, None) => return Err(BenchError::Config("pass --config or --preset".into())),
    };
    if let Ok(seed) = std::env::var("BENCH_SEED") {
        cfg.set("seed", &seed)?;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<bool, BenchError> {
    match cli.command {
        Command::Run { config, preset, iters, restart, out } => {
            let mut cfg = load(config, preset)?;
            if let Some(iters) = iters {
                cfg.set("iters", &iters.to_string())?;
            }
            if let Some(restart) = restart {
                cfg.set("restart_every", &restart)?;
            }
            if out.is_some() {
                cfg.output = out;
            }
            let outcome = run_experiment(&cfg)?;
            println!("{}", outcome.summary.to_json_line());
            Ok(outcome.summary.passed())
        }
        Command::Sweep { config, param, values } => {
            let cfg = load(Some(config), None)?;
            let mut passed = true;
            let results = sweep(&cfg, &param, &values)?;
            if !results.is_empty() {
                eprint!("{}", sppa_bench::sweep_table(&param, &results));
            }
            for (value, outcome) in results {
                let mut line = serde_json::to_value(&outcome.summary).expect("summaries always serialize");
                line["sweep"] = serde_json::json!({ "param": param, "value": value });
                println!("{line}");
                passed &= outcome.summary.passed();
            }
            Ok(passed)
        }
        Command::Slope { trace, metric } => {
            let slope = sppa_bench::fit_slope(&read_trace(&trace)?, &metric)?;
            println!("{}", serde_json::json!({ "metric": metric, "slope": slope }));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("invariant violation: see the monitors in the summary");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
