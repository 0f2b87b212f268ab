//! Benchmark harness for the symplectic proximal point solvers: JSON
//! experiment configs and presets, long-format traces, slope fits, head to
//! head comparisons and parallel parameter sweeps.

pub mod config;
pub mod experiment;
pub mod trace;

pub use config::{preset, ExperimentConfig, Mode, ProblemSpec, ScheduleSpec, SolverKind, SolverSpec, PRESETS};
pub use experiment::{run_experiment, run_on, sweep, sweep_table, MonitorStatus, RunOutcome, RunSummary};
pub use trace::{compare, fit_slope, parse_trace, read_trace, trace_csv, Comparison, TraceRow, Winner, THRESHOLDS};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] sppa::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl BenchError {
    /// Process exit status: 2 for bad input, 1 for failures while running.
    /// Invariant violations (3) are decided from the summary, not here.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Run(sppa::Error::Domain(_)) => 2,
            BenchError::Run(_) | BenchError::Io(_) => 1,
        }
    }
}
