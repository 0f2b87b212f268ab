use std::collections::BTreeMap;
use std::time::Instant;

use super::state::{Slot, SolverState};
use crate::error::Result;

/// One iteration kernel. Steppers are pure functions of their oracle, their
/// parameters and the incoming state.
pub trait Stepper: Send + Sync {
    fn name(&self) -> &str;

    fn step(&self, state: &SolverState) -> Result<SolverState>;

    /// Default restart: `z ← x` and the schedule clock returns to zero.
    fn restart(&self, state: &mut SolverState) {
        state.z = state.x.clone();
        state.k = 0;
    }

    /// Squared residual reported in the trace: the stored certified residual
    /// when the step leaves one, else the squared step length.
    fn residual_sq(&self, prev: &SolverState, next: &SolverState) -> f64 {
        match next.aux(Slot::Residual) {
            Some(g) => g.norm_squared(),
            None => (&next.x - &prev.x).norm_squared(),
        }
    }
}

/// Quantities recorded after iteration `k` (that is, at `x_k`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceRecord {
    /// Global iteration count, starting at 1.
    pub k: usize,
    /// Schedule clock used by the step that produced this record.
    pub clock: usize,
    pub objective_gap: Option<f64>,
    pub residual_sq: Option<f64>,
    pub inner_product: Option<f64>,
    pub lyapunov: Option<f64>,
    /// Additional named metrics (bounds, slacks, feasibility).
    pub extra: BTreeMap<&'static str, f64>,
    pub wall_time: f64,
}

impl TraceRecord {
    /// Record equality ignoring wall-clock time.
    pub fn same_values(&self, other: &Self) -> bool {
        let bits = |x: Option<f64>| x.map(f64::to_bits);
        self.k == other.k
            && self.clock == other.clock
            && bits(self.objective_gap) == bits(other.objective_gap)
            && bits(self.residual_sq) == bits(other.residual_sq)
            && bits(self.inner_product) == bits(other.inner_product)
            && bits(self.lyapunov) == bits(other.lyapunov)
            && self.extra.len() == other.extra.len()
            && self.extra.iter().zip(&other.extra).all(|((a, x), (b, y))| a == b && x.to_bits() == y.to_bits())
    }
}

/// Outcome of one invariant evaluation. `slack ≥ 0` passes. Unarmed checks
/// are logged but never counted as failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub slack: f64,
    pub armed: bool,
}

impl Check {
    pub fn armed(name: &'static str, slack: f64) -> Self {
        Self { name, slack, armed: true }
    }

    pub fn passed(&self) -> bool {
        self.slack >= 0.0
    }
}

/// Per-iteration observer. Monitors see the state before and after each
/// step, fill in trace fields and report invariant checks.
pub trait Monitor: Send {
    fn name(&self) -> &'static str;

    /// Called before the first step and after every restart.
    fn anchor(&mut self, state: &SolverState);

    fn observe(
        &mut self,
        prev: &SolverState,
        next: &SolverState,
        record: &mut TraceRecord,
        checks: &mut Vec<Check>,
    ) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckStats {
    pub evaluations: usize,
    pub failures: usize,
    /// Smallest slack seen (armed evaluations only).
    pub worst_slack: f64,
    pub first_failure: Option<usize>,
    pub logged_violations: usize,
}

/// Aggregated invariant results, keyed by `monitor/check`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InvariantSummary {
    pub checks: BTreeMap<String, CheckStats>,
    /// Monitor errors (e.g. a reference solution that is not optimal).
    pub errors: Vec<(usize, String)>,
}

impl InvariantSummary {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.checks.values().all(|c| c.failures == 0)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, c)| c.failures > 0).map(|(n, _)| n.as_str()).collect()
    }

    fn record(&mut self, k: usize, monitor: &str, check: &Check) {
        let entry = self
            .checks
            .entry(format!("{monitor}/{}", check.name))
            .or_insert_with(|| CheckStats { worst_slack: f64::INFINITY, ..CheckStats::default() });
        if !check.armed {
            if !check.passed() {
                entry.logged_violations += 1;
            }
            return;
        }
        entry.evaluations += 1;
        entry.worst_slack = entry.worst_slack.min(check.slack);
        // NaN slack counts as a failure.
        if !check.passed() {
            entry.failures += 1;
            entry.first_failure.get_or_insert(k);
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub state: SolverState,
    pub summary: InvariantSummary,
}

/// Runs `iters` steps. Every `restart_every` steps the stepper restarts
/// (`z ← x`, clock zero) and monitors re-anchor. Monitor failures are recorded
/// and the run continues; stepper errors abort it.
pub fn run(
    stepper: &dyn Stepper,
    state0: SolverState,
    iters: usize,
    restart_every: Option<usize>,
    monitors: &mut [Box<dyn Monitor>],
) -> Result<RunOutput> {
    state0.check()?;
    let start = Instant::now();
    let mut state = state0;
    let mut trace = Vec::with_capacity(iters);
    let mut summary = InvariantSummary::default();
    let mut checks = Vec::new();
    for m in monitors.iter_mut() {
        m.anchor(&state);
    }
    for i in 1..=iters {
        let next = stepper.step(&state)?;
        let mut record = TraceRecord {
            k: i,
            clock: state.k,
            residual_sq: Some(stepper.residual_sq(&state, &next)),
            ..TraceRecord::default()
        };
        for m in monitors.iter_mut() {
            checks.clear();
            if let Err(e) = m.observe(&state, &next, &mut record, &mut checks) {
                summary.errors.push((i, format!("{}: {e}", m.name())));
            }
            for c in &checks {
                summary.record(i, m.name(), c);
            }
        }
        record.wall_time = start.elapsed().as_secs_f64();
        trace.push(record);
        state = next;
        if let Some(every) = restart_every {
            if every > 0 && i % every == 0 && i < iters {
                stepper.restart(&mut state);
                for m in monitors.iter_mut() {
                    m.anchor(&state);
                }
            }
        }
    }
    Ok(RunOutput { trace, state, summary })
}
