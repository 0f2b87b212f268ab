//! Turning a validated config into steppers, monitors and a trace.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sppa::operators::{DouglasRachford, ProxMap};
use sppa::problems::{reference_solution, Budget, Kind, ProblemInstance, ReferenceSolution};
use sppa::solvers::{
    run, ConvexSppaMonitor, Envelope, Monitor, MonotoneMonitor, Objective, PpaConvexMonitor, Slot, SolverState,
    SppaConvexStepper, SppaMonotoneStepper, Stepper,
};
use sppa::splitting::instances::{
    basis_pursuit_admm, basis_pursuit_dr, fused_lasso_admm, lasso_admm, lasso_split, matrix_game, quadratic_l1_prox,
    quadratic_l1_split,
};
use sppa::splitting::{
    baseline_step, AdmmProblem, AlmMonitor, Baseline, BaselineProblem, EqualityConstrainedProblem, SaddleProblem,
    SadmmStepper, SadmmV2Stepper, SalmStepper, SdrStepper, SpdhgStepper,
};
use sppa::Vector;

use crate::config::{ExperimentConfig, Mode, ProblemSpec, SolverKind};
use crate::trace::{first_hits, fit_slope, trace_rows, write_trace, TraceRow, THRESHOLDS};
use crate::BenchError;

/// Owned problem data for the classical methods.
enum BaselineData {
    Resolvent(Arc<dyn ProxMap>, f64),
    Equality(EqualityConstrainedProblem, f64),
    Splitting(Arc<dyn ProxMap>, Arc<dyn ProxMap>, f64),
    Admm(AdmmProblem),
    Saddle(SaddleProblem),
}

struct BaselineStepper {
    kind: Baseline,
    data: BaselineData,
}

impl Stepper for BaselineStepper {
    fn name(&self) -> &str {
        self.kind.as_str()
    }

    fn step(&self, state: &SolverState) -> sppa::Result<SolverState> {
        let problem = match &self.data {
            BaselineData::Resolvent(res, c) => BaselineProblem::Resolvent { res: res.as_ref(), c: *c },
            BaselineData::Equality(p, rho) => BaselineProblem::Equality { problem: p, rho: *rho },
            BaselineData::Splitting(a, b, rho) => {
                BaselineProblem::Splitting { res_a: a.as_ref(), res_b: b.as_ref(), rho: *rho }
            }
            BaselineData::Admm(p) => BaselineProblem::Admm(p),
            BaselineData::Saddle(p) => BaselineProblem::Saddle(p),
        };
        baseline_step(self.kind, problem, state)
    }

    fn restart(&self, state: &mut SolverState) {
        // Only the Halpern anchor moves on restart; the others are memoryless.
        if self.kind == Baseline::Halpern {
            state.z = state.x.clone();
        }
        state.k = 0;
    }
}

struct Wired {
    stepper: Box<dyn Stepper>,
    state0: SolverState,
    monitors: Vec<Box<dyn Monitor>>,
}

fn admm_problem(p: &ProblemInstance, rho: f64) -> sppa::Result<AdmmProblem> {
    match p.kind {
        Kind::Lasso => lasso_admm(p, rho),
        Kind::BasisPursuit => basis_pursuit_admm(p, rho),
        _ => fused_lasso_admm(p, rho),
    }
}

fn equality_problem(p: &ProblemInstance) -> sppa::Result<EqualityConstrainedProblem> {
    match p.kind {
        Kind::Lasso => lasso_split(p),
        _ => quadratic_l1_split(p),
    }
}

/// The maximal monotone operator the resolvent-based methods act on: the
/// subdifferential for quadratic + ℓ₁, the Douglas-Rachford operator for
/// basis pursuit.
fn resolvent(p: &ProblemInstance, rho: f64) -> sppa::Result<Arc<dyn ProxMap>> {
    match p.kind {
        Kind::BasisPursuit => {
            let (a, b) = basis_pursuit_dr(p)?;
            Ok(Arc::new(DouglasRachford::new(a, b, rho)?))
        }
        _ => Ok(Arc::new(quadratic_l1_prox(p)?)),
    }
}

fn reference(p: &ProblemInstance, rho: f64) -> Result<ReferenceSolution, BenchError> {
    let r = reference_solution(p, Budget { rho, ..Budget::default() })?;
    if !r.converged {
        return Err(BenchError::Config(format!(
            "reference solution for the {} instance did not converge (tolerance {:e})",
            p.kind, r.certified_tol
        )));
    }
    Ok(r)
}

fn dual_star(r: &ReferenceSolution) -> Result<Vector, BenchError> {
    r.dual_star.clone().ok_or_else(|| BenchError::Config("reference solution has no multiplier".into()))
}

fn objective(p: &ProblemInstance) -> sppa::Result<Objective> {
    let q = quadratic_l1_prox(p)?;
    Ok(Arc::new(move |x: &Vector| q.value(x)))
}

fn wire(cfg: &ExperimentConfig, p: &ProblemInstance) -> Result<Wired, BenchError> {
    let s = &cfg.solver;
    let kind = s.kind()?;
    let envelope = cfg.monitors.iter().any(|m| m == "envelope");
    let rho = s.rho();
    let mut monitors: Vec<Box<dyn Monitor>> = Vec::new();
    let (stepper, state0): (Box<dyn Stepper>, SolverState) = match kind {
        SolverKind::Salm | SolverKind::Alm => {
            let problem = equality_problem(p)?;
            let state0 = SolverState::new(Vector::zeros(problem.b.len()));
            if kind == SolverKind::Alm {
                (Box::new(BaselineStepper { kind: Baseline::Alm, data: BaselineData::Equality(problem, rho) }), state0)
            } else {
                let schedule = s.schedule()?;
                if envelope {
                    let r = reference(p, rho)?;
                    monitors.push(Box::new(AlmMonitor::new(
                        problem.clone(),
                        schedule.clone(),
                        r.fstar,
                        dual_star(&r)?,
                    )));
                }
                (Box::new(SalmStepper { problem, schedule }), state0)
            }
        }
        SolverKind::Sadmm | SolverKind::SadmmV2 | SolverKind::Admm => {
            let problem = admm_problem(p, rho)?;
            let state0 = SolverState::new(Vector::zeros(problem.c.len()))
                .with_aux(Slot::Partner, Vector::zeros(problem.b.cols()));
            let stepper: Box<dyn Stepper> = match kind {
                SolverKind::Sadmm => {
                    let params = s.monotone_params()?;
                    if envelope {
                        let u_star = dual_star(&reference(p, rho)?)?;
                        monitors.push(Box::new(MonotoneMonitor::new(params, u_star)));
                    }
                    Box::new(SadmmStepper { problem, params })
                }
                SolverKind::SadmmV2 => Box::new(SadmmV2Stepper { problem, params: s.monotone_params()? }),
                _ => Box::new(BaselineStepper { kind: Baseline::Admm, data: BaselineData::Admm(problem) }),
            };
            (stepper, state0)
        }
        SolverKind::Spdhg | SolverKind::Pdhg => {
            let mut problem = matrix_game(p)?;
            if let Some(mu1) = s.mu1 {
                problem.mu1 = mu1;
            }
            if let Some(mu2) = s.mu2 {
                problem.mu2 = mu2;
            }
            let state0 = SolverState::new(
                problem
                    .join(&Vector::from_element(p.m, 1.0 / p.m as f64), &Vector::from_element(p.n, 1.0 / p.n as f64)),
            );
            if kind == SolverKind::Spdhg && s.mode == Mode::Guarantee {
                problem.check_guarantee().map_err(|e| BenchError::Config(e.to_string()))?;
            }
            if kind == SolverKind::Pdhg {
                (Box::new(BaselineStepper { kind: Baseline::Pdhg, data: BaselineData::Saddle(problem) }), state0)
            } else {
                let params = s.monotone_params()?;
                if envelope {
                    monitors.push(Box::new(MonotoneMonitor::new(params, reference(p, rho)?.xstar)));
                }
                (Box::new(SpdhgStepper { problem, params }), state0)
            }
        }
        SolverKind::Sdr | SolverKind::Dr => {
            let (res_a, res_b) = basis_pursuit_dr(p)?;
            let state0 = SolverState::new(Vector::zeros(p.n));
            if kind == SolverKind::Dr {
                (
                    Box::new(BaselineStepper { kind: Baseline::Dr, data: BaselineData::Splitting(res_a, res_b, rho) }),
                    state0,
                )
            } else {
                (Box::new(SdrStepper { res_a, res_b, rho, params: s.monotone_params()? }), state0)
            }
        }
        SolverKind::SppaMonotone | SolverKind::Ppa | SolverKind::Halpern => {
            let res = resolvent(p, rho)?;
            let c = s.c.unwrap_or(1.0);
            let state0 = SolverState::new(Vector::zeros(p.n));
            let stepper: Box<dyn Stepper> = match kind {
                SolverKind::SppaMonotone => {
                    let params = s.monotone_params()?;
                    if envelope {
                        // The envelope the Lyapunov argument supports for a
                        // general maximal monotone operator.
                        let xstar = reference(p, rho)?.xstar;
                        monitors.push(Box::new(MonotoneMonitor::new(params, xstar).with_envelope(Envelope::Weak)));
                    }
                    Box::new(SppaMonotoneStepper { res, params })
                }
                SolverKind::Ppa => {
                    if envelope {
                        let r = reference(p, rho)?;
                        monitors.push(Box::new(PpaConvexMonitor::new(
                            objective(p)?,
                            r.fstar,
                            r.xstar,
                            Arc::new(move |_| c),
                        )));
                    }
                    Box::new(BaselineStepper { kind: Baseline::Ppa, data: BaselineData::Resolvent(res, c) })
                }
                _ => Box::new(BaselineStepper { kind: Baseline::Halpern, data: BaselineData::Resolvent(res, 1.0) }),
            };
            (stepper, state0)
        }
        SolverKind::SppaConvex => {
            let schedule = s.schedule()?;
            let prox: Arc<dyn ProxMap> = Arc::new(quadratic_l1_prox(p)?);
            if envelope {
                let r = reference(p, rho)?;
                monitors.push(Box::new(ConvexSppaMonitor::new(objective(p)?, r.fstar, r.xstar, schedule.clone())));
            }
            (Box::new(SppaConvexStepper { prox, schedule }), SolverState::new(Vector::zeros(p.n)))
        }
    };
    Ok(Wired { stepper, state0, monitors })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorStatus {
    pub status: &'static str,
    pub evaluations: usize,
    pub failures: usize,
    pub worst_slack: f64,
    pub first_failure: Option<usize>,
}

/// One line of machine-readable output per run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub preset: Option<String>,
    pub solver: String,
    pub problem: ProblemSpec,
    pub iters: usize,
    pub final_residual_sq: f64,
    /// Log-log slope of the residual over the second half of the run.
    pub slope: Option<f64>,
    pub monitors: BTreeMap<String, MonitorStatus>,
    pub errors: Vec<String>,
    /// First iteration at which `residual_sq` drops to each threshold.
    pub first_hits: BTreeMap<String, Option<usize>>,
    pub wall_time: f64,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.monitors.values().all(|m| m.failures == 0)
    }

    pub fn first_hit(&self, threshold: f64) -> Option<usize> {
        self.first_hits.get(&threshold_key(threshold)).copied().flatten()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("summaries always serialize")
    }
}

pub(crate) fn threshold_key(t: f64) -> String {
    format!("{t:e}")
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub trace: Vec<TraceRow>,
}

/// Runs `cfg` on an already generated instance (which must match
/// `cfg.problem`).
pub fn run_on(cfg: &ExperimentConfig, instance: &ProblemInstance) -> Result<RunOutcome, BenchError> {
    cfg.validate()?;
    let start = Instant::now();
    let Wired { stepper, state0, mut monitors } = wire(cfg, instance)?;
    let out = run(stepper.as_ref(), state0, cfg.iters, cfg.restart_every, &mut monitors)?;
    let trace = trace_rows(&out.trace);
    let monitors = out
        .summary
        .checks
        .iter()
        .map(|(name, c)| {
            let status = MonitorStatus {
                status: if c.failures == 0 { "pass" } else { "fail" },
                evaluations: c.evaluations,
                failures: c.failures,
                worst_slack: c.worst_slack,
                first_failure: c.first_failure,
            };
            (name.clone(), status)
        })
        .collect();
    let summary = RunSummary {
        preset: cfg.preset.clone(),
        solver: cfg.solver.name.clone(),
        problem: cfg.problem.clone(),
        iters: cfg.iters,
        final_residual_sq: out.trace.last().and_then(|r| r.residual_sq).unwrap_or(f64::NAN),
        slope: fit_slope(&trace, "residual_sq").ok(),
        monitors,
        errors: out.summary.errors.iter().map(|(k, e)| format!("k={k}: {e}")).collect(),
        first_hits: THRESHOLDS.iter().map(|&t| (threshold_key(t), first_hits(&trace, "residual_sq", t))).collect(),
        wall_time: start.elapsed().as_secs_f64(),
    };
    if let Some(path) = &cfg.output {
        write_trace(path, &trace)?;
    }
    Ok(RunOutcome { summary, trace })
}

/// Generates the instance and runs the experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome, BenchError> {
    cfg.validate()?;
    run_on(cfg, &cfg.problem.generate()?)
}

/// Output path for one member of a sweep: `trace.csv` becomes
/// `trace.rho=2.csv`.
fn sweep_output(path: &Path, param: &str, value: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{param}={value}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{param}={value}"),
    };
    path.with_file_name(name)
}

/// Runs `cfg` once per value of `param`, in parallel. All runs share one
/// generated instance unless the sweep is over the seed. Every value is
/// validated before anything runs.
pub fn sweep(cfg: &ExperimentConfig, param: &str, values: &[String]) -> Result<Vec<(String, RunOutcome)>, BenchError> {
    let configs = values
        .iter()
        .map(|v| {
            let mut c = cfg.clone();
            c.set(param, v)?;
            c.output = cfg.output.as_deref().map(|p| sweep_output(p, param, v));
            Ok((v.clone(), c))
        })
        .collect::<Result<Vec<_>, BenchError>>()?;
    if configs.is_empty() {
        return Ok(Vec::new());
    }
    let shared = if param == "seed" { None } else { Some(cfg.problem.generate()?) };
    configs
        .into_par_iter()
        .map(|(v, c)| {
            let outcome = match &shared {
                Some(instance) => run_on(&c, instance)?,
                None => run_experiment(&c)?,
            };
            Ok((v, outcome))
        })
        .collect()
}

/// Collates a sweep into a fixed-width table, one row per value.
pub fn sweep_table(param: &str, results: &[(String, RunOutcome)]) -> String {
    let hit = |h: Option<usize>| h.map_or("-".to_string(), |k| k.to_string());
    let mut out = format!(
        "{param:>10} {:>12} {:>8} {:>8} {:>8} {:>8} {:>6}\n",
        "final_res", "1e-4", "1e-6", "1e-8", "slope", "pass"
    );
    for (value, o) in results {
        let s = &o.summary;
        out.push_str(&format!(
            "{value:>10} {:>12.3e} {:>8} {:>8} {:>8} {:>8} {:>6}\n",
            s.final_residual_sq,
            hit(s.first_hit(1e-4)),
            hit(s.first_hit(1e-6)),
            hit(s.first_hit(1e-8)),
            s.slope.map_or("-".to_string(), |v| format!("{v:.2}")),
            s.passed()
        ));
    }
    out
}
