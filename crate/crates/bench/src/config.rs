//! Experiment configuration: one JSON document per run, plus named presets.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sppa::problems::{gen_basis_pursuit, gen_fused_lasso, gen_lasso, gen_matrix_game, gen_quadratic_l1};
use sppa::problems::{Kind, ProblemInstance};
use sppa::schedules::Schedule;
use sppa::solvers::MonotoneParams;

use crate::BenchError;

fn config_err(msg: impl Into<String>) -> BenchError {
    BenchError::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: String,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ProblemSpec {
    pub fn kind(&self) -> Result<Kind, BenchError> {
        self.kind.parse().map_err(|e: sppa::Error| config_err(e.to_string()))
    }

    fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    fn validate(&self) -> Result<Kind, BenchError> {
        let kind = self.kind()?;
        let allowed: &[&str] = match kind {
            Kind::Lasso | Kind::QuadraticL1 => &["mu"],
            Kind::FusedLasso => &["mu1", "mu2"],
            Kind::BasisPursuit | Kind::MatrixGame => &[],
        };
        if let Some(bad) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(config_err(format!("{kind} instances take no parameter `{bad}`")));
        }
        if self.n == 0 || (kind != Kind::QuadraticL1 && self.m == 0) {
            return Err(config_err("problem dimensions must be positive"));
        }
        Ok(kind)
    }

    /// Generates the seeded instance. Missing weights take the defaults
    /// `mu = 1`, `mu1 = 5`, `mu2 = 10`.
    pub fn generate(&self) -> Result<ProblemInstance, BenchError> {
        let (m, n, seed) = (self.m, self.n, self.seed);
        Ok(match self.validate()? {
            Kind::Lasso => gen_lasso(m, n, seed, self.param("mu", 1.0))?,
            Kind::BasisPursuit => gen_basis_pursuit(m, n, seed)?,
            Kind::FusedLasso => gen_fused_lasso(m, n, seed, self.param("mu1", 5.0), self.param("mu2", 10.0))?,
            Kind::MatrixGame => gen_matrix_game(m, n, seed)?,
            Kind::QuadraticL1 => gen_quadratic_l1(n, seed, self.param("mu", 1.0))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Salm,
    Alm,
    Sadmm,
    SadmmV2,
    Admm,
    Spdhg,
    Pdhg,
    Sdr,
    Dr,
    SppaMonotone,
    SppaConvex,
    Ppa,
    Halpern,
}

impl SolverKind {
    pub const ALL: [SolverKind; 13] = [
        Self::Salm,
        Self::Alm,
        Self::Sadmm,
        Self::SadmmV2,
        Self::Admm,
        Self::Spdhg,
        Self::Pdhg,
        Self::Sdr,
        Self::Dr,
        Self::SppaMonotone,
        Self::SppaConvex,
        Self::Ppa,
        Self::Halpern,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Salm => "salm",
            Self::Alm => "alm",
            Self::Sadmm => "sadmm",
            Self::SadmmV2 => "sadmm-v2",
            Self::Admm => "admm",
            Self::Spdhg => "spdhg",
            Self::Pdhg => "pdhg",
            Self::Sdr => "sdr",
            Self::Dr => "dr",
            Self::SppaMonotone => "sppa-monotone",
            Self::SppaConvex => "sppa-convex",
            Self::Ppa => "ppa",
            Self::Halpern => "halpern",
        }
    }

    pub fn problems(self) -> &'static [Kind] {
        match self {
            Self::Salm | Self::Alm => &[Kind::Lasso, Kind::QuadraticL1],
            Self::Sadmm | Self::SadmmV2 | Self::Admm => &[Kind::Lasso, Kind::BasisPursuit, Kind::FusedLasso],
            Self::Spdhg | Self::Pdhg => &[Kind::MatrixGame],
            Self::Sdr | Self::Dr => &[Kind::BasisPursuit],
            Self::SppaMonotone | Self::Ppa | Self::Halpern => &[Kind::QuadraticL1, Kind::BasisPursuit],
            Self::SppaConvex => &[Kind::QuadraticL1],
        }
    }

    /// Whether the method takes `(C, r)`.
    pub fn symplectic_monotone(self) -> bool {
        matches!(self, Self::Sadmm | Self::SadmmV2 | Self::Spdhg | Self::Sdr | Self::SppaMonotone)
    }

    fn uses_rho(self) -> bool {
        !matches!(self, Self::Salm | Self::Spdhg | Self::Pdhg | Self::SppaConvex)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| config_err(format!("unknown solver `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    ConstantIndex { c: f64 },
    RisingFactorial { p: u32 },
    Exponential { rho: f64 },
    SalmStandard { scale: f64 },
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<Schedule, BenchError> {
        Ok(match *self {
            Self::ConstantIndex { c } => Schedule::constant_index(c)?,
            Self::RisingFactorial { p } => Schedule::rising_factorial(p)?,
            Self::Exponential { rho } => Schedule::exponential(rho)?,
            Self::SalmStandard { scale } => Schedule::salm_standard(scale)?,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Guarantee,
    Exploratory,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    /// `C` for the symplectic monotone methods, the step `c` for PPA.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu2: Option<f64>,
    #[serde(default)]
    pub mode: Mode,
}

impl SolverSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.into(),
            schedule: None,
            c: None,
            r: None,
            rho: None,
            mu1: None,
            mu2: None,
            mode: Mode::default(),
        }
    }

    pub fn kind(&self) -> Result<SolverKind, BenchError> {
        self.name.parse()
    }

    /// `(C, r)` with defaults `(1, 2)`, checked against the mode.
    pub fn monotone_params(&self) -> Result<MonotoneParams, BenchError> {
        let (c, r) = (self.c.unwrap_or(1.0), self.r.unwrap_or(2.0));
        let p = match self.mode {
            Mode::Guarantee => MonotoneParams::guarantee(c, r),
            Mode::Exploratory => MonotoneParams::exploratory(c, r),
            Mode::Auto => MonotoneParams::auto(c, r),
        };
        p.map_err(|e| config_err(e.to_string()))
    }

    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(1.0)
    }

    /// The schedule; S-ALM defaults to `salm_standard(ρ)`, the convex SPPA to
    /// `constant_index(1)`.
    pub fn schedule(&self) -> Result<Schedule, BenchError> {
        match (self.schedule, self.kind()?) {
            (Some(s), _) => s.build(),
            (None, SolverKind::Salm) => Ok(Schedule::salm_standard(self.rho.unwrap_or(10.0))?),
            (None, _) => Ok(Schedule::constant_index(1.0)?),
        }
    }
}

/// Monitors a run can request.
pub const MONITORS: [&str; 1] = ["envelope"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    pub iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart_every: Option<usize>,
    #[serde(default)]
    pub monitors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    /// Checks names, problem/solver compatibility and parameter ranges.
    pub fn validate(&self) -> Result<(), BenchError> {
        let kind = self.problem.validate()?;
        let solver = self.solver.kind()?;
        if !solver.problems().contains(&kind) {
            return Err(config_err(format!("solver `{solver}` does not apply to {kind} instances")));
        }
        if solver.symplectic_monotone() {
            self.solver.monotone_params()?;
        } else if self.solver.r.is_some() {
            return Err(config_err(format!("solver `{solver}` takes no r")));
        }
        if matches!(solver, SolverKind::Salm | SolverKind::SppaConvex) {
            self.solver.schedule()?;
        } else if self.solver.schedule.is_some() {
            return Err(config_err(format!("solver `{solver}` takes no schedule")));
        }
        let positive = |name: &str, v: Option<f64>| match v {
            Some(v) if !(v > 0.0 && v.is_finite()) => Err(config_err(format!("{name} must be positive, got {v}"))),
            _ => Ok(()),
        };
        positive("rho", self.solver.rho)?;
        positive("c", self.solver.c)?;
        positive("mu1", self.solver.mu1)?;
        positive("mu2", self.solver.mu2)?;
        if self.solver.rho.is_some() && !solver.uses_rho() {
            return Err(config_err(format!("solver `{solver}` takes no rho")));
        }
        if (self.solver.mu1.is_some() || self.solver.mu2.is_some()) && kind != Kind::MatrixGame {
            return Err(config_err("step sizes mu1/mu2 only apply to matrix games"));
        }
        if kind == Kind::BasisPursuit && matches!(solver, SolverKind::Ppa) && self.solver.c.is_some_and(|c| c != 1.0) {
            return Err(config_err("the Douglas-Rachford operator only has a unit-step resolvent; use c = 1"));
        }
        if self.restart_every == Some(0) {
            return Err(config_err("restart_every must be positive (omit it to disable restarts)"));
        }
        for m in &self.monitors {
            if !MONITORS.contains(&m.as_str()) {
                return Err(config_err(format!("unknown monitor `{m}`")));
            }
        }
        if self.monitors.iter().any(|m| m == "envelope") && !envelope_available(solver, kind) {
            return Err(config_err(format!("no envelope monitor for `{solver}` on {kind}")));
        }
        Ok(())
    }

    /// Sets one named field from a string, as sweeps and CLI flags do.
    pub fn set(&mut self, param: &str, value: &str) -> Result<(), BenchError> {
        let num = || value.parse::<f64>().map_err(|_| config_err(format!("`{value}` is not a number for {param}")));
        let int = || value.parse::<usize>().map_err(|_| config_err(format!("`{value}` is not a count for {param}")));
        match param {
            "C" | "c" => self.solver.c = Some(num()?),
            "r" => self.solver.r = Some(num()?),
            "rho" => self.solver.rho = Some(num()?),
            "iters" => self.iters = int()?,
            "seed" => self.problem.seed = value.parse().map_err(|_| config_err(format!("`{value}` is not a seed")))?,
            "restart" | "restart_every" => {
                self.restart_every = match value {
                    "none" | "0" => None,
                    _ => Some(int()?),
                }
            }
            other => return Err(config_err(format!("cannot sweep over `{other}`"))),
        }
        self.validate()
    }
}

pub(crate) fn envelope_available(solver: SolverKind, kind: Kind) -> bool {
    match solver {
        SolverKind::Salm => true,
        SolverKind::Sadmm => matches!(kind, Kind::BasisPursuit | Kind::FusedLasso),
        SolverKind::Spdhg => true,
        SolverKind::SppaMonotone | SolverKind::SppaConvex | SolverKind::Ppa => kind == Kind::QuadraticL1,
        _ => false,
    }
}

pub const PRESETS: [&str; 4] = ["salm-lasso", "sadmm-bp", "spdhg-game", "sadmm-fused"];

/// Built-in experiments mirroring the published runs.
pub fn preset(name: &str) -> Result<ExperimentConfig, BenchError> {
    let problem = |kind: &str, m, n, params: &[(&str, f64)]| ProblemSpec {
        kind: kind.into(),
        m,
        n,
        seed: 42,
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    };
    let cfg = match name {
        "salm-lasso" => ExperimentConfig {
            preset: Some(name.into()),
            problem: problem("lasso", 100, 200, &[("mu", 1.0)]),
            solver: SolverSpec {
                schedule: Some(ScheduleSpec::SalmStandard { scale: 10.0 }),
                ..SolverSpec::named("salm")
            },
            iters: 1000,
            restart_every: None,
            monitors: vec!["envelope".into()],
            output: None,
        },
        "sadmm-bp" => ExperimentConfig {
            preset: Some(name.into()),
            problem: problem("basis_pursuit", 100, 200, &[]),
            solver: SolverSpec { c: Some(1.0), r: Some(2.0), rho: Some(10.0), ..SolverSpec::named("sadmm") },
            iters: 5000,
            restart_every: None,
            monitors: vec!["envelope".into()],
            output: None,
        },
        "spdhg-game" => ExperimentConfig {
            preset: Some(name.into()),
            problem: problem("matrix_game", 50, 50, &[]),
            solver: SolverSpec { c: Some(1.0), r: Some(2.0), ..SolverSpec::named("spdhg") },
            iters: 10_000,
            restart_every: Some(50),
            monitors: vec![],
            output: None,
        },
        "sadmm-fused" => ExperimentConfig {
            preset: Some(name.into()),
            problem: problem("fused_lasso", 100, 200, &[("mu1", 5.0), ("mu2", 10.0)]),
            solver: SolverSpec {
                c: Some(1.0),
                r: Some(2.0),
                rho: Some(1.0),
                mode: Mode::Exploratory,
                ..SolverSpec::named("sadmm")
            },
            iters: 20_000,
            restart_every: None,
            monitors: vec![],
            output: None,
        },
        other => return Err(config_err(format!("unknown preset `{other}` (known: {})", PRESETS.join(", ")))),
    };
    cfg.validate()?;
    Ok(cfg)
}
