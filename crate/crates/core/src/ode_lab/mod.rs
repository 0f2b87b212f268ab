//! Continuous-time counterparts of the solvers: gradient flow, the Yosida
//! flow, the high-resolution systems for convex functions and monotone
//! operators, and the Halpern limit, each integrated with its Lyapunov
//! function and rate bounds checked at every mesh point.
//!
//! Gradient-driven systems use the implicit midpoint rule; Yosida-driven
//! systems use RK4 (their right-hand sides are globally Lipschitz away from
//! `t = 0`). The high-resolution systems are singular at `t = 0`; they start
//! at `t₀ = h·2⁻²⁰` with `X = Z = x₀` on a geometric mesh (`h_n = t_n/s`)
//! that switches to step `h` once `t_n/s` reaches it.

mod integrators;
mod systems;

pub use systems::{
    integrate_gradient_flow, integrate_halpern_limit, integrate_hr_convex, integrate_hr_monotone,
    integrate_yosida_flow, lyapunov_continuous, LyapunovSpec, SmoothObjective, SystemKind,
};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{domain, Result};
use crate::Vector;

/// Relative tolerance for Lyapunov monotonicity and rate checks:
/// `tol = ODE_RTOL·max(1, E(0))`.
pub const ODE_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OdeState {
    pub t: f64,
    pub x: Vector,
    pub z: Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ImplicitMidpoint,
    Rk4OnYosida,
}

/// Step `h` and horizon `T`; `method = None` selects the system's default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub h: f64,
    pub horizon: f64,
    pub method: Option<Method>,
}

impl IntegratorConfig {
    pub fn new(h: f64, horizon: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite() && horizon.is_finite() && h <= horizon) {
            return Err(domain(format!("need 0 < h ≤ T, got h={h}, T={horizon}")));
        }
        Ok(Self { h, horizon, method: None })
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = Some(method);
        self
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { h: 1e-3, horizon: 20.0, method: None }
    }
}

/// Pointwise check statistics. `slack = bound + tol − value`; a check fails
/// when its slack is negative.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeCheck {
    pub armed: bool,
    pub evaluations: usize,
    pub failures: usize,
    pub worst_slack: f64,
    pub first_failure: Option<f64>,
}

impl OdeCheck {
    fn new(armed: bool) -> Self {
        Self { armed, evaluations: 0, failures: 0, worst_slack: f64::INFINITY, first_failure: None }
    }

    pub fn passed(&self) -> bool {
        !self.armed || self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: OdeState,
    /// Monitor values, aligned with [`Trajectory::columns`].
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub system: &'static str,
    pub columns: Vec<&'static str>,
    pub samples: Vec<Sample>,
    pub checks: BTreeMap<&'static str, OdeCheck>,
}

impl Trajectory {
    pub fn passed(&self) -> bool {
        self.checks.values().all(OdeCheck::passed)
    }

    pub fn failed_checks(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|(_, c)| !c.passed()).map(|(n, _)| *n).collect()
    }

    pub fn last(&self) -> &OdeState {
        &self.samples.last().expect("trajectories are never empty").state
    }

    /// Monitor column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| *c == name)?;
        Some(self.samples.iter().map(|s| s.values[j]).collect())
    }

    /// CSV with columns `t, x0.., z0.., <monitors>`.
    pub fn to_csv(&self) -> String {
        let n = self.samples.first().map_or(0, |s| s.state.x.len());
        let mut out = String::from("t");
        for i in 0..n {
            write!(out, ",x{i}").unwrap();
        }
        for i in 0..n {
            write!(out, ",z{i}").unwrap();
        }
        for c in &self.columns {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
        for s in &self.samples {
            write!(out, "{:?}", s.state.t).unwrap();
            for v in s.state.x.iter().chain(s.state.z.iter()).chain(s.values.iter()) {
                write!(out, ",{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// One pointwise comparison `value ≤ bound + tol`.
pub(crate) struct Point {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub tol: f64,
    pub armed: bool,
}

pub(crate) struct Driver<'a> {
    pub system: &'static str,
    pub columns: Vec<&'static str>,
    pub rhs: &'a integrators::Rhs<'a>,
    pub method: Method,
    pub grading: Option<f64>,
    pub to_state: &'a dyn Fn(f64, &Vector) -> OdeState,
}

impl Driver<'_> {
    /// Integrates from `y0` and calls `observe(state, h_prev)` at every mesh
    /// point (with `h_prev = 0` at the first one).
    pub fn run(
        &self,
        y0: Vector,
        cfg: &IntegratorConfig,
        mut observe: impl FnMut(&OdeState, f64) -> Result<(Vec<f64>, Vec<Point>)>,
    ) -> Result<Trajectory> {
        let ts = integrators::mesh(cfg.h, cfg.horizon, self.grading);
        let mut checks: BTreeMap<&'static str, OdeCheck> = BTreeMap::new();
        let mut samples = Vec::with_capacity(ts.len());
        let mut y = y0;
        let mut record = |state: OdeState, h_prev: f64, samples: &mut Vec<Sample>| -> Result<()> {
            let (values, points) = observe(&state, h_prev)?;
            for p in points {
                let c = checks.entry(p.name).or_insert_with(|| OdeCheck::new(p.armed));
                let slack = p.bound + p.tol - p.value;
                c.evaluations += 1;
                if slack < c.worst_slack || slack.is_nan() {
                    c.worst_slack = slack;
                }
                if !(slack >= 0.0) {
                    c.failures += 1;
                    c.first_failure.get_or_insert(state.t);
                }
            }
            samples.push(Sample { state, values });
            Ok(())
        };
        record((self.to_state)(ts[0], &y), 0.0, &mut samples)?;
        for w in ts.windows(2) {
            let (t, h) = (w[0], w[1] - w[0]);
            y = match self.method {
                Method::ImplicitMidpoint => integrators::implicit_midpoint_step(self.rhs, t, &y, h)?,
                Method::Rk4OnYosida => integrators::rk4_step(self.rhs, t, &y, h)?,
            };
            integrators::check_divergence(w[1], &y)?;
            record((self.to_state)(w[1], &y), h, &mut samples)?;
        }
        Ok(Trajectory { system: self.system, columns: self.columns.clone(), samples, checks })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(0.1, 1.0).is_ok());
        assert!(IntegratorConfig::new(2.0, 1.0).is_err());
        assert!(IntegratorConfig::new(0.0, 1.0).is_err());
        let d = IntegratorConfig::default();
        assert_eq!((d.h, d.horizon), (1e-3, 20.0));
    }
}
