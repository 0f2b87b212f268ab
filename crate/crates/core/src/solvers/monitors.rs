//! Monitors for the core steppers. Each one re-anchors `d₀ = ‖x − x*‖²` and
//! its Lyapunov value at the start and after restarts.

use std::sync::Arc;

use super::lyapunov::{
    lyapunov_convex, lyapunov_monotone, lyapunov_ppa_convex, lyapunov_ppa_monotone, NEGATIVE_GAP_TOL,
};
use super::run::{Check, Monitor, TraceRecord};
use super::state::{MonotoneParams, Slot, SolverState};
use crate::error::{domain, Result};
use crate::schedules::Schedule;
use crate::Vector;

/// Relative tolerance on Lyapunov increases: `E(k+1) ≤ E(k) + tol·max(1, E(k))`.
pub const LYAPUNOV_RTOL: f64 = 1e-9;

/// Default absolute tolerance on rate slacks.
const RATE_ATOL: f64 = 1e-8;

pub(crate) fn lyapunov_slack(prev: f64, next: f64) -> f64 {
    prev + LYAPUNOV_RTOL * prev.abs().max(1.0) - next
}

/// Objective evaluator shared with a monitor.
pub type Objective = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;

fn gap_of(f: &Objective, fstar: f64, x: &Vector) -> Result<f64> {
    let gap = f(x) - fstar;
    if gap.is_nan() || gap < -NEGATIVE_GAP_TOL {
        return Err(domain(format!("objective gap {gap:e} is negative: bad reference solution")));
    }
    Ok(gap)
}

/// Convex PPA: Lyapunov `(Σc_i)(f − f*) + ½‖x − x*‖²`, the rate
/// `f(x_k) − f* ≤ d₀/(2Σ_{i<k} c_i)` and
/// `min_{j≤k} ‖x_{j+1} − x_j‖² ≤ d₀/(2Σ_{j≤k}Σ_{i≤j} c_i/c_j)`.
pub struct PpaConvexMonitor {
    f: Objective,
    fstar: f64,
    xstar: Vector,
    c: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    pub rate_atol: f64,
    d0: f64,
    sum_c: f64,
    double_sum: f64,
    min_step: f64,
    prev_e: f64,
}

impl PpaConvexMonitor {
    pub fn new(f: Objective, fstar: f64, xstar: Vector, c: Arc<dyn Fn(usize) -> f64 + Send + Sync>) -> Self {
        Self {
            f,
            fstar,
            xstar,
            c,
            rate_atol: RATE_ATOL,
            d0: 0.0,
            sum_c: 0.0,
            double_sum: 0.0,
            min_step: f64::INFINITY,
            prev_e: 0.0,
        }
    }
}

impl Monitor for PpaConvexMonitor {
    fn name(&self) -> &'static str {
        "ppa-convex"
    }

    fn anchor(&mut self, state: &SolverState) {
        self.d0 = (&state.x - &self.xstar).norm_squared();
        self.sum_c = 0.0;
        self.double_sum = 0.0;
        self.min_step = f64::INFINITY;
        self.prev_e = 0.5 * self.d0;
    }

    fn observe(
        &mut self,
        prev: &SolverState,
        next: &SolverState,
        rec: &mut TraceRecord,
        checks: &mut Vec<Check>,
    ) -> Result<()> {
        let c = (self.c)(prev.k);
        self.sum_c += c;
        self.double_sum += self.sum_c / c;
        self.min_step = self.min_step.min((&next.x - &prev.x).norm_squared());
        let gap = (self.f)(&next.x) - self.fstar;
        rec.objective_gap = Some(gap);
        let bound = self.d0 / (2.0 * self.sum_c);
        rec.extra.insert("rate_bound", bound);
        checks.push(Check::armed("rate", bound - gap + self.rate_atol));
        let step_bound = self.d0 / (2.0 * self.double_sum);
        checks.push(Check::armed("step", step_bound - self.min_step + self.rate_atol));
        let e = lyapunov_ppa_convex(self.sum_c, gap, &next.x, &self.xstar)?;
        rec.lyapunov = Some(e);
        checks.push(Check::armed("lyapunov", lyapunov_slack(self.prev_e, e)));
        self.prev_e = e;
        Ok(())
    }
}

/// PPA on a monotone operator: Lyapunov `k‖x_{k+1} − x_k‖² + ‖x_k − x*‖²`
/// (it needs `x_{k+1}`, so the value recorded with iterate `k+1` is `E(k)`)
/// and the rate `‖x_{k+1} − x_k‖² ≤ d₀/k`.
pub struct PpaMonotoneMonitor {
    xstar: Vector,
    pub rate_atol: f64,
    d0: f64,
    prev_e: Option<f64>,
}

impl PpaMonotoneMonitor {
    pub fn new(xstar: Vector) -> Self {
        Self { xstar, rate_atol: RATE_ATOL, d0: 0.0, prev_e: None }
    }
}

impl Monitor for PpaMonotoneMonitor {
    fn name(&self) -> &'static str {
        "ppa-monotone"
    }

    fn anchor(&mut self, state: &SolverState) {
        self.d0 = (&state.x - &self.xstar).norm_squared();
        self.prev_e = None;
    }

    fn observe(
        &mut self,
        prev: &SolverState,
        next: &SolverState,
        rec: &mut TraceRecord,
        checks: &mut Vec<Check>,
    ) -> Result<()> {
        let k = prev.k;
        let e = lyapunov_ppa_monotone(k, &prev.x, &next.x, &self.xstar)?;
        rec.lyapunov = Some(e);
        if let Some(p) = self.prev_e {
            checks.push(Check::armed("lyapunov", lyapunov_slack(p, e)));
        }
        self.prev_e = Some(e);
        if k >= 1 {
            let step = (&next.x - &prev.x).norm_squared();
            let bound = self.d0 / k as f64;
            rec.extra.insert("rate_bound", bound);
            checks.push(Check::armed("rate", bound - step + self.rate_atol));
        }
        Ok(())
    }
}

/// Convex symplectic method: Lyapunov `A_k(f − f*) + ½‖z − x*‖²`, the rate
/// `f(x_k) − f* ≤ d₀/(2A_k)` and
/// `min_j ‖∇̃f(x_{j+1})‖² ≤ d₀/Σ_{j≤k} a_j²`.
pub struct ConvexSppaMonitor {
    f: Objective,
    fstar: f64,
    xstar: Vector,
    schedule: Schedule,
    pub rate_atol: f64,
    d0: f64,
    sum_a2: f64,
    min_grad: f64,
    prev_e: f64,
}

impl ConvexSppaMonitor {
    pub fn new(f: Objective, fstar: f64, xstar: Vector, schedule: Schedule) -> Self {
        Self {
            f,
            fstar,
            xstar,
            schedule,
            rate_atol: RATE_ATOL,
            d0: 0.0,
            sum_a2: 0.0,
            min_grad: f64::INFINITY,
            prev_e: 0.0,
        }
    }
}

impl Monitor for ConvexSppaMonitor {
    fn name(&self) -> &'static str {
        "sppa-convex"
    }

    fn anchor(&mut self, state: &SolverState) {
        self.d0 = (&state.x - &self.xstar).norm_squared();
        self.sum_a2 = 0.0;
        self.min_grad = f64::INFINITY;
        // Restarts happen at clock zero, where A_0 = 0.
        self.prev_e = 0.5 * (&state.z - &self.xstar).norm_squared();
    }

    fn observe(
        &mut self,
        prev: &SolverState,
        next: &SolverState,
        rec: &mut TraceRecord,
        checks: &mut Vec<Check>,
    ) -> Result<()> {
        let gap = gap_of(&self.f, self.fstar, &next.x)?;
        rec.objective_gap = Some(gap);
        let big_a = self.schedule.at(next.k).big_a;
        let bound = self.d0 / (2.0 * big_a);
        rec.extra.insert("rate_bound", bound);
        checks.push(Check::armed("rate", bound - gap + self.rate_atol));

        let a = self.schedule.at(prev.k).a;
        self.sum_a2 += a * a;
        if let Some(g) = next.aux(Slot::Residual) {
            self.min_grad = self.min_grad.min(g.norm_squared());
            checks.push(Check::armed("gradient", self.d0 / self.sum_a2 - self.min_grad + self.rate_atol));
        }

        let e = lyapunov_convex(next, &self.schedule, gap, &self.xstar)?;
        rec.lyapunov = Some(e);
        checks.push(Check::armed("lyapunov", lyapunov_slack(self.prev_e, e)));
        self.prev_e = e;
        Ok(())
    }
}

/// Which residual envelope a [`MonotoneMonitor`] asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Envelope {
    /// `(r³−r²)d₀/(Ck[k+3r−C(k+1)])`.
    Strong,
    /// `(r³−r²)d₀/(Ck[k+r−C(k+1)])`.
    Weak,
}

/// Monotone symplectic methods (including the splitting schemes, which are
/// the same iteration on a firmly nonexpansive operator). Reads the residual
/// `g_k` from [`Slot::Residual`] and checks the Lyapunov function, the
/// residual envelope and `⟨g_k, x_k − x*⟩ ≤ (r³−r²)d₀/(2Crk)`. Checks are only
/// armed in guarantee mode.
pub struct MonotoneMonitor {
    params: MonotoneParams,
    xstar: Vector,
    pub envelope: Envelope,
    pub rate_atol: f64,
    /// Whether to assert the Lyapunov decrease; on by default.
    pub check_lyapunov: bool,
    d0: f64,
    prev_e: f64,
}

impl MonotoneMonitor {
    pub fn new(params: MonotoneParams, xstar: Vector) -> Self {
        Self {
            params,
            xstar,
            envelope: Envelope::Strong,
            rate_atol: RATE_ATOL,
            check_lyapunov: true,
            d0: 0.0,
            prev_e: 0.0,
        }
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = envelope;
        self
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }
}

impl Monitor for MonotoneMonitor {
    fn name(&self) -> &'static str {
        "sppa-monotone"
    }

    fn anchor(&mut self, state: &SolverState) {
        self.d0 = (&state.x - &self.xstar).norm_squared();
        self.prev_e = lyapunov_monotone(state, &self.params, &self.xstar).map(|e| e.total()).unwrap_or(f64::NAN);
    }

    fn observe(
        &mut self,
        _prev: &SolverState,
        next: &SolverState,
        rec: &mut TraceRecord,
        checks: &mut Vec<Check>,
    ) -> Result<()> {
        let armed = self.params.armed();
        let g = next.require(Slot::Residual)?;
        let k = next.k;
        let res = g.norm_squared();
        let inner = g.dot(&(&next.x - &self.xstar));
        rec.inner_product = Some(inner);
        let bound = match self.envelope {
            Envelope::Strong => self.params.residual_envelope(k, self.d0),
            Envelope::Weak => self.params.residual_envelope_weak(k, self.d0),
        };
        rec.extra.insert("residual_bound", bound);
        let inner_bound = self.params.inner_envelope(k, self.d0);
        checks.push(Check { name: "residual", slack: bound - res + self.rate_atol, armed });
        checks.push(Check { name: "inner", slack: inner_bound - inner + self.rate_atol, armed });

        let e = lyapunov_monotone(next, &self.params, &self.xstar)?.total();
        rec.lyapunov = Some(e);
        if self.check_lyapunov {
            checks.push(Check { name: "lyapunov", slack: lyapunov_slack(self.prev_e, e), armed });
        }
        self.prev_e = e;
        Ok(())
    }
}
