use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{Driver, IntegratorConfig, Method, OdeState, Point, Trajectory, ODE_RTOL};
use crate::error::{domain, Error, Result};
use crate::operators::{yosida_apply, ProxMap};
use crate::schedules::ContinuousSchedule;
use crate::solvers::{MonotoneParams, ParamMode};
use crate::Vector;

type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// Differentiable convex objective with a known minimiser.
#[derive(Clone)]
pub struct SmoothObjective {
    pub value: ValueFn,
    pub gradient: GradFn,
    pub xstar: Vector,
    pub fstar: f64,
}

impl fmt::Debug for SmoothObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothObjective").field("xstar", &self.xstar).field("fstar", &self.fstar).finish()
    }
}

impl SmoothObjective {
    pub fn new(
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
        xstar: Vector,
        fstar: f64,
    ) -> Self {
        Self { value: Arc::new(value), gradient: Arc::new(gradient), xstar, fstar }
    }

    /// `f(x) = ½‖x‖²` on `ℝⁿ`.
    pub fn half_square(n: usize) -> Self {
        Self::new(|x| 0.5 * x.norm_squared(), |x| x.clone(), Vector::zeros(n), 0.0)
    }

    pub fn gap(&self, x: &Vector) -> f64 {
        (self.value)(x) - self.fstar
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    GradientFlow,
    YosidaFlow,
    HrConvex,
    HrMonotone,
    HalpernLimit,
}

impl SystemKind {
    pub const ALL: [SystemKind; 5] =
        [Self::GradientFlow, Self::YosidaFlow, Self::HrConvex, Self::HrMonotone, Self::HalpernLimit];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::GradientFlow => "gradient_flow",
            Self::YosidaFlow => "yosida_flow",
            Self::HrConvex => "hr_convex",
            Self::HrMonotone => "hr_monotone",
            Self::HalpernLimit => "halpern",
        }
    }

    pub fn default_method(self) -> Method {
        match self {
            Self::GradientFlow | Self::HrConvex => Method::ImplicitMidpoint,
            _ => Method::Rk4OnYosida,
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| domain(format!("unknown continuous system `{s}`")))
    }
}

/// Which Lyapunov functional to evaluate, with the data it depends on.
pub enum LyapunovSpec<'a> {
    /// `(∫₀ᵗc)(f(X) − f*) + ½‖X − x*‖²`.
    GradientFlow { objective: &'a SmoothObjective, int_c: f64 },
    /// `t‖Ã(X)‖² + ½‖X − x*‖²`.
    YosidaFlow { res: &'a dyn ProxMap, xstar: &'a Vector },
    /// `A_t(f(X) − f*) + ½‖Z − x*‖²`.
    HrConvex { objective: &'a SmoothObjective, schedule: &'a ContinuousSchedule },
    /// `Ct(r + t − Ct)/2·‖Ã‖² + Crt⟨Ã, X − x*⟩ + ½‖CtÃ − r(Z − x*)‖²
    /// + (r³ − 2r²)/2·‖Z − x*‖²` with `Ã = Ã(X)`.
    HrMonotone { res: &'a dyn ProxMap, params: &'a MonotoneParams, xstar: &'a Vector },
    /// `t²‖Ã(X)‖² + t⟨Ã(X), X − x₀⟩`.
    HalpernLimit { res: &'a dyn ProxMap, x0: &'a Vector },
}

impl LyapunovSpec<'_> {
    pub fn kind(&self) -> SystemKind {
        match self {
            Self::GradientFlow { .. } => SystemKind::GradientFlow,
            Self::YosidaFlow { .. } => SystemKind::YosidaFlow,
            Self::HrConvex { .. } => SystemKind::HrConvex,
            Self::HrMonotone { .. } => SystemKind::HrMonotone,
            Self::HalpernLimit { .. } => SystemKind::HalpernLimit,
        }
    }
}

pub fn lyapunov_continuous(spec: &LyapunovSpec<'_>, state: &OdeState) -> Result<f64> {
    let t = state.t;
    Ok(match spec {
        LyapunovSpec::GradientFlow { objective, int_c } => {
            int_c * objective.gap(&state.x) + 0.5 * (&state.x - &objective.xstar).norm_squared()
        }
        LyapunovSpec::YosidaFlow { res, xstar } => {
            t * yosida_apply(*res, &state.x)?.norm_squared() + 0.5 * (&state.x - *xstar).norm_squared()
        }
        LyapunovSpec::HrConvex { objective, schedule } => {
            schedule.big_a(t) * objective.gap(&state.x) + 0.5 * (&state.z - &objective.xstar).norm_squared()
        }
        LyapunovSpec::HrMonotone { res, params, xstar } => {
            let (c, r) = (params.c, params.r);
            let at = yosida_apply(*res, &state.x)?;
            let zd = &state.z - *xstar;
            c * t * (r + t - c * t) / 2.0 * at.norm_squared()
                + c * r * t * at.dot(&(&state.x - *xstar))
                + 0.5 * (&at * (c * t) - &zd * r).norm_squared()
                + (r.powi(3) - 2.0 * r * r) / 2.0 * zd.norm_squared()
        }
        LyapunovSpec::HalpernLimit { res, x0 } => {
            let at = yosida_apply(*res, &state.x)?;
            t * t * at.norm_squared() + t * at.dot(&(&state.x - *x0))
        }
    })
}

fn check_dim(expected: usize, v: &Vector) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Dimension { expected, got: v.len() });
    }
    Ok(())
}

fn stack(x: &Vector, z: &Vector) -> Vector {
    let n = x.len();
    let mut y = Vector::zeros(2 * n);
    y.rows_mut(0, n).copy_from(x);
    y.rows_mut(n, n).copy_from(z);
    y
}

fn unstack(t: f64, y: &Vector) -> OdeState {
    let n = y.len() / 2;
    OdeState { t, x: y.rows(0, n).into_owned(), z: y.rows(n, n).into_owned() }
}

/// `num/den`, infinite while the denominator is still zero.
fn rate(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Running Simpson integrals `I₁(t) = ∫₀ᵗ g` and `I₂(t) = ∫₀ᵗ I₁`.
struct Quadrature<G> {
    g: G,
    i1: f64,
    i2: f64,
}

impl<G: Fn(f64) -> f64> Quadrature<G> {
    fn new(g: G) -> Self {
        Self { g, i1: 0.0, i2: 0.0 }
    }

    /// Advances over `[t − h, t]` (no-op for `h = 0`).
    fn advance(&mut self, t: f64, h: f64) {
        if h <= 0.0 {
            return;
        }
        let t0 = t - h;
        let simpson = |a: f64, b: f64| (b - a) / 6.0 * ((self.g)(a) + 4.0 * (self.g)(0.5 * (a + b)) + (self.g)(b));
        let mid = t0 + 0.5 * h;
        let i1_mid = self.i1 + simpson(t0, mid);
        let i1_end = self.i1 + simpson(t0, t);
        self.i2 += h / 6.0 * (self.i1 + 4.0 * i1_mid + i1_end);
        self.i1 = i1_end;
    }
}

/// Gradient flow `Ẋ = −c_t∇f(X)` with
/// `f(X) − f* ≤ d₀/(2∫c)` and `inf_{v≤t} ‖∇f(X(v))‖² ≤ d₀/(2∫∫c)`, where
/// `d₀ = ‖x₀ − x*‖²`.
pub fn integrate_gradient_flow(
    objective: &SmoothObjective,
    c: impl Fn(f64) -> f64,
    x0: &Vector,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_dim(objective.xstar.len(), x0)?;
    let rhs = |t: f64, x: &Vector| Ok((objective.gradient)(x) * -c(t));
    let to_state = |t: f64, y: &Vector| OdeState { t, x: y.clone(), z: y.clone() };
    let driver = Driver {
        system: SystemKind::GradientFlow.as_str(),
        columns: vec!["lyapunov", "gap", "grad_sq_inf", "gap_bound", "grad_bound"],
        rhs: &rhs,
        method: cfg.method.unwrap_or(SystemKind::GradientFlow.default_method()),
        grading: None,
        to_state: &to_state,
    };
    let d0 = (x0 - &objective.xstar).norm_squared();
    let mut quad = Quadrature::new(&c);
    let (mut prev, mut grad_inf, mut tol) = (f64::NAN, f64::INFINITY, 0.0);
    driver.run(x0.clone(), cfg, |s, h| {
        quad.advance(s.t, h);
        let e = lyapunov_continuous(&LyapunovSpec::GradientFlow { objective, int_c: quad.i1 }, s)?;
        if prev.is_nan() {
            tol = ODE_RTOL * e.max(1.0);
            prev = e;
        }
        let gap = objective.gap(&s.x);
        grad_inf = grad_inf.min((objective.gradient)(&s.x).norm_squared());
        let (gb, db) = (rate(d0, 2.0 * quad.i1), rate(d0, 2.0 * quad.i2));
        let points = vec![
            Point { name: "lyapunov", value: e, bound: prev, tol, armed: true },
            Point { name: "gap_rate", value: gap, bound: gb, tol, armed: true },
            Point { name: "grad_rate", value: grad_inf, bound: db, tol, armed: true },
        ];
        prev = e;
        Ok((vec![e, gap, grad_inf, gb, db], points))
    })
}

/// Yosida flow `Ẋ = J_A(X) − X = −Ã(X)` with `‖Ã(X)‖² ≤ d₀/(2t)`.
pub fn integrate_yosida_flow(
    res: &dyn ProxMap,
    x0: &Vector,
    xstar: &Vector,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_dim(res.dim(), x0)?;
    check_dim(res.dim(), xstar)?;
    let rhs = |_t: f64, x: &Vector| Ok(-yosida_apply(res, x)?);
    let to_state = |t: f64, y: &Vector| OdeState { t, x: y.clone(), z: y.clone() };
    let driver = Driver {
        system: SystemKind::YosidaFlow.as_str(),
        columns: vec!["lyapunov", "res_sq", "res_bound"],
        rhs: &rhs,
        method: cfg.method.unwrap_or(SystemKind::YosidaFlow.default_method()),
        grading: None,
        to_state: &to_state,
    };
    let d0 = (x0 - xstar).norm_squared();
    let (mut prev, mut tol) = (f64::NAN, 0.0);
    driver.run(x0.clone(), cfg, |s, _| {
        let e = lyapunov_continuous(&LyapunovSpec::YosidaFlow { res, xstar }, s)?;
        if prev.is_nan() {
            tol = ODE_RTOL * e.max(1.0);
            prev = e;
        }
        let res_sq = yosida_apply(res, &s.x)?.norm_squared();
        let bound = rate(d0, 2.0 * s.t);
        let points = vec![
            Point { name: "lyapunov", value: e, bound: prev, tol, armed: true },
            Point { name: "res_rate", value: res_sq, bound, tol, armed: true },
        ];
        prev = e;
        Ok((vec![e, res_sq, bound], points))
    })
}

/// High-resolution system `Ż = −a_t∇f(X)`, `Z = b_tẊ + c_t∇f(X) + X`,
/// stepped as `Ẋ = (Z − X − c_t∇f(X))/b_t`. Checks
/// `f(X) − f* ≤ d₀/(2A_t)` and `inf ‖∇f‖² ≤ d₀/(2∫a c)`.
pub fn integrate_hr_convex(
    objective: &SmoothObjective,
    schedule: &ContinuousSchedule,
    x0: &Vector,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let n = objective.xstar.len();
    check_dim(n, x0)?;
    let rhs = |t: f64, y: &Vector| {
        let (x, z) = (y.rows(0, n), y.rows(n, n));
        let g = (objective.gradient)(&x.into_owned());
        let xdot = (z - x - &g * schedule.c(t)) / schedule.b(t);
        let zdot = g * -schedule.a(t);
        Ok(stack(&xdot, &zdot))
    };
    let driver = Driver {
        system: SystemKind::HrConvex.as_str(),
        columns: vec!["lyapunov", "gap", "grad_sq_inf", "gap_bound", "grad_bound"],
        rhs: &rhs,
        method: cfg.method.unwrap_or(SystemKind::HrConvex.default_method()),
        grading: Some(2.0),
        to_state: &unstack,
    };
    let d0 = (x0 - &objective.xstar).norm_squared();
    let mut quad = Quadrature::new(|t| schedule.a(t) * schedule.c(t));
    let mut first = true;
    let (mut prev, mut grad_inf, mut tol) = (f64::NAN, f64::INFINITY, 0.0);
    driver.run(stack(x0, x0), cfg, |s, h| {
        if first {
            // Integrals over [0, t₀] of the singular start-up interval.
            quad.advance(s.t, s.t);
            first = false;
        } else {
            quad.advance(s.t, h);
        }
        let e = lyapunov_continuous(&LyapunovSpec::HrConvex { objective, schedule }, s)?;
        if prev.is_nan() {
            tol = ODE_RTOL * e.max(1.0);
            prev = e;
        }
        let gap = objective.gap(&s.x);
        grad_inf = grad_inf.min((objective.gradient)(&s.x).norm_squared());
        let (gb, db) = (rate(d0, 2.0 * schedule.big_a(s.t)), rate(d0, 2.0 * quad.i1));
        let points = vec![
            Point { name: "lyapunov", value: e, bound: prev, tol, armed: true },
            Point { name: "gap_rate", value: gap, bound: gb, tol, armed: true },
            Point { name: "grad_rate", value: grad_inf, bound: db, tol, armed: true },
        ];
        prev = e;
        Ok((vec![e, gap, grad_inf, gb, db], points))
    })
}

/// High-resolution system for a monotone operator,
/// `Ż = −(C/r)Ã(X)`, `Z = (t/r)Ẋ + (1 + t/r)Ã(X) + X`. Checks
/// `‖Ã‖² ≤ (r³ − r²)d₀/(Ct(3r + t − Ct))` and
/// `⟨Ã, X − x*⟩ ≤ (r² − r)d₀/(2Ct)`, armed only in guarantee mode.
pub fn integrate_hr_monotone(
    res: &dyn ProxMap,
    params: &MonotoneParams,
    x0: &Vector,
    xstar: &Vector,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let n = res.dim();
    check_dim(n, x0)?;
    check_dim(n, xstar)?;
    let (c, r) = (params.c, params.r);
    let rhs = |t: f64, y: &Vector| {
        let (x, z) = (y.rows(0, n).into_owned(), y.rows(n, n));
        let at = yosida_apply(res, &x)?;
        let xdot = (z - &x - &at * (1.0 + t / r)) * (r / t);
        Ok(stack(&xdot, &(at * (-c / r))))
    };
    let driver = Driver {
        system: SystemKind::HrMonotone.as_str(),
        columns: vec!["lyapunov", "res_sq", "inner", "res_bound", "inner_bound"],
        rhs: &rhs,
        method: cfg.method.unwrap_or(SystemKind::HrMonotone.default_method()),
        grading: Some(r.max(2.0)),
        to_state: &unstack,
    };
    let armed = params.mode == ParamMode::Guarantee;
    let d0 = (x0 - xstar).norm_squared();
    let (mut prev, mut tol) = (f64::NAN, 0.0);
    driver.run(stack(x0, x0), cfg, |s, _| {
        let e = lyapunov_continuous(&LyapunovSpec::HrMonotone { res, params, xstar }, s)?;
        if prev.is_nan() {
            tol = ODE_RTOL * e.max(1.0);
            prev = e;
        }
        let at = yosida_apply(res, &s.x)?;
        let (res_sq, inner) = (at.norm_squared(), at.dot(&(&s.x - xstar)));
        let t = s.t;
        let rb = rate((r.powi(3) - r * r) * d0, c * t * (3.0 * r + t - c * t));
        let ib = rate((r * r - r) * d0, 2.0 * c * t);
        let points = vec![
            Point { name: "lyapunov", value: e, bound: prev, tol, armed },
            Point { name: "res_rate", value: res_sq, bound: rb, tol, armed },
            Point { name: "inner_rate", value: inner, bound: ib, tol, armed },
        ];
        prev = e;
        Ok((vec![e, res_sq, inner, rb, ib], points))
    })
}

/// Continuous limit of the Halpern iteration, `tẊ + X + 2tÃ(X) = x₀`, with
/// `t²‖Ã‖² + t⟨Ã, X − x₀⟩` nonincreasing from zero,
/// `‖Ã‖² ≤ d₀/(t² + 2t)` and `⟨Ã, X − x*⟩ ≤ d₀/(2t)`.
pub fn integrate_halpern_limit(
    res: &dyn ProxMap,
    x0: &Vector,
    xstar: &Vector,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_dim(res.dim(), x0)?;
    check_dim(res.dim(), xstar)?;
    let rhs = |t: f64, x: &Vector| Ok((x0 - x) / t - yosida_apply(res, x)? * 2.0);
    let to_state = |t: f64, y: &Vector| OdeState { t, x: y.clone(), z: x0.clone() };
    let driver = Driver {
        system: SystemKind::HalpernLimit.as_str(),
        columns: vec!["lyapunov", "res_sq", "inner", "res_bound", "inner_bound"],
        rhs: &rhs,
        method: cfg.method.unwrap_or(SystemKind::HalpernLimit.default_method()),
        grading: Some(2.0),
        to_state: &to_state,
    };
    let d0 = (x0 - xstar).norm_squared();
    let (mut prev, mut tol) = (f64::NAN, 0.0);
    driver.run(x0.clone(), cfg, |s, _| {
        let e = lyapunov_continuous(&LyapunovSpec::HalpernLimit { res, x0 }, s)?;
        if prev.is_nan() {
            // E(0) = 0; the first sample sits at t₀ > 0.
            tol = ODE_RTOL;
            prev = e.max(0.0);
        }
        let at = yosida_apply(res, &s.x)?;
        let (res_sq, inner) = (at.norm_squared(), at.dot(&(&s.x - xstar)));
        let t = s.t;
        let (rb, ib) = (rate(d0, t * t + 2.0 * t), rate(d0, 2.0 * t));
        let points = vec![
            Point { name: "lyapunov", value: e, bound: prev, tol, armed: true },
            Point { name: "res_rate", value: res_sq, bound: rb, tol, armed: true },
            Point { name: "inner_rate", value: inner, bound: ib, tol, armed: true },
        ];
        prev = e;
        Ok((vec![e, res_sq, inner, rb, ib], points))
    })
}
