//! Parameter schedules for the convex symplectic proximal point method.
//!
//! A [`Schedule`] supplies `(A_k, a_k, b_k, c_k)`. The Lyapunov argument
//! behind the method needs
//!
//! * `A_0 = b_0 = 0`,
//! * `A_k = a_k b_k`,
//! * `A_{k+1} − A_k ≤ a_k`,
//! * `c_k ≥ a_k`,
//!
//! and [`validate`] checks exactly these. Schedules are evaluated lazily by
//! formula; nothing is stored per index.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};

/// Relative tolerance admitted by [`validate`] (rounding noise only).
pub const VALIDATION_RTOL: f64 = 1e-12;

type IndexFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    ConstantIndex { c: f64 },
    RisingFactorial { p: u32 },
    Exponential { rho: f64 },
    SalmStandard { scale: f64 },
    Custom { big_a: IndexFn, a: IndexFn, b: IndexFn, c: IndexFn },
}

/// The four sequences evaluated at one index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleValues {
    pub big_a: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Clone)]
pub struct Schedule {
    name: String,
    kind: Kind,
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Schedule").field("name", &self.name).finish()
    }
}

fn rising(k: f64, p: u32) -> f64 {
    (0..p).map(|i| k + i as f64).product()
}

impl Schedule {
    /// `A_k = (c/2)k(k+1)`, `a_k = c(k+1)`, `b_k = k/2`, `c_k = c(k+2)`.
    /// The prox index `c_k/(b_k+1)` is the constant `2c`.
    pub fn constant_index(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain(format!("constant_index needs c > 0, got {c}")));
        }
        Ok(Self { name: format!("constant_index(c={c})"), kind: Kind::ConstantIndex { c } })
    }

    /// `A_k = k^(p)` (rising factorial), `a_k = p(k+1)^(p−1)`, `b_k = k/p`,
    /// `c_k = a_k`.
    pub fn rising_factorial(p: u32) -> Result<Self> {
        if p < 2 {
            return Err(domain(format!("rising_factorial needs p ≥ 2, got {p}")));
        }
        Ok(Self { name: format!("rising_factorial(p={p})"), kind: Kind::RisingFactorial { p } })
    }

    /// `A_k = ρ^k − 1`, `a_k = ρ^k(ρ−1)`, `b_k = A_k/a_k`, `c_k = a_k`.
    pub fn exponential(rho: f64) -> Result<Self> {
        if !(rho > 1.0 && rho.is_finite()) {
            return Err(domain(format!("exponential needs rho > 1, got {rho}")));
        }
        Ok(Self { name: format!("exponential(rho={rho})"), kind: Kind::Exponential { rho } })
    }

    /// The augmented-Lagrangian parameters `a_k = s(k+1)/4`, `b_k = k/2`,
    /// `c_k = s(k+2)/2`, `A_k = s·k(k+1)/8`. With scale `s` the effective
    /// penalty `c_k/(b_k+1)` equals `s`.
    pub fn salm_standard(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(domain(format!("salm_standard needs a positive scale, got {scale}")));
        }
        Ok(Self { name: format!("salm_standard(scale={scale})"), kind: Kind::SalmStandard { scale } })
    }

    /// Arbitrary sequences, e.g. for degenerate or deliberately invalid
    /// parameter choices.
    pub fn custom<FA, Fa, Fb, Fc>(name: impl Into<String>, big_a: FA, a: Fa, b: Fb, c: Fc) -> Self
    where
        FA: Fn(usize) -> f64 + Send + Sync + 'static,
        Fa: Fn(usize) -> f64 + Send + Sync + 'static,
        Fb: Fn(usize) -> f64 + Send + Sync + 'static,
        Fc: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: Kind::Custom { big_a: Arc::new(big_a), a: Arc::new(a), b: Arc::new(b), c: Arc::new(c) },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn at(&self, k: usize) -> ScheduleValues {
        let kf = k as f64;
        match &self.kind {
            Kind::ConstantIndex { c } => {
                ScheduleValues { big_a: 0.5 * c * kf * (kf + 1.0), a: c * (kf + 1.0), b: 0.5 * kf, c: c * (kf + 2.0) }
            }
            Kind::RisingFactorial { p } => {
                let a = *p as f64 * rising(kf + 1.0, p - 1);
                ScheduleValues { big_a: rising(kf, *p), a, b: kf / *p as f64, c: a }
            }
            Kind::Exponential { rho } => {
                let rk = rho.powf(kf);
                let a = rk * (rho - 1.0);
                let big_a = rk - 1.0;
                ScheduleValues { big_a, a, b: big_a / a, c: a }
            }
            Kind::SalmStandard { scale } => ScheduleValues {
                big_a: scale * kf * (kf + 1.0) / 8.0,
                a: scale * (kf + 1.0) / 4.0,
                b: 0.5 * kf,
                c: scale * (kf + 2.0) / 2.0,
            },
            Kind::Custom { big_a, a, b, c } => ScheduleValues { big_a: big_a(k), a: a(k), b: b(k), c: c(k) },
        }
    }

    /// Prox index `c_k/(b_k+1)` used by the convex step.
    pub fn prox_index(&self, k: usize) -> f64 {
        let v = self.at(k);
        v.c / (v.b + 1.0)
    }

    /// Checks the four conditions that involve index `k` (and `k+1` for the
    /// increment condition).
    pub fn check_at(&self, k: usize) -> std::result::Result<(), Violation> {
        let cur = self.at(k);
        let next = self.at(k + 1);
        let fail = |condition| Err(Violation { k, condition });
        let finite = [cur.big_a, cur.a, cur.b, cur.c, next.big_a].iter().all(|x| x.is_finite());
        if !finite {
            return fail(Condition::Finite);
        }
        if cur.a <= 0.0 || cur.c <= 0.0 || cur.b < 0.0 || cur.big_a < 0.0 {
            return fail(Condition::Sign);
        }
        if k == 0 && (cur.big_a != 0.0 || cur.b != 0.0) {
            return fail(Condition::Initial);
        }
        let scale = |xs: &[f64]| xs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if (cur.big_a - cur.a * cur.b).abs() > VALIDATION_RTOL * scale(&[cur.big_a, cur.a * cur.b]) {
            return fail(Condition::Product);
        }
        if next.big_a - cur.big_a - cur.a > VALIDATION_RTOL * scale(&[next.big_a, cur.a]) {
            return fail(Condition::Increment);
        }
        if cur.a - cur.c > VALIDATION_RTOL * scale(&[cur.a]) {
            return fail(Condition::Dominance);
        }
        Ok(())
    }
}

/// Which schedule condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// A value is NaN or infinite (e.g. overflow of `ρ^k`).
    Finite,
    /// `a_k > 0`, `c_k > 0`, `b_k ≥ 0`, `A_k ≥ 0`.
    Sign,
    /// `A_0 = b_0 = 0`.
    Initial,
    /// `A_k = a_k b_k`.
    Product,
    /// `A_{k+1} − A_k ≤ a_k`.
    Increment,
    /// `c_k ≥ a_k`.
    Dominance,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::Finite => "values finite",
            Condition::Sign => "a > 0, c > 0, b ≥ 0, A ≥ 0",
            Condition::Initial => "A(0) = b(0) = 0",
            Condition::Product => "A(k) = a(k)·b(k)",
            Condition::Increment => "A(k+1) − A(k) ≤ a(k)",
            Condition::Dominance => "c(k) ≥ a(k)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub k: usize,
    pub condition: Condition,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at k={}", self.condition, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub schedule: String,
    pub horizon: usize,
    pub first_violation: Option<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Checks every schedule condition for `k = 0..=horizon` and reports the
/// first failure.
pub fn validate(s: &Schedule, horizon: usize) -> ValidationReport {
    let first_violation = (0..=horizon).find_map(|k| s.check_at(k).err());
    ValidationReport { schedule: s.name.clone(), horizon, first_violation }
}

type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug)]
enum ContinuousKind {
    Polynomial { p: f64 },
    Exponential { lambda: f64 },
}

/// Continuous coefficients `(A_t, a_t, b_t, c_t)` for the high-resolution
/// ODE `Ż = −a_t ∇f(X)`, `Z = b_t Ẋ + c_t ∇f(X) + X`.
#[derive(Clone)]
pub struct ContinuousSchedule {
    name: String,
    kind: ContinuousKind,
    c: TimeFn,
}

impl fmt::Debug for ContinuousSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousSchedule").field("name", &self.name).finish()
    }
}

impl ContinuousSchedule {
    /// `A_t = t^p`, `a_t = p t^{p−1}`, `b_t = t/p`, `c_t = t`.
    pub fn polynomial(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(domain(format!("polynomial schedule needs p ≥ 1, got {p}")));
        }
        Ok(Self { name: format!("polynomial(p={p})"), kind: ContinuousKind::Polynomial { p }, c: Arc::new(|t| t) })
    }

    /// `A_t = e^{λt} − 1`, `a_t = λe^{λt}`, `b_t = (1 − e^{−λt})/λ`, `c_t = t`.
    pub fn exponential(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain(format!("exponential schedule needs lambda > 0, got {lambda}")));
        }
        Ok(Self {
            name: format!("exponential(lambda={lambda})"),
            kind: ContinuousKind::Exponential { lambda },
            c: Arc::new(|t| t),
        })
    }

    /// Replaces the default `c_t = t`. The conditions on `(A, a, b)` do not
    /// involve `c_t`; it only needs `c_0 = 0` and positivity.
    pub fn with_c(mut self, c: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.c = Arc::new(c);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn big_a(&self, t: f64) -> f64 {
        match self.kind {
            ContinuousKind::Polynomial { p } => t.powf(p),
            ContinuousKind::Exponential { lambda } => (lambda * t).exp_m1(),
        }
    }

    pub fn big_a_dot(&self, t: f64) -> f64 {
        match self.kind {
            ContinuousKind::Polynomial { p } => p * t.powf(p - 1.0),
            ContinuousKind::Exponential { lambda } => lambda * (lambda * t).exp(),
        }
    }

    pub fn a(&self, t: f64) -> f64 {
        self.big_a_dot(t)
    }

    pub fn b(&self, t: f64) -> f64 {
        match self.kind {
            ContinuousKind::Polynomial { p } => t / p,
            ContinuousKind::Exponential { lambda } => -(-lambda * t).exp_m1() / lambda,
        }
    }

    pub fn c(&self, t: f64) -> f64 {
        (self.c)(t)
    }

    /// Checks `A(0) = b(0) = c(0) = 0`, `A = ab` and `Ȧ ≤ a` on `n+1` evenly
    /// spaced points of `[0, t_max]`. Returns the first failing time.
    pub fn validate_grid(&self, t_max: f64, n: usize) -> std::result::Result<(), (f64, Condition)> {
        if self.big_a(0.0) != 0.0 || self.b(0.0) != 0.0 || self.c(0.0) != 0.0 {
            return Err((0.0, Condition::Initial));
        }
        for i in 0..=n {
            let t = t_max * i as f64 / n as f64;
            let (big_a, a, b) = (self.big_a(t), self.a(t), self.b(t));
            if (big_a - a * b).abs() > VALIDATION_RTOL * big_a.abs().max(1.0) {
                return Err((t, Condition::Product));
            }
            if self.big_a_dot(t) - a > VALIDATION_RTOL * a.abs().max(1.0) {
                return Err((t, Condition::Increment));
            }
        }
        Ok(())
    }
}
