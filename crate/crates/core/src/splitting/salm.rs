use std::sync::Arc;

use nalgebra::linalg::Cholesky;

use crate::error::{domain, Error, Result};
use crate::operators::{fista_solve, shrink, ZeroOperator, DEFAULT_FISTA_TOL};
use crate::schedules::Schedule;
use crate::solvers::{Check, Monitor, Slot, SolverState, Stepper, TraceRecord, LYAPUNOV_RTOL};
use crate::{all_finite, Matrix, Vector};

/// Augmented-Lagrangian subproblem oracle for `min f(x) s.t. Ax = b`:
/// `argmin_x f(x) − ⟨λ, Ax − b⟩ + ½‖Ax − b‖²_W` with diagonal weights `W`.
pub trait AlmOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn solve(&self, lambda: &Vector, weights: &Vector, warm: Option<&Vector>) -> Result<Vector>;

    fn objective(&self, x: &Vector) -> f64;
}

/// Subproblem oracle for a perturbation function `φ(x, u)`:
/// `argmin_{x,u} φ(x, u) − ⟨λ, u⟩ + ½‖u‖²_W`, returning `(x, u)`.
pub trait PerturbationOracle: Send + Sync {
    fn solve(&self, lambda: &Vector, weights: &Vector, warm: Option<&Vector>) -> Result<(Vector, Vector)>;

    fn phi(&self, x: &Vector, u: &Vector) -> f64;
}

/// `min f(x) s.t. Ax = b` with a diagonal metric `H` (default all ones).
/// Qualification (`ri dom f ∩ {Ax = b} ≠ ∅`) is assumed, not checked.
#[derive(Clone)]
pub struct EqualityConstrainedProblem {
    pub oracle: Arc<dyn AlmOracle>,
    pub a: Matrix,
    pub b: Vector,
    pub h: Vector,
}

impl EqualityConstrainedProblem {
    pub fn new(oracle: Arc<dyn AlmOracle>, a: Matrix, b: Vector) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::Dimension { expected: a.nrows(), got: b.len() });
        }
        if a.ncols() != oracle.dim() {
            return Err(Error::Dimension { expected: oracle.dim(), got: a.ncols() });
        }
        let h = Vector::from_element(b.len(), 1.0);
        Ok(Self { oracle, a, b, h })
    }

    pub fn with_metric(mut self, h: Vector) -> Result<Self> {
        if h.len() != self.b.len() {
            return Err(Error::Dimension { expected: self.b.len(), got: h.len() });
        }
        if h.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(domain("metric weights must be positive"));
        }
        self.h = h;
        Ok(self)
    }

    pub fn residual(&self, x: &Vector) -> Vector {
        &self.a * x - &self.b
    }

    /// `L(x, λ) = f(x) − ⟨λ, Ax − b⟩`.
    pub fn lagrangian(&self, x: &Vector, lambda: &Vector) -> f64 {
        self.oracle.objective(x) - lambda.dot(&self.residual(x))
    }

    /// `‖v‖²_H`.
    pub fn h_norm_sq(&self, v: &Vector) -> f64 {
        v.iter().zip(self.h.iter()).map(|(x, h)| h * x * x).sum()
    }

    /// `‖v‖²_{H⁻¹}`.
    pub fn h_inv_norm_sq(&self, v: &Vector) -> f64 {
        v.iter().zip(self.h.iter()).map(|(x, h)| x * x / h).sum()
    }
}

fn subproblem_error(k: usize, e: Error, lambda: &Vector) -> Error {
    Error::Subproblem { k, reason: format!("{e} (multiplier estimate norm {:.3e})", lambda.norm()) }
}

fn schedule_values(s: &Schedule, k: usize) -> Result<crate::schedules::ScheduleValues> {
    s.check_at(k).map_err(|v| Error::Contract { k, what: format!("schedule {}: {}", s.name(), v.condition) })?;
    Ok(s.at(k))
}

/// Symplectic augmented Lagrangian step. The state's `x` is the multiplier
/// `λ`; the primal iterate is kept in [`Slot::Primal`] and `Ax − b` in
/// [`Slot::Residual`].
///
/// ```text
/// λ̃ = (z + bλ)/(b+1)
/// x = argmin f(x) − ⟨λ̃, Ax − b⟩ + (c/(2(b+1)))‖Ax − b‖²_H
/// λ = λ̃ − (c/(b+1))H(Ax − b)
/// z = z − aH(Ax − b)
/// ```
pub fn salm_step(p: &EqualityConstrainedProblem, s: &Schedule, state: &SolverState) -> Result<SolverState> {
    state.check()?;
    if state.dim() != p.b.len() {
        return Err(Error::Dimension { expected: p.b.len(), got: state.dim() });
    }
    let k = state.k;
    let v = schedule_values(s, k)?;
    let b1 = v.b + 1.0;
    let penalty = v.c / b1;
    let tilde = (&state.z + &state.x * v.b) / b1;
    let x = p
        .oracle
        .solve(&tilde, &(&p.h * penalty), state.aux(Slot::Primal))
        .map_err(|e| subproblem_error(k, e, &tilde))?;
    let r = p.residual(&x);
    let hr = p.h.component_mul(&r);
    let mut next = state.clone();
    next.x = &tilde - &hr * penalty;
    next.z = &state.z - &hr * v.a;
    next.aux.insert(Slot::Primal, x);
    next.aux.insert(Slot::Residual, r);
    next.aux.insert(Slot::Tilde, tilde);
    next.k += 1;
    Ok(next)
}

/// The same iteration for a general perturbation function. `h` is the
/// diagonal metric on the perturbation variable `u`, which is stored in
/// [`Slot::Residual`].
pub fn salm_generic_step(
    oracle: &dyn PerturbationOracle,
    h: &Vector,
    s: &Schedule,
    state: &SolverState,
) -> Result<SolverState> {
    state.check()?;
    if h.len() != state.dim() {
        return Err(Error::Dimension { expected: state.dim(), got: h.len() });
    }
    let k = state.k;
    let v = schedule_values(s, k)?;
    let b1 = v.b + 1.0;
    let penalty = v.c / b1;
    let tilde = (&state.z + &state.x * v.b) / b1;
    let (x, u) =
        oracle.solve(&tilde, &(h * penalty), state.aux(Slot::Primal)).map_err(|e| subproblem_error(k, e, &tilde))?;
    let mut next = state.clone();
    next.x = &tilde - h.component_mul(&u) * penalty;
    next.z = &state.z + (&next.x - &tilde) * (v.a / v.c * b1);
    next.aux.insert(Slot::Primal, x);
    next.aux.insert(Slot::Residual, u);
    next.aux.insert(Slot::Tilde, tilde);
    next.k += 1;
    Ok(next)
}

/// Views an equality-constrained problem as the perturbation
/// `φ(x, u) = f(x) + I(Ax − b = u)`.
pub struct EqualityPerturbation(pub EqualityConstrainedProblem);

impl PerturbationOracle for EqualityPerturbation {
    fn solve(&self, lambda: &Vector, weights: &Vector, warm: Option<&Vector>) -> Result<(Vector, Vector)> {
        let x = self.0.oracle.solve(lambda, weights, warm)?;
        let u = self.0.residual(&x);
        Ok((x, u))
    }

    fn phi(&self, x: &Vector, u: &Vector) -> f64 {
        if (self.0.residual(x) - u).amax() <= 1e-12 {
            self.0.oracle.objective(x)
        } else {
            f64::INFINITY
        }
    }
}

/// `f(x) = ½xᵀQx + qᵀx` with `Q ⪰ 0`; the subproblem is the linear system
/// `(Q + AᵀWA)x = Aᵀ(λ + Wb) − q`.
pub struct QuadraticObjective {
    pub q_mat: Matrix,
    pub q: Vector,
    pub a: Matrix,
    pub b: Vector,
}

impl AlmOracle for QuadraticObjective {
    fn dim(&self) -> usize {
        self.q.len()
    }

    fn solve(&self, lambda: &Vector, weights: &Vector, _warm: Option<&Vector>) -> Result<Vector> {
        let at = self.a.transpose();
        let m = &self.q_mat + &at * Matrix::from_diagonal(weights) * &self.a;
        let rhs = &at * (lambda + weights.component_mul(&self.b)) - &self.q;
        let chol = Cholesky::new(m).ok_or_else(|| domain("ALM normal matrix is not positive definite"))?;
        Ok(chol.solve(&rhs))
    }

    fn objective(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.q_mat * x)) + self.q.dot(x)
    }
}

/// Split form of `½Σd_i(x_i − a_i)² + μ‖x‖₁`: variables `(x, y)` stacked,
/// constraint `x − y = 0`, `f(x) = ½Σd_i(x_i − a_i)²`, `g(y) = μ‖y‖₁`.
///
/// The subproblem decouples per coordinate. Eliminating `x` leaves a 1-D
/// ℓ₁ problem with curvature `s = dκ/(d+κ)`, so with `κ = w_i`:
/// `y = soft(a − λ/κ, μ/s)` and `x = (da + λ + κy)/(d + κ)`.
pub struct QuadraticL1Split {
    pub d: Vector,
    pub a: Vector,
    pub mu: f64,
}

impl QuadraticL1Split {
    /// Constraint matrix `[I, −I]`.
    pub fn constraint(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            m[(i, i)] = 1.0;
            m[(i, n + i)] = -1.0;
        }
        m
    }

    /// KKT multiplier `λ* = ∇f(x*) = d∘(x* − a)`.
    pub fn multiplier(&self, xstar: &Vector) -> Vector {
        self.d.component_mul(&(xstar - &self.a))
    }
}

impl AlmOracle for QuadraticL1Split {
    fn dim(&self) -> usize {
        2 * self.d.len()
    }

    fn solve(&self, lambda: &Vector, weights: &Vector, _warm: Option<&Vector>) -> Result<Vector> {
        let n = self.d.len();
        let mut out = Vector::zeros(2 * n);
        for i in 0..n {
            let (d, a, l, kappa) = (self.d[i], self.a[i], lambda[i], weights[i]);
            let s = d * kappa / (d + kappa);
            let y = shrink(a - l / kappa, self.mu / s);
            out[i] = (d * a + l + kappa * y) / (d + kappa);
            out[n + i] = y;
        }
        Ok(out)
    }

    fn objective(&self, x: &Vector) -> f64 {
        let n = self.d.len();
        let quad: f64 = (0..n).map(|i| 0.5 * self.d[i] * (x[i] - self.a[i]).powi(2)).sum();
        quad + self.mu * x.rows(n, n).lp_norm(1)
    }
}

/// LASSO split `½‖Ax − b‖² + μ‖y‖₁, x − y = 0`.
///
/// Minimising the subproblem over `y` gives `y(x) = soft(x − λ/w, μ/w)`, so
/// the reduced problem in `x` is smooth with gradient
/// `Aᵀ(Ax − b) − λ + W(x − y(x))` and Lipschitz constant `‖A‖² + max w`. It is
/// solved by accelerated gradient descent (FISTA with a zero prox).
pub struct LassoSplit {
    a: Matrix,
    b: Vector,
    ata: Matrix,
    atb: Vector,
    norm_sq: f64,
    pub mu: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl LassoSplit {
    pub fn new(a: Matrix, b: Vector, mu: f64) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::Dimension { expected: a.nrows(), got: b.len() });
        }
        let ata = a.transpose() * &a;
        let atb = a.transpose() * &b;
        let norm_sq = crate::problems::spectral_norm(&a).powi(2);
        Ok(Self { a, b, ata, atb, norm_sq, mu, tol: DEFAULT_FISTA_TOL, max_iter: 20_000 })
    }

    fn n(&self) -> usize {
        self.a.ncols()
    }

    fn y_of(&self, x: &Vector, lambda: &Vector, w: &Vector) -> Vector {
        Vector::from_fn(x.len(), |i, _| shrink(x[i] - lambda[i] / w[i], self.mu / w[i]))
    }

    fn solve_x(&self, lambda: &Vector, w: &Vector, warm: Option<&Vector>) -> Result<Vector> {
        let n = self.n();
        if lambda.len() != n || w.len() != n {
            return Err(Error::Dimension { expected: n, got: lambda.len().min(w.len()) });
        }
        let grad = |x: &Vector| {
            let y = self.y_of(x, lambda, w);
            &self.ata * x - &self.atb - lambda + w.component_mul(&(x - y))
        };
        let x0 = match warm {
            Some(v) if v.len() >= n => v.rows(0, n).into_owned(),
            _ => Vector::zeros(n),
        };
        let out = fista_solve(&grad, self.norm_sq + w.max(), &ZeroOperator::new(n), &x0, self.max_iter, self.tol)?;
        if !out.converged || !all_finite(&out.x) {
            return Err(domain(format!(
                "FISTA stopped after {} iterations with step {:.3e}",
                out.iterations, out.last_step
            )));
        }
        Ok(out.x)
    }

    pub fn value(&self, x: &Vector) -> f64 {
        0.5 * (&self.a * x - &self.b).norm_squared() + self.mu * x.lp_norm(1)
    }
}

impl AlmOracle for LassoSplit {
    fn dim(&self) -> usize {
        2 * self.n()
    }

    fn solve(&self, lambda: &Vector, weights: &Vector, warm: Option<&Vector>) -> Result<Vector> {
        let n = self.n();
        let x = self.solve_x(lambda, weights, warm)?;
        let y = self.y_of(&x, lambda, weights);
        let mut out = Vector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&x);
        out.rows_mut(n, n).copy_from(&y);
        Ok(out)
    }

    fn objective(&self, xy: &Vector) -> f64 {
        let n = self.n();
        let x = xy.rows(0, n);
        0.5 * (&self.a * x - &self.b).norm_squared() + self.mu * xy.rows(n, n).lp_norm(1)
    }
}

/// The LASSO perturbation `φ(x, u) = ½‖Ax − b‖² + μ‖x − u‖₁`; `u = x − y` in
/// the split form.
impl PerturbationOracle for LassoSplit {
    fn solve(&self, lambda: &Vector, weights: &Vector, warm: Option<&Vector>) -> Result<(Vector, Vector)> {
        let x = self.solve_x(lambda, weights, warm)?;
        let y = self.y_of(&x, lambda, weights);
        let u = &x - y;
        Ok((x, u))
    }

    fn phi(&self, x: &Vector, u: &Vector) -> f64 {
        0.5 * (&self.a * x - &self.b).norm_squared() + self.mu * (x - u).lp_norm(1)
    }
}

/// Symplectic ALM as a [`Stepper`].
pub struct SalmStepper {
    pub problem: EqualityConstrainedProblem,
    pub schedule: Schedule,
}

impl Stepper for SalmStepper {
    fn name(&self) -> &str {
        "salm"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        salm_step(&self.problem, &self.schedule, state)
    }
}

/// Classical ALM: `x = argmin f − ⟨λ, Ax − b⟩ + (ρ/2)‖Ax − b‖²_H`,
/// `λ ← λ − ρH(Ax − b)`.
pub fn alm_step(p: &EqualityConstrainedProblem, rho: f64, state: &SolverState) -> Result<SolverState> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(domain(format!("rho must be positive, got {rho}")));
    }
    let x = p
        .oracle
        .solve(&state.x, &(&p.h * rho), state.aux(Slot::Primal))
        .map_err(|e| subproblem_error(state.k, e, &state.x))?;
    let r = p.residual(&x);
    let mut next = state.clone();
    next.x = &state.x - p.h.component_mul(&r) * rho;
    next.z = next.x.clone();
    next.aux.insert(Slot::Primal, x);
    next.aux.insert(Slot::Residual, r);
    next.k += 1;
    Ok(next)
}

/// Monitor for the symplectic ALM:
/// `E = A_k[L* − L(x_k, λ_k)] + ½‖z_k − λ*‖²_{H⁻¹}` must not increase (up to the
/// relative tolerance plus a rounding allowance `8εA_k max(1, |L*|)`),
/// `L* − L(x_k, λ_k) ≤ d₀/(2A_k)` and
/// `min_j ‖Ax_{j+1} − b‖²_H ≤ d₀/Σa_j²` with `d₀ = ‖λ₀ − λ*‖²_{H⁻¹}`.
pub struct AlmMonitor {
    problem: EqualityConstrainedProblem,
    schedule: Schedule,
    lstar: f64,
    lambda_star: Vector,
    pub rate_atol: f64,
    d0: f64,
    sum_a2: f64,
    min_res: f64,
    prev_e: f64,
}

impl AlmMonitor {
    /// `fstar = f(x*)` equals `L*` because `x*` is feasible.
    pub fn new(problem: EqualityConstrainedProblem, schedule: Schedule, fstar: f64, lambda_star: Vector) -> Self {
        Self {
            problem,
            schedule,
            lstar: fstar,
            lambda_star,
            rate_atol: 1e-8,
            d0: 0.0,
            sum_a2: 0.0,
            min_res: f64::INFINITY,
            prev_e: 0.0,
        }
    }
}

impl Monitor for AlmMonitor {
    fn name(&self) -> &'static str {
        "salm"
    }

    fn anchor(&mut self, state: &SolverState) {
        self.d0 = self.problem.h_inv_norm_sq(&(&state.x - &self.lambda_star));
        self.sum_a2 = 0.0;
        self.min_res = f64::INFINITY;
        self.prev_e = 0.5 * self.problem.h_inv_norm_sq(&(&state.z - &self.lambda_star));
    }

    fn observe(
        &mut self,
        prev: &SolverState,
        next: &SolverState,
        rec: &mut TraceRecord,
        checks: &mut Vec<Check>,
    ) -> Result<()> {
        let x = next.require(Slot::Primal)?;
        let lag_gap = self.lstar - self.problem.lagrangian(x, &next.x);
        rec.objective_gap = Some(self.problem.oracle.objective(x) - self.lstar);
        let big_a = self.schedule.at(next.k).big_a;
        let bound = self.d0 / (2.0 * big_a);
        rec.extra.insert("lagrangian_gap", lag_gap);
        rec.extra.insert("rate_bound", bound);
        checks.push(Check::armed("rate", bound - lag_gap + self.rate_atol));

        let a = self.schedule.at(prev.k).a;
        self.sum_a2 += a * a;
        let res = self.problem.h_norm_sq(next.require(Slot::Residual)?);
        self.min_res = self.min_res.min(res);
        checks.push(Check::armed("residual", self.d0 / self.sum_a2 - self.min_res + self.rate_atol));

        if lag_gap < -crate::solvers::NEGATIVE_GAP_TOL {
            return Err(domain(format!("Lagrangian gap {lag_gap:e} is negative: bad reference multiplier")));
        }
        let e = big_a * lag_gap + 0.5 * self.problem.h_inv_norm_sq(&(&next.z - &self.lambda_star));
        rec.lyapunov = Some(e);
        // `A_k·L` is evaluated in floating point: once the gap has converged
        // it sits at ±ε|L*|, which `A_k` amplifies past any relative tolerance.
        let rounding = 8.0 * f64::EPSILON * big_a * self.lstar.abs().max(1.0);
        checks.push(Check::armed("lyapunov", self.prev_e + LYAPUNOV_RTOL * self.prev_e.abs().max(1.0) + rounding - e));
        self.prev_e = e;
        Ok(())
    }
}
