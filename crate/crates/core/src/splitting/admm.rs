use std::sync::Arc;

use nalgebra::linalg::Cholesky;

use crate::error::{domain, Error, Result};
use crate::operators::ProxMap;
use crate::solvers::{MonotoneParams, Slot, SolverState, Stepper};
use crate::{Matrix, Vector};

/// A constraint block `M` in `Ax + By = c`.
#[derive(Debug, Clone)]
pub enum Block {
    Identity(usize),
    NegIdentity(usize),
    Dense(Matrix),
}

impl Block {
    pub fn rows(&self) -> usize {
        match self {
            Block::Identity(n) | Block::NegIdentity(n) => *n,
            Block::Dense(m) => m.nrows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Block::Identity(n) | Block::NegIdentity(n) => *n,
            Block::Dense(m) => m.ncols(),
        }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        match self {
            Block::Identity(_) => x.clone(),
            Block::NegIdentity(_) => -x,
            Block::Dense(m) => m * x,
        }
    }
}

/// Block subproblem oracle: `argmin_x f(x) + (ρ/2)‖Mx − w‖²` where `M` is
/// the block's constraint matrix.
pub trait AdmmOracle: Send + Sync {
    fn solve(&self, w: &Vector, rho: f64) -> Result<Vector>;

    fn value(&self, x: &Vector) -> f64;
}

type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;

/// Oracle for a block `M = ±I` from a prox map:
/// `argmin f(x) + (ρ/2)‖±x − w‖² = prox_{f/ρ}(±w)`.
pub struct ProxBlock {
    pub prox: Arc<dyn ProxMap>,
    pub negated: bool,
    pub value: ValueFn,
}

impl AdmmOracle for ProxBlock {
    fn solve(&self, w: &Vector, rho: f64) -> Result<Vector> {
        if self.negated {
            self.prox.eval(1.0 / rho, &(-w))
        } else {
            self.prox.eval(1.0 / rho, w)
        }
    }

    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }
}

/// `min f(x) + g(y) s.t. Ax + By = c` with penalty `ρ`.
#[derive(Clone)]
pub struct AdmmProblem {
    pub f: Arc<dyn AdmmOracle>,
    pub g: Arc<dyn AdmmOracle>,
    pub a: Block,
    pub b: Block,
    pub c: Vector,
    pub rho: f64,
}

impl AdmmProblem {
    pub fn new(
        f: Arc<dyn AdmmOracle>,
        g: Arc<dyn AdmmOracle>,
        a: Block,
        b: Block,
        c: Vector,
        rho: f64,
    ) -> Result<Self> {
        if a.rows() != c.len() {
            return Err(Error::Dimension { expected: c.len(), got: a.rows() });
        }
        if b.rows() != c.len() {
            return Err(Error::Dimension { expected: c.len(), got: b.rows() });
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(domain(format!("rho must be positive, got {rho}")));
        }
        Ok(Self { f, g, a, b, c, rho })
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(domain(format!("rho must be positive, got {rho}")));
        }
        self.rho = rho;
        Ok(self)
    }

    pub fn residual(&self, x: &Vector, y: &Vector) -> Vector {
        self.a.apply(x) + self.b.apply(y) - &self.c
    }

    pub fn objective(&self, x: &Vector, y: &Vector) -> f64 {
        self.f.value(x) + self.g.value(y)
    }

    /// Fixed point `u* = λ* + ρBy*` of the symplectic ADMM's operator for a
    /// KKT pair `(y*, λ*)`.
    pub fn dual_point(&self, lambda: &Vector, y: &Vector) -> Vector {
        lambda + self.b.apply(y) * self.rho
    }

    fn check_state(&self, state: &SolverState) -> Result<()> {
        state.check()?;
        if state.dim() != self.c.len() {
            return Err(Error::Dimension { expected: self.c.len(), got: state.dim() });
        }
        Ok(())
    }
}

fn sub_err(k: usize, block: &str, e: Error) -> Error {
    Error::Subproblem { k, reason: format!("{block}-update: {e}") }
}

/// Symplectic ADMM. The state's `x` is the PPA variable `u`; the primal
/// blocks go to [`Slot::Primal`] and [`Slot::Partner`], and
/// `ũ − u = −ρ(Ax + By − c)` to [`Slot::Residual`].
///
/// ```text
/// ũ = (r/(k+r))z + (k/(k+r))u
/// x = argmin f(x) + ⟨ũ, Ax − c⟩ + (ρ/2)‖Ax − c‖²
/// y = argmin g(y) + ⟨ũ, By⟩ + (ρ/2)‖2(Ax − c) + By‖²
/// u = ũ + ρ(Ax + By − c)
/// z = z + (C/r)ρ(Ax + By − c)
/// ```
pub fn sadmm_step(p: &AdmmProblem, mp: &MonotoneParams, state: &SolverState) -> Result<SolverState> {
    p.check_state(state)?;
    let k = state.k;
    let w = mp.anchor_weight(k);
    let tilde = &state.z * w + &state.x * (1.0 - w);
    let scaled = &tilde / p.rho;
    let x = p.f.solve(&(&p.c - &scaled), p.rho).map_err(|e| sub_err(k, "x", e))?;
    let ax_c = p.a.apply(&x) - &p.c;
    let y = p.g.solve(&(&ax_c * -2.0 - &scaled), p.rho).map_err(|e| sub_err(k, "y", e))?;
    let r = &ax_c + p.b.apply(&y);
    let mut next = state.clone();
    next.x = &tilde + &r * p.rho;
    next.z = &state.z + &r * (mp.c / mp.r * p.rho);
    next.aux.insert(Slot::Residual, &r * -p.rho);
    next.aux.insert(Slot::Tilde, tilde);
    next.aux.insert(Slot::Primal, x);
    next.aux.insert(Slot::Partner, y);
    next.k += 1;
    Ok(next)
}

/// Reordered symplectic ADMM on `(λ, z)`. Needs `y_k` in [`Slot::Partner`]
/// (zeros when absent).
///
/// ```text
/// x = argmin f(x) + ⟨λ, Ax + By_k − c⟩ + (ρ/2)‖Ax + By_k − c‖²
/// z = z + (Cρ/r)(Ax + By_k − c)
/// λ̃ = (r/(k+r))z + (k/(k+r))λ
/// y = argmin g(y) + ⟨λ̃, Ax + By − c⟩ + (ρ/2)‖θ(Ax − c) + By‖²,  θ = k/(k+r)
/// λ = λ̃ + θρ(Ax − c) + ρBy
/// ```
///
/// The stored residual is `Ax_{k+1} + By_{k+1} − c`.
pub fn sadmm_step_v2(p: &AdmmProblem, mp: &MonotoneParams, state: &SolverState) -> Result<SolverState> {
    p.check_state(state)?;
    let k = state.k;
    let y_prev = match state.aux(Slot::Partner) {
        Some(y) => y.clone(),
        None => Vector::zeros(p.b.cols()),
    };
    let by_prev = p.b.apply(&y_prev);
    let x = p.f.solve(&(&p.c - &by_prev - &state.x / p.rho), p.rho).map_err(|e| sub_err(k, "x", e))?;
    let ax_c = p.a.apply(&x) - &p.c;
    let z = &state.z + (&ax_c + &by_prev) * (mp.c * p.rho / mp.r);
    let w = mp.anchor_weight(k);
    let theta = 1.0 - w;
    let tilde = &z * w + &state.x * theta;
    let y = p.g.solve(&(&ax_c * -theta - &tilde / p.rho), p.rho).map_err(|e| sub_err(k, "y", e))?;
    let by = p.b.apply(&y);
    let mut next = state.clone();
    next.x = &tilde + &ax_c * (theta * p.rho) + &by * p.rho;
    next.z = z;
    next.aux.insert(Slot::Residual, &ax_c + &by);
    next.aux.insert(Slot::Tilde, tilde);
    next.aux.insert(Slot::Primal, x);
    next.aux.insert(Slot::Partner, y);
    next.k += 1;
    Ok(next)
}

/// Classical ADMM on `(λ, y)`: `x`-update against `(y_k, λ_k)`, `y`-update
/// against `(x_{k+1}, λ_k)`, then `λ += ρ(Ax + By − c)`. The stored residual
/// is `Ax + By − c`.
pub fn admm_step(p: &AdmmProblem, state: &SolverState) -> Result<SolverState> {
    p.check_state(state)?;
    let k = state.k;
    let y_prev = match state.aux(Slot::Partner) {
        Some(y) => y.clone(),
        None => Vector::zeros(p.b.cols()),
    };
    let scaled = &state.x / p.rho;
    let x = p.f.solve(&(&p.c - p.b.apply(&y_prev) - &scaled), p.rho).map_err(|e| sub_err(k, "x", e))?;
    let ax = p.a.apply(&x);
    let y = p.g.solve(&(&p.c - &ax - &scaled), p.rho).map_err(|e| sub_err(k, "y", e))?;
    let r = ax + p.b.apply(&y) - &p.c;
    let mut next = state.clone();
    next.x = &state.x + &r * p.rho;
    next.z = next.x.clone();
    next.aux.insert(Slot::Residual, r);
    next.aux.insert(Slot::Primal, x);
    next.aux.insert(Slot::Partner, y);
    next.k += 1;
    Ok(next)
}

/// Residual `‖Ax + By − c‖²` of an ADMM-type state.
pub fn constraint_residual_sq(p: &AdmmProblem, state: &SolverState) -> Option<f64> {
    Some(p.residual(state.aux(Slot::Primal)?, state.aux(Slot::Partner)?).norm_squared())
}

pub struct SadmmStepper {
    pub problem: AdmmProblem,
    pub params: MonotoneParams,
}

impl Stepper for SadmmStepper {
    fn name(&self) -> &str {
        "sadmm"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        sadmm_step(&self.problem, &self.params, state)
    }

    fn residual_sq(&self, _prev: &SolverState, next: &SolverState) -> f64 {
        next.aux(Slot::Residual).map_or(f64::NAN, |g| g.norm_squared() / (self.problem.rho * self.problem.rho))
    }
}

pub struct SadmmV2Stepper {
    pub problem: AdmmProblem,
    pub params: MonotoneParams,
}

impl Stepper for SadmmV2Stepper {
    fn name(&self) -> &str {
        "sadmm-v2"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        sadmm_step_v2(&self.problem, &self.params, state)
    }
}

pub struct AdmmStepper {
    pub problem: AdmmProblem,
}

impl Stepper for AdmmStepper {
    fn name(&self) -> &str {
        "admm"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        admm_step(&self.problem, state)
    }

    fn restart(&self, state: &mut SolverState) {
        state.k = 0;
    }
}

/// `argmin f(x¹,x²,x³) + (ρ/2)‖x − w‖²` for
/// `f = ½‖Ax¹ − b‖² + μ₁‖x²‖₁ + μ₂‖x³‖₁` with blocks of lengths `n, n, n−1`.
pub struct FusedF {
    pub least_squares: crate::operators::LeastSquares,
    pub n: usize,
    pub mu1: f64,
    pub mu2: f64,
}

impl AdmmOracle for FusedF {
    fn solve(&self, w: &Vector, rho: f64) -> Result<Vector> {
        let n = self.n;
        if w.len() != 3 * n - 1 {
            return Err(Error::Dimension { expected: 3 * n - 1, got: w.len() });
        }
        let x1 = self.least_squares.eval(1.0 / rho, &w.rows(0, n).into_owned())?;
        let mut out = Vector::zeros(3 * n - 1);
        out.rows_mut(0, n).copy_from(&x1);
        for i in n..2 * n {
            out[i] = crate::operators::shrink(w[i], self.mu1 / rho);
        }
        for i in 2 * n..3 * n - 1 {
            out[i] = crate::operators::shrink(w[i], self.mu2 / rho);
        }
        Ok(out)
    }

    fn value(&self, x: &Vector) -> f64 {
        let n = self.n;
        self.least_squares.value(&x.rows(0, n).into_owned())
            + self.mu1 * x.rows(n, n).lp_norm(1)
            + self.mu2 * x.rows(2 * n, n - 1).lp_norm(1)
    }
}

/// `argmin (ρ/2)‖−My − w‖²` with `M = [I; I; D]`, i.e. the solution of
/// `(2I + DᵀD)y = −(w¹ + w² + Dᵀw³)`; `g = 0`.
pub struct FusedG {
    d: Matrix,
    chol: Cholesky<f64, nalgebra::Dyn>,
}

impl FusedG {
    pub fn new(d: Matrix) -> Result<Self> {
        let n = d.ncols();
        let normal = Matrix::identity(n, n) * 2.0 + d.transpose() * &d;
        let chol = Cholesky::new(normal).ok_or_else(|| domain("2I + DᵀD is not positive definite"))?;
        Ok(Self { d, chol })
    }

    /// The stacked block `−[I; I; D]`.
    pub fn block(&self) -> Block {
        let n = self.d.ncols();
        let mut m = Matrix::zeros(3 * n - 1, n);
        for i in 0..n {
            m[(i, i)] = -1.0;
            m[(n + i, i)] = -1.0;
        }
        m.view_mut((2 * n, 0), (n - 1, n)).copy_from(&(-&self.d));
        Block::Dense(m)
    }
}

impl AdmmOracle for FusedG {
    fn solve(&self, w: &Vector, _rho: f64) -> Result<Vector> {
        let n = self.d.ncols();
        if w.len() != 3 * n - 1 {
            return Err(Error::Dimension { expected: 3 * n - 1, got: w.len() });
        }
        let rhs = w.rows(0, n) + w.rows(n, n) + self.d.transpose() * w.rows(2 * n, n - 1);
        Ok(-self.chol.solve(&rhs))
    }

    fn value(&self, _y: &Vector) -> f64 {
        0.0
    }
}
