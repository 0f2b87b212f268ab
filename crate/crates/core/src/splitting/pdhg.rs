use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::operators::ProxMap;
use crate::solvers::{MonotoneParams, ParamMode, Slot, SolverState, Stepper};
use crate::{Matrix, Vector};

/// Saddle problem `min_x max_y f(x) + ⟨x, Ay⟩ − g(y)` with primal step `μ₁`
/// and dual step `μ₂`. The state variable is `u = (x, y)` stacked.
#[derive(Clone)]
pub struct SaddleProblem {
    pub prox_f: Arc<dyn ProxMap>,
    pub prox_g: Arc<dyn ProxMap>,
    pub a: Matrix,
    pub mu1: f64,
    pub mu2: f64,
    pub norm_a: f64,
}

impl SaddleProblem {
    /// `norm_a` is the spectral norm of `a`, taken as given so callers can
    /// reuse a stored value.
    pub fn new(
        prox_f: Arc<dyn ProxMap>,
        prox_g: Arc<dyn ProxMap>,
        a: Matrix,
        mu1: f64,
        mu2: f64,
        norm_a: f64,
    ) -> Result<Self> {
        if prox_f.dim() != a.nrows() {
            return Err(Error::Dimension { expected: a.nrows(), got: prox_f.dim() });
        }
        if prox_g.dim() != a.ncols() {
            return Err(Error::Dimension { expected: a.ncols(), got: prox_g.dim() });
        }
        for (name, v) in [("mu1", mu1), ("mu2", mu2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(norm_a >= 0.0 && norm_a.is_finite()) {
            return Err(domain(format!("invalid operator norm {norm_a}")));
        }
        Ok(Self { prox_f, prox_g, a, mu1, mu2, norm_a })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows() + self.a.ncols()
    }

    pub fn split(&self, u: &Vector) -> (Vector, Vector) {
        let m = self.a.nrows();
        (u.rows(0, m).into_owned(), u.rows(m, self.a.ncols()).into_owned())
    }

    pub fn join(&self, x: &Vector, y: &Vector) -> Vector {
        let mut u = Vector::zeros(self.dim());
        u.rows_mut(0, x.len()).copy_from(x);
        u.rows_mut(x.len(), y.len()).copy_from(y);
        u
    }

    /// Step condition `μ₁μ₂‖A‖² < 1` required for the rate guarantee.
    pub fn check_guarantee(&self) -> Result<()> {
        let v = self.mu1 * self.mu2 * self.norm_a * self.norm_a;
        if v < 1.0 {
            Ok(())
        } else {
            Err(domain(format!("mu1*mu2*|A|^2 = {v} must be below 1")))
        }
    }

    fn check_state(&self, state: &SolverState) -> Result<()> {
        state.check()?;
        if state.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: state.dim() });
        }
        Ok(())
    }

    /// One primal-dual sweep from `(x, y)`:
    /// `x⁺ = prox_{μ₁f}(x − μ₁Ay)`, `y⁺ = prox_{μ₂g}(y + μ₂Aᵀ(2x⁺ − x))`.
    fn sweep(&self, u: &Vector) -> Result<Vector> {
        let (x, y) = self.split(u);
        let x_next = self.prox_f.eval(self.mu1, &(&x - &self.a * &y * self.mu1))?;
        let bar = &x_next * 2.0 - &x;
        let y_next = self.prox_g.eval(self.mu2, &(&y + self.a.transpose() * bar * self.mu2))?;
        Ok(self.join(&x_next, &y_next))
    }
}

/// Symplectic PDHG. The extrapolated point in the dual update is
/// `2x_{k+1} − x̃_{k+1}`, so `u ↦ sweep(ũ)` is exactly the classical
/// primal-dual map and the step is the monotone symplectic step on it.
///
/// ```text
/// ũ = (r/(k+r))z + (k/(k+r))u
/// x = prox_{μ₁f}(x̃ − μ₁Aỹ)
/// y = prox_{μ₂g}(ỹ + μ₂Aᵀ(2x − x̃))
/// z = z + (C/r)(u − ũ)
/// ```
///
/// In guarantee mode the step condition is enforced.
pub fn spdhg_step(p: &SaddleProblem, mp: &MonotoneParams, state: &SolverState) -> Result<SolverState> {
    if mp.mode == ParamMode::Guarantee {
        p.check_guarantee()?;
    }
    p.check_state(state)?;
    let w = mp.anchor_weight(state.k);
    let tilde = &state.z * w + &state.x * (1.0 - w);
    let u = p.sweep(&tilde)?;
    let mut next = state.clone();
    next.z = &state.z + (&u - &tilde) * (mp.c / mp.r);
    next.aux.insert(Slot::Residual, &tilde - &u);
    next.aux.insert(Slot::Tilde, tilde);
    next.x = u;
    next.k += 1;
    Ok(next)
}

/// Classical PDHG (Chambolle-Pock) with extrapolation `2x_{k+1} − x_k`.
pub fn pdhg_step(p: &SaddleProblem, state: &SolverState) -> Result<SolverState> {
    p.check_state(state)?;
    let u = p.sweep(&state.x)?;
    let mut next = state.clone();
    next.aux.insert(Slot::Residual, &state.x - &u);
    next.x = u;
    next.z = next.x.clone();
    next.k += 1;
    Ok(next)
}

pub struct SpdhgStepper {
    pub problem: SaddleProblem,
    pub params: MonotoneParams,
}

impl Stepper for SpdhgStepper {
    fn name(&self) -> &str {
        "spdhg"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        spdhg_step(&self.problem, &self.params, state)
    }
}

pub struct PdhgStepper {
    pub problem: SaddleProblem,
}

impl Stepper for PdhgStepper {
    fn name(&self) -> &str {
        "pdhg"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        pdhg_step(&self.problem, state)
    }

    fn restart(&self, state: &mut SolverState) {
        state.k = 0;
    }
}
