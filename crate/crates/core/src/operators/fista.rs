use super::{check_vector, ProxMap};
use crate::error::{domain, Result};
use crate::Vector;

pub const DEFAULT_FISTA_TOL: f64 = 1e-10;
pub const DEFAULT_FISTA_MAX_ITER: usize = 5000;

/// Result of [`fista_solve`]. When the iteration budget runs out before the
/// step tolerance is met, `converged` is false and `x` is the last iterate.
#[derive(Debug, Clone)]
pub struct FistaOutcome {
    pub x: Vector,
    pub iterations: usize,
    pub converged: bool,
    pub last_step: f64,
}

/// Accelerated proximal gradient for `min s(x) + g(x)` where `∇s` is
/// `lipschitz`-Lipschitz and `prox` evaluates `prox_{t g}`.
///
/// Uses the gradient-based adaptive restart of O'Donoghue and Candès: momentum
/// is dropped whenever `⟨y − x⁺, x⁺ − x⟩ > 0`. Stops once
/// `‖x_{j+1} − x_j‖ ≤ tol`.
pub fn fista_solve(
    grad: &dyn Fn(&Vector) -> Vector,
    lipschitz: f64,
    prox: &dyn ProxMap,
    x0: &Vector,
    max_iter: usize,
    tol: f64,
) -> Result<FistaOutcome> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(domain(format!("Lipschitz constant must be positive, got {lipschitz}")));
    }
    if !(tol >= 0.0) {
        return Err(domain("tolerance must be nonnegative"));
    }
    check_vector(prox.dim(), x0)?;
    let step = 1.0 / lipschitz;
    let mut x = x0.clone();
    let mut y = x0.clone();
    let mut theta = 1.0f64;
    let mut last_step = f64::INFINITY;
    for j in 0..max_iter {
        let g = grad(&y);
        let x_next = prox.eval(step, &(&y - g * step))?;
        let dx = &x_next - &x;
        last_step = dx.norm();
        if last_step <= tol {
            return Ok(FistaOutcome { x: x_next, iterations: j + 1, converged: true, last_step });
        }
        if (&y - &x_next).dot(&dx) > 0.0 {
            theta = 1.0;
            y = x_next.clone();
        } else {
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            y = &x_next + dx * ((theta - 1.0) / theta_next);
            theta = theta_next;
        }
        x = x_next;
    }
    Ok(FistaOutcome { x, iterations: max_iter, converged: false, last_step })
}
