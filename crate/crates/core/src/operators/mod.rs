//! Proximal maps and resolvents.
//!
//! Every solver in the crate consumes a [`ProxMap`]: an oracle evaluating
//! `J_{tA}(v) = (I + tA)^{-1}(v)` for a maximally monotone `A`, which is
//! `prox_{tf}(v)` when `A = ∂f`.

mod fista;
mod maps;

pub use fista::{fista_solve, FistaOutcome, DEFAULT_FISTA_MAX_ITER, DEFAULT_FISTA_TOL};
pub use maps::{
    AffineSet, DouglasRachford, L1Norm, LeastSquares, LinearOperator, ScaledIdentity, SeparableQuadraticL1, Simplex,
    Yosida, ZeroOperator,
};

use crate::error::{domain, Error, Result};
use crate::{all_finite, Matrix, Vector};

/// Resolvent oracle `(t, v) ↦ J_{tA}(v)`.
///
/// Implementations must be deterministic and firmly nonexpansive for every
/// fixed `t`. They are shared across threads, so any internal cache has to be
/// populate-once.
pub trait ProxMap: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, t: f64, v: &Vector) -> Result<Vector>;

    /// Short label for diagnostics.
    fn label(&self) -> &str {
        "prox"
    }
}

/// Validates a step and an input point against a map's dimension.
pub(crate) fn check_input(dim: usize, t: f64, v: &Vector) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain(format!("step must be positive and finite, got {t}")));
    }
    check_vector(dim, v)
}

pub(crate) fn check_vector(dim: usize, v: &Vector) -> Result<()> {
    if v.len() != dim {
        return Err(Error::Dimension { expected: dim, got: v.len() });
    }
    if !all_finite(v) {
        return Err(domain("non-finite entry in input vector"));
    }
    Ok(())
}

pub(crate) fn check_output(v: Vector) -> Result<Vector> {
    if all_finite(&v) {
        Ok(v)
    } else {
        Err(domain("oracle produced a non-finite entry"))
    }
}

/// Scalar soft threshold `sign(x)·max(|x| − tau, 0)`.
#[inline]
pub fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Entrywise soft threshold, the prox of `tau·‖·‖₁`.
pub fn soft_threshold(v: &Vector, tau: f64) -> Result<Vector> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(domain(format!("threshold must be positive, got {tau}")));
    }
    if !all_finite(v) {
        return Err(domain("non-finite entry in soft_threshold input"));
    }
    Ok(v.map(|x| shrink(x, tau)))
}

/// Euclidean projection onto the unit simplex `{x ≥ 0, Σx = 1}`.
///
/// Sort-and-threshold: find the largest `ρ` with `u_ρ > (Σ_{i≤ρ} u_i − 1)/ρ`
/// over the descending sort `u`, then shift and clip.
pub fn project_simplex(v: &Vector) -> Result<Vector> {
    if v.is_empty() {
        return Err(domain("cannot project a zero-dimensional vector"));
    }
    if !all_finite(v) {
        return Err(domain("non-finite entry in project_simplex input"));
    }
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let candidate = (cumsum - 1.0) / (i + 1) as f64;
        if ui - candidate > 0.0 {
            theta = candidate;
        }
    }
    Ok(v.map(|x| (x - theta).max(0.0)))
}

/// `argmin_x ½‖Ax − b‖² + (1/2t)‖x − v‖²`, solved through the normal
/// equations `(AᵀA + I/t) x = Aᵀb + v/t`.
///
/// This free function factors on every call; [`LeastSquares`] caches the
/// factorization per step.
pub fn prox_least_squares(a: &Matrix, b: &Vector, t: f64, v: &Vector) -> Result<Vector> {
    LeastSquares::new(a.clone(), b.clone())?.eval(t, v)
}

/// Yosida approximation with unit parameter: `Ã(x) = x − J_A(x)`.
pub fn yosida_apply(res: &dyn ProxMap, x: &Vector) -> Result<Vector> {
    Ok(x - res.eval(1.0, x)?)
}

/// Resolvent of the Yosida approximation,
/// `(I + cÃ)^{-1}(x) = x/(1+c) + c/(1+c)·J_{(1+c)A}(x)`.
pub fn resolvent_of_yosida(res: &dyn ProxMap, c: f64, x: &Vector) -> Result<Vector> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("resolvent index must be positive, got {c}")));
    }
    let j = res.eval(1.0 + c, x)?;
    Ok(x / (1.0 + c) + j * (c / (1.0 + c)))
}

/// Douglas-Rachford operator
/// `T(x) = ½x + ½(2J_{ρA} − I)(2J_{ρB}(x) − x)`.
pub fn dr_operator(res_a: &dyn ProxMap, res_b: &dyn ProxMap, rho: f64, x: &Vector) -> Result<Vector> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(domain(format!("rho must be positive, got {rho}")));
    }
    if res_a.dim() != res_b.dim() {
        return Err(Error::Dimension { expected: res_a.dim(), got: res_b.dim() });
    }
    let u = res_b.eval(rho, x)?;
    let reflected = &u * 2.0 - x;
    let v = res_a.eval(rho, &reflected)?;
    // ½x + ½(2v − (2u − x)) simplifies to x + v − u.
    Ok(x + v - u)
}
