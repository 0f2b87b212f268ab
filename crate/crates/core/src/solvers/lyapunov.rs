use super::state::{MonotoneParams, Slot, SolverState};
use crate::error::{domain, Error, Result};
use crate::schedules::Schedule;
use crate::Vector;

/// Objective gaps below `−NEGATIVE_GAP_TOL` mean the reference solution is
/// not optimal.
pub const NEGATIVE_GAP_TOL: f64 = 1e-9;

fn check_gap(f_gap: f64) -> Result<()> {
    if f_gap.is_nan() || f_gap < -NEGATIVE_GAP_TOL {
        return Err(domain(format!("objective gap {f_gap:e} is negative: bad reference solution")));
    }
    Ok(())
}

fn check_ref(x: &Vector, xstar: &Vector) -> Result<()> {
    if x.len() != xstar.len() {
        return Err(Error::Dimension { expected: x.len(), got: xstar.len() });
    }
    Ok(())
}

/// `(Σ_{i<k} c_i)(f(x_k) − f*) + ½‖x_k − x*‖²` for the convex PPA.
pub fn lyapunov_ppa_convex(sum_c: f64, f_gap: f64, x: &Vector, xstar: &Vector) -> Result<f64> {
    check_gap(f_gap)?;
    check_ref(x, xstar)?;
    Ok(sum_c * f_gap + 0.5 * (x - xstar).norm_squared())
}

/// `k‖x_{k+1} − x_k‖² + ‖x_k − x*‖²` for the PPA on a monotone operator.
pub fn lyapunov_ppa_monotone(k: usize, x_k: &Vector, x_next: &Vector, xstar: &Vector) -> Result<f64> {
    check_ref(x_k, xstar)?;
    check_ref(x_next, xstar)?;
    Ok(k as f64 * (x_next - x_k).norm_squared() + (x_k - xstar).norm_squared())
}

/// `A_k(f(x_k) − f*) + ½‖z_k − x*‖²` for the convex symplectic method, with
/// `k` the state's clock.
pub fn lyapunov_convex(state: &SolverState, s: &Schedule, f_gap: f64, xstar: &Vector) -> Result<f64> {
    check_gap(f_gap)?;
    check_ref(&state.z, xstar)?;
    Ok(s.at(state.k).big_a * f_gap + 0.5 * (&state.z - xstar).norm_squared())
}

/// The four terms of the monotone symplectic Lyapunov function,
///
/// ```text
/// (Ck[k+r−C(k+1)]/2)‖g‖² + Crk⟨g, x−x*⟩ + ½‖Ckg − rz + rx*‖² + ((r³−2r²)/2)‖z−x*‖²
/// ```
///
/// with `g = x̃_k − x_k` (or `Ã(x_k)` for the Yosida step).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneLyapunov {
    pub terms: [f64; 4],
}

impl MonotoneLyapunov {
    pub fn total(&self) -> f64 {
        self.terms.iter().sum()
    }
}

/// Evaluates [`MonotoneLyapunov`] at `state`. The residual `g` is read from
/// the [`Slot::Residual`] aux vector; when absent (as at `k = 0`) it is zero,
/// which is immaterial because every `g` term carries a factor `k`.
pub fn lyapunov_monotone(state: &SolverState, p: &MonotoneParams, xstar: &Vector) -> Result<MonotoneLyapunov> {
    check_ref(&state.x, xstar)?;
    let zero;
    let g = match state.aux(Slot::Residual) {
        Some(g) => g,
        None => {
            zero = Vector::zeros(state.dim());
            &zero
        }
    };
    let (c, r, k) = (p.c, p.r, state.k as f64);
    let dz = &state.z - xstar;
    let t1 = c * k * (k + r - c * (k + 1.0)) / 2.0 * g.norm_squared();
    let t2 = c * r * k * g.dot(&(&state.x - xstar));
    let t3 = 0.5 * (g * (c * k) - &dz * r).norm_squared();
    let t4 = (r.powi(3) - 2.0 * r * r) / 2.0 * dz.norm_squared();
    Ok(MonotoneLyapunov { terms: [t1, t2, t3, t4] })
}
