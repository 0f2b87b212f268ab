use nalgebra::linalg::LU;

use crate::error::{domain, Error, Result};
use crate::{all_finite, Matrix, Vector};

/// Right-hand side `ẏ = F(t, y)`.
pub(crate) type Rhs<'a> = dyn Fn(f64, &Vector) -> Result<Vector> + 'a;

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_RTOL: f64 = 1e-14;
const NEWTON_STALL_RTOL: f64 = 1e-11;

/// Classical fourth-order Runge-Kutta step.
pub(crate) fn rk4_step(f: &Rhs<'_>, t: f64, y: &Vector, h: f64) -> Result<Vector> {
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &(y + &k1 * (0.5 * h)))?;
    let k3 = f(t + 0.5 * h, &(y + &k2 * (0.5 * h)))?;
    let k4 = f(t + h, &(y + &k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

fn jacobian(f: &Rhs<'_>, t: f64, y: &Vector, fy: &Vector) -> Result<Matrix> {
    let n = y.len();
    let mut jac = Matrix::zeros(n, n);
    let mut probe = y.clone();
    for j in 0..n {
        let eps = 1e-7 * y[j].abs().max(1.0);
        probe[j] = y[j] + eps;
        let col = (f(t, &probe)? - fy) / eps;
        jac.set_column(j, &col);
        probe[j] = y[j];
    }
    Ok(jac)
}

/// Implicit midpoint step `Y = y + hF(t + h/2, (y + Y)/2)`, solved by Newton
/// with a finite-difference Jacobian from an explicit Euler predictor.
pub(crate) fn implicit_midpoint_step(f: &Rhs<'_>, t: f64, y: &Vector, h: f64) -> Result<Vector> {
    let tm = t + 0.5 * h;
    let n = y.len();
    let mut next = y + f(t, y)? * h;
    let mut prev_step = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let mid = (y + &next) * 0.5;
        let fm = f(tm, &mid)?;
        let residual = &next - y - &fm * h;
        let jac = Matrix::identity(n, n) - jacobian(f, tm, &mid, &fm)? * (0.5 * h);
        let delta = LU::new(jac).solve(&residual).ok_or_else(|| domain(format!("singular Newton system at t={t}")))?;
        next -= &delta;
        if !all_finite(&next) {
            break;
        }
        let (step, scale) = (delta.norm(), next.norm().max(1.0));
        if step <= NEWTON_RTOL * scale {
            return Ok(next);
        }
        // Stiff systems can have a rounding floor above NEWTON_RTOL; once the
        // increments stop contracting at that level, further sweeps only
        // bounce between neighbouring floats.
        if step <= NEWTON_STALL_RTOL * scale && step >= 0.5 * prev_step {
            return Ok(next);
        }
        prev_step = step;
    }
    Err(domain(format!("implicit midpoint Newton iteration did not converge at t={t}")))
}

/// Time mesh on `[t0, horizon]`. With `grading = Some(s)` the mesh starts at
/// `t0 = h·2⁻²⁰` and grows geometrically by `1 + 1/s` (so `h_n = t_n/s`)
/// while `t_n/s < h`, then continues with step `h`. Without grading it is
/// uniform from zero. The last point is exactly `horizon`.
pub(crate) fn mesh(h: f64, horizon: f64, grading: Option<f64>) -> Vec<f64> {
    let mut ts = Vec::new();
    let mut t0 = 0.0;
    if let Some(s) = grading {
        let mut t = h * 2f64.powi(-20);
        while t / s < h && t < horizon {
            ts.push(t);
            t *= 1.0 + 1.0 / s;
        }
        t0 = t;
    }
    let mut i = 0usize;
    loop {
        let t = t0 + h * i as f64;
        if t >= horizon - 1e-9 * h {
            break;
        }
        ts.push(t);
        i += 1;
    }
    ts.push(horizon);
    ts
}

pub(crate) fn check_divergence(t: f64, y: &Vector) -> Result<()> {
    let norm = y.norm();
    if !norm.is_finite() || norm > 1e12 {
        return Err(Error::Diverged { t, norm });
    }
    Ok(())
}
