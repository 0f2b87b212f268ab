use std::sync::Arc;

use super::run::Stepper;
use super::state::{MonotoneParams, Slot, SolverState};
use crate::error::{domain, Error, Result};
use crate::operators::{resolvent_of_yosida, ProxMap};
use crate::schedules::Schedule;

fn check_dims(res: &dyn ProxMap, state: &SolverState) -> Result<()> {
    state.check()?;
    if res.dim() != state.dim() {
        return Err(Error::Dimension { expected: res.dim(), got: state.dim() });
    }
    Ok(())
}

/// `x_{k+1} = prox_{c f}(x_k)`. With a resolvent and `c = 1` this is the
/// proximal point method for a monotone operator.
pub fn ppa_convex_step(prox: &dyn ProxMap, c: f64, state: &SolverState) -> Result<SolverState> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("prox index must be positive, got {c}")));
    }
    check_dims(prox, state)?;
    let mut next = state.clone();
    next.x = prox.eval(c, &state.x)?;
    next.k += 1;
    Ok(next)
}

/// Halpern-accelerated proximal point step.
///
/// `x_{k+1} = J_A(y_k)` and
/// `y_{k+1} = x_{k+1} + θ(x_{k+1} − x_k) − θ(x_k − y_{k−1})`, `θ = k/(k+2)`.
/// Missing `y_k` defaults to `x_k` and missing `y_{k−1}` to `y_k`; the latter
/// only matters through a coefficient that vanishes at `k = 0`.
pub fn halpern_step(res: &dyn ProxMap, state: &SolverState) -> Result<SolverState> {
    check_dims(res, state)?;
    let y = state.aux(Slot::Y).unwrap_or(&state.x).clone();
    let y_prev = state.aux(Slot::PrevY).unwrap_or(&y).clone();
    let x_next = res.eval(1.0, &y)?;
    let kf = state.k as f64;
    let theta = kf / (kf + 2.0);
    let y_next = &x_next + (&x_next - &state.x) * theta - (&state.x - &y_prev) * theta;
    let mut next = state.clone();
    next.aux.insert(Slot::Residual, &y - &x_next);
    next.aux.insert(Slot::PrevY, y);
    next.aux.insert(Slot::Y, y_next);
    next.x = x_next;
    next.k += 1;
    Ok(next)
}

/// Convex symplectic step driven by `(a_k, b_k, c_k)`.
///
/// Stores `y_{k+1}` and the certified subgradient
/// `∇̃f(x_{k+1}) = (b_k x_k + z_k − (b_k+1)x_{k+1})/c_k` in the aux slots.
pub fn sppa_convex_step(prox: &dyn ProxMap, s: &Schedule, state: &SolverState) -> Result<SolverState> {
    check_dims(prox, state)?;
    let k = state.k;
    s.check_at(k).map_err(|v| Error::Contract { k, what: format!("schedule {}: {}", s.name(), v.condition) })?;
    let v = s.at(k);
    let b1 = v.b + 1.0;
    let y = (&state.z + &state.x * v.b) / b1;
    let x_next = prox.eval(v.c / b1, &y)?;
    let mut next = state.clone();
    next.z = &state.z + (&x_next - &y) * (v.a / v.c * b1);
    let grad = (&state.x * v.b + &state.z - &x_next * b1) / v.c;
    next.aux.insert(Slot::Y, y);
    next.aux.insert(Slot::Residual, grad);
    next.x = x_next;
    next.k += 1;
    Ok(next)
}

/// Anchored point `x̃_{k+1} = (r/(k+r))z_k + (k/(k+r))x_k`.
fn anchored(p: &MonotoneParams, state: &SolverState) -> crate::Vector {
    let w = p.anchor_weight(state.k);
    &state.z * w + &state.x * (1.0 - w)
}

/// Monotone symplectic step:
/// `x_{k+1} = J_A(x̃_{k+1})`, `z_{k+1} = z_k + (C/r)(x_{k+1} − x̃_{k+1})`.
/// The residual `x̃_{k+1} − x_{k+1} ∈ A(x_{k+1})` is stored.
pub fn sppa_monotone_step(res: &dyn ProxMap, p: &MonotoneParams, state: &SolverState) -> Result<SolverState> {
    check_dims(res, state)?;
    let tilde = anchored(p, state);
    let x_next = res.eval(1.0, &tilde)?;
    let mut next = state.clone();
    next.z = &state.z + (&x_next - &tilde) * (p.c / p.r);
    next.aux.insert(Slot::Residual, &tilde - &x_next);
    next.aux.insert(Slot::Tilde, tilde);
    next.x = x_next;
    next.k += 1;
    Ok(next)
}

/// `a_k = 1 + k/r`, the choice that pins the Yosida step's resolvent index at 2.
pub fn yosida_constant_a(k: usize, r: f64) -> f64 {
    1.0 + k as f64 / r
}

/// Symplectic step on the Yosida approximation `Ã = I − J_A`.
///
/// `x_{k+1} = (I + (ra_k/(k+r))Ã)^{-1}(x̃_{k+1})`, evaluated through a single
/// resolvent of `A` with index `1 + ra_k/(k+r)`, and
/// `z_{k+1} = z_k + (C(k+r)/(r²a_k))(x_{k+1} − x̃_{k+1})`. The stored residual
/// is `Ã(x_{k+1}) = (x̃_{k+1} − x_{k+1})(k+r)/(ra_k)`.
pub fn sppa_yosida_step(res: &dyn ProxMap, p: &MonotoneParams, a_k: f64, state: &SolverState) -> Result<SolverState> {
    if !(a_k > 0.0 && a_k.is_finite()) {
        return Err(domain(format!("a_k must be positive, got {a_k}")));
    }
    check_dims(res, state)?;
    let kr = state.k as f64 + p.r;
    let index = p.r * a_k / kr;
    let tilde = anchored(p, state);
    let x_next = resolvent_of_yosida(res, index, &tilde)?;
    let mut next = state.clone();
    next.z = &state.z + (&x_next - &tilde) * (p.c * kr / (p.r * p.r * a_k));
    next.aux.insert(Slot::Residual, (&tilde - &x_next) / index);
    next.aux.insert(Slot::Tilde, tilde);
    next.x = x_next;
    next.k += 1;
    Ok(next)
}

/// Proximal point method with a step-size sequence.
pub struct PpaStepper {
    pub prox: Arc<dyn ProxMap>,
    pub c: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl PpaStepper {
    pub fn constant(prox: Arc<dyn ProxMap>, c: f64) -> Self {
        Self { prox, c: Arc::new(move |_| c) }
    }
}

impl Stepper for PpaStepper {
    fn name(&self) -> &str {
        "ppa"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        ppa_convex_step(self.prox.as_ref(), (self.c)(state.k), state)
    }
}

pub struct HalpernStepper {
    pub res: Arc<dyn ProxMap>,
}

impl Stepper for HalpernStepper {
    fn name(&self) -> &str {
        "halpern"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        halpern_step(self.res.as_ref(), state)
    }

    /// Restarts Halpern's anchor at the current point: `y = x`, clock zero.
    fn restart(&self, state: &mut SolverState) {
        state.k = 0;
        state.z = state.x.clone();
        state.aux.insert(Slot::Y, state.x.clone());
        state.aux.remove(&Slot::PrevY);
    }

    fn residual_sq(&self, prev: &SolverState, next: &SolverState) -> f64 {
        (&next.x - &prev.x).norm_squared()
    }
}

pub struct SppaConvexStepper {
    pub prox: Arc<dyn ProxMap>,
    pub schedule: Schedule,
}

impl Stepper for SppaConvexStepper {
    fn name(&self) -> &str {
        "sppa-convex"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        sppa_convex_step(self.prox.as_ref(), &self.schedule, state)
    }
}

pub struct SppaMonotoneStepper {
    pub res: Arc<dyn ProxMap>,
    pub params: MonotoneParams,
}

impl Stepper for SppaMonotoneStepper {
    fn name(&self) -> &str {
        "sppa-monotone"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        sppa_monotone_step(self.res.as_ref(), &self.params, state)
    }
}

pub struct SppaYosidaStepper {
    pub res: Arc<dyn ProxMap>,
    pub params: MonotoneParams,
    /// `a_k` as a function of the clock; [`yosida_constant_a`] by default.
    pub a: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl SppaYosidaStepper {
    pub fn new(res: Arc<dyn ProxMap>, params: MonotoneParams) -> Self {
        let r = params.r;
        Self { res, params, a: Arc::new(move |k| yosida_constant_a(k, r)) }
    }
}

impl Stepper for SppaYosidaStepper {
    fn name(&self) -> &str {
        "sppa-yosida"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        sppa_yosida_step(self.res.as_ref(), &self.params, (self.a)(state.k), state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{L1Norm, ScaledIdentity, SeparableQuadraticL1, ZeroOperator};
    use crate::testutil::argmin_1d;
    use crate::Vector;
    use nalgebra::dvector;

    fn st(x: f64) -> SolverState {
        SolverState::new(dvector![x])
    }

    #[test]
    fn ppa_convex_examples() {
        let quad = ScaledIdentity::new(1, 1.0);
        assert_eq!(ppa_convex_step(&quad, 1.0, &st(1.0)).unwrap().x, dvector![0.5]);
        let l1 = L1Norm::new(1, 1.0);
        let next = ppa_convex_step(&l1, 1.0, &st(3.0)).unwrap();
        assert_eq!((next.x[0], next.z[0], next.k), (2.0, 3.0, 1));
        let x = ppa_convex_step(&l1, 0.25, &st(0.2)).unwrap().x[0];
        let oracle = argmin_1d(|y| 0.25 * y.abs() + 0.5 * (y - 0.2) * (y - 0.2), -1.0, 1.0);
        assert!((x - oracle).abs() < 1e-7);
        assert_eq!(x, 0.0);
        assert!(ppa_convex_step(&l1, 0.0, &st(1.0)).is_err());
        assert!(ppa_convex_step(&l1, -1.0, &st(1.0)).is_err());
    }

    #[test]
    fn halpern_examples() {
        let l1 = L1Norm::new(1, 1.0);
        let s1 = halpern_step(&l1, &st(3.0)).unwrap();
        assert_eq!(s1.x, dvector![2.0]);
        assert_eq!(s1.aux(Slot::Y).unwrap(), &dvector![2.0]);
        // Hand recursion: x₂ = soft(2,1) = 1, y₂ = 1 + (1/3)(1−2) − (1/3)(2−3).
        let s2 = halpern_step(&l1, &s1).unwrap();
        assert_eq!(s2.x, dvector![1.0]);
        let y2 = 1.0 + (1.0 - 2.0) / 3.0 - (2.0 - 3.0) / 3.0;
        assert!((s2.aux(Slot::Y).unwrap()[0] - y2).abs() < 1e-15);
        assert!((y2 - 1.0).abs() < 1e-15);

        let zero = ZeroOperator::new(2);
        let mut s = SolverState::new(dvector![1.0, -4.0]);
        for _ in 0..10 {
            s = halpern_step(&zero, &s).unwrap();
            assert_eq!(s.x, dvector![1.0, -4.0]);
        }
    }

    #[test]
    fn sppa_convex_examples() {
        let quad = ScaledIdentity::new(1, 1.0);
        let s = Schedule::constant_index(1.0).unwrap();
        let next = sppa_convex_step(&quad, &s, &st(1.0)).unwrap();
        assert_eq!(next.aux(Slot::Y).unwrap(), &dvector![1.0]);
        assert!((next.x[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((next.z[0] - 2.0 / 3.0).abs() < 1e-15);

        // f = ½(x − 2)² is minimised at the start point.
        let shifted = SeparableQuadraticL1::new(dvector![1.0], dvector![2.0], 0.0).unwrap();
        let next = sppa_convex_step(&shifted, &s, &st(2.0)).unwrap();
        assert_eq!((next.x[0], next.z[0]), (2.0, 2.0));
    }

    #[test]
    fn sppa_convex_rejects_invalid_schedule() {
        let bad = Schedule::custom("bad", |_| 0.0, |_| 1.0, |_| 1.0, |_| 1.0);
        let err = sppa_convex_step(&L1Norm::new(1, 1.0), &bad, &st(1.0)).unwrap_err();
        assert!(matches!(err, Error::Contract { k: 0, .. }));
    }

    #[test]
    fn sppa_convex_degenerate_schedule_is_ppa() {
        let c = |k: usize| 0.5 + 0.1 * k as f64;
        let s = Schedule::custom("ppa", |_| 0.0, c, |_| 0.0, c);
        let prox = SeparableQuadraticL1::new(dvector![1.0, 3.0, 0.5], dvector![1.0, -2.0, 0.3], 0.4).unwrap();
        let mut a = SolverState::new(dvector![4.0, 1.0, -3.0]);
        let mut b = a.clone();
        for _ in 0..100 {
            a = sppa_convex_step(&prox, &s, &a).unwrap();
            b = ppa_convex_step(&prox, c(b.k), &b).unwrap();
            assert!((&a.x - &b.x).amax() <= 1e-12);
            assert!((&a.z - &a.x).amax() <= 1e-12);
        }
    }

    #[test]
    fn sppa_monotone_examples() {
        let l1 = L1Norm::new(1, 1.0);
        let p = MonotoneParams::guarantee(1.0, 2.0).unwrap();
        let next = sppa_monotone_step(&l1, &p, &st(3.0)).unwrap();
        assert_eq!(next.aux(Slot::Tilde).unwrap(), &dvector![3.0]);
        assert_eq!((next.x[0], next.z[0]), (2.0, 2.5));

        let mut s = st(0.0);
        for _ in 0..20 {
            s = sppa_monotone_step(&l1, &p, &s).unwrap();
            assert_eq!((s.x[0], s.z[0]), (0.0, 0.0));
        }
    }

    #[test]
    fn sppa_monotone_with_c_equal_r_is_ppa() {
        let r = 3.0;
        let p = MonotoneParams::exploratory(r, r).unwrap();
        let res = SeparableQuadraticL1::new(dvector![0.3, 2.0], dvector![5.0, -1.0], 0.7).unwrap();
        let mut a = SolverState::new(dvector![-2.0, 6.0]);
        let mut b = a.clone();
        for _ in 0..100 {
            a = sppa_monotone_step(&res, &p, &a).unwrap();
            b = ppa_convex_step(&res, 1.0, &b).unwrap();
            assert!((&a.x - &b.x).amax() <= 1e-12);
        }
    }

    #[test]
    fn membership_residual_reproduces_the_resolvent() {
        let res = SeparableQuadraticL1::new(dvector![0.3, 2.0, 1.0], dvector![5.0, -1.0, 0.0], 0.7).unwrap();
        let p = MonotoneParams::guarantee(0.8, 2.5).unwrap();
        let mut s = SolverState::new(dvector![-2.0, 6.0, 0.1]);
        for _ in 0..50 {
            s = sppa_monotone_step(&res, &p, &s).unwrap();
            let g = s.aux(Slot::Residual).unwrap();
            let back = res.eval(1.0, &(&s.x + g)).unwrap();
            assert!((back - &s.x).amax() <= 1e-10);
        }
    }

    #[test]
    fn yosida_examples() {
        assert_eq!(2.0 * yosida_constant_a(7, 2.0) / (7.0 + 2.0) + 1.0, 2.0);
        for k in 0..50 {
            let r = 2.5;
            let idx = 1.0 + r * yosida_constant_a(k, r) / (k as f64 + r);
            assert!((idx - 2.0).abs() < 1e-14);
        }

        let l1 = L1Norm::new(1, 1.0);
        let p = MonotoneParams::guarantee(1.0, 2.0).unwrap();
        let next = sppa_yosida_step(&l1, &p, 1.0, &st(4.0)).unwrap();
        assert_eq!(next.aux(Slot::Tilde).unwrap(), &dvector![4.0]);
        assert!((next.x[0] - 3.0).abs() < 1e-15);
        assert!((next.z[0] - 3.5).abs() < 1e-15);
        // Ã(3) = 3 − soft(3,1) = 1.
        assert!((next.aux(Slot::Residual).unwrap()[0] - 1.0).abs() < 1e-15);

        let zero = ZeroOperator::new(1);
        let next = sppa_yosida_step(&zero, &p, 1.0, &st(4.0)).unwrap();
        assert_eq!((next.x[0], next.z[0]), (4.0, 4.0));
        assert!(sppa_yosida_step(&l1, &p, 0.0, &st(4.0)).is_err());
    }

    #[test]
    fn yosida_residual_is_the_yosida_value() {
        let res = SeparableQuadraticL1::new(dvector![0.3, 2.0], dvector![5.0, -1.0], 0.7).unwrap();
        let stepper = SppaYosidaStepper::new(Arc::new(res.clone()), MonotoneParams::guarantee(1.0, 2.0).unwrap());
        let mut s = SolverState::new(dvector![3.0, 3.0]);
        for _ in 0..30 {
            s = stepper.step(&s).unwrap();
            let direct: Vector = &s.x - res.eval(1.0, &s.x).unwrap();
            assert!((direct - s.aux(Slot::Residual).unwrap()).amax() < 1e-12);
        }
    }
}
