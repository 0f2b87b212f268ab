use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::operators::{dr_operator, ProxMap};
use crate::solvers::{MonotoneParams, Slot, SolverState, Stepper};

fn check(res_a: &dyn ProxMap, res_b: &dyn ProxMap, rho: f64, state: &SolverState) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(domain(format!("rho must be positive, got {rho}")));
    }
    state.check()?;
    for d in [res_a.dim(), res_b.dim()] {
        if d != state.dim() {
            return Err(Error::Dimension { expected: d, got: state.dim() });
        }
    }
    Ok(())
}

/// Symplectic Douglas-Rachford step for `0 ∈ A(x) + B(x)`:
///
/// ```text
/// x̃ = (r/(k+r))z + (k/(k+r))x
/// u = J_{ρB}(x̃),  v = J_{ρA}(2u − x̃)
/// x = x̃ + v − u
/// z = z + (C/r)(x − x̃)
/// ```
///
/// which is the monotone symplectic step with the Douglas-Rachford operator
/// in place of the resolvent. `J_{ρB}(x)` solves the problem at the fixed point.
pub fn sdr_step(
    res_a: &dyn ProxMap,
    res_b: &dyn ProxMap,
    rho: f64,
    p: &MonotoneParams,
    state: &SolverState,
) -> Result<SolverState> {
    check(res_a, res_b, rho, state)?;
    let w = p.anchor_weight(state.k);
    let tilde = &state.z * w + &state.x * (1.0 - w);
    let u = res_b.eval(rho, &tilde)?;
    let v = res_a.eval(rho, &(&u * 2.0 - &tilde))?;
    let x_next = &tilde + &v - &u;
    let mut next = state.clone();
    next.z = &state.z + (&x_next - &tilde) * (p.c / p.r);
    next.aux.insert(Slot::Residual, &tilde - &x_next);
    next.aux.insert(Slot::Tilde, tilde);
    next.aux.insert(Slot::U, u);
    next.aux.insert(Slot::V, v);
    next.x = x_next;
    next.k += 1;
    Ok(next)
}

/// Classical Douglas-Rachford: `x ← T(x)`.
pub fn dr_step(res_a: &dyn ProxMap, res_b: &dyn ProxMap, rho: f64, state: &SolverState) -> Result<SolverState> {
    check(res_a, res_b, rho, state)?;
    let mut next = state.clone();
    next.x = dr_operator(res_a, res_b, rho, &state.x)?;
    next.aux.insert(Slot::U, res_b.eval(rho, &next.x)?);
    next.z = next.x.clone();
    next.k += 1;
    Ok(next)
}

pub struct SdrStepper {
    pub res_a: Arc<dyn ProxMap>,
    pub res_b: Arc<dyn ProxMap>,
    pub rho: f64,
    pub params: MonotoneParams,
}

impl Stepper for SdrStepper {
    fn name(&self) -> &str {
        "sdr"
    }

    fn step(&self, state: &SolverState) -> Result<SolverState> {
        sdr_step(self.res_a.as_ref(), self.res_b.as_ref(), self.rho, &self.params, state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{AffineSet, DouglasRachford, L1Norm, ZeroOperator};
    use crate::solvers::sppa_monotone_step;
    use crate::{Matrix, Vector};
    use nalgebra::dvector;

    #[test]
    fn zero_operators_freeze_z() {
        let zero = ZeroOperator::new(2);
        let p = MonotoneParams::guarantee(1.0, 2.0).unwrap();
        let st = SolverState::new(dvector![1.0, 2.0]);
        let next = sdr_step(&zero, &zero, 0.5, &p, &st).unwrap();
        assert_eq!(next.x, st.x);
        assert_eq!(next.z, st.z);
    }

    #[test]
    fn one_dimensional_step() {
        let l1 = L1Norm::new(1, 1.0);
        let zero = ZeroOperator::new(1);
        let p = MonotoneParams::guarantee(1.0, 2.0).unwrap();
        let next = sdr_step(&l1, &zero, 1.0, &p, &SolverState::new(dvector![3.0])).unwrap();
        // u = 3, v = soft(3, 1) = 2, x = 3 + 2 − 3 = 2, z = 3 + ½(2 − 3).
        assert_eq!(next.aux(Slot::U).unwrap()[0], 3.0);
        assert_eq!(next.aux(Slot::V).unwrap()[0], 2.0);
        assert_eq!((next.x[0], next.z[0]), (2.0, 2.5));
    }

    #[test]
    fn equals_the_monotone_step_on_the_dr_operator() {
        let mut rng = crate::problems::Rng::new(21);
        let a = rng.normal_matrix(3, 6);
        let b = rng.normal_vector(3);
        let res_a: Arc<dyn ProxMap> = Arc::new(L1Norm::new(6, 1.0));
        let res_b: Arc<dyn ProxMap> = Arc::new(AffineSet::new(a, b).unwrap());
        let rho = 0.7;
        let t = DouglasRachford::new(res_a.clone(), res_b.clone(), rho).unwrap();
        let p = MonotoneParams::guarantee(0.8, 3.0).unwrap();
        let mut s1 = SolverState::new(rng.normal_vector(6) * 3.0);
        let mut s2 = s1.clone();
        for _ in 0..50 {
            s1 = sdr_step(res_a.as_ref(), res_b.as_ref(), rho, &p, &s1).unwrap();
            s2 = sppa_monotone_step(&t, &p, &s2).unwrap();
            assert!((&s1.x - &s2.x).amax() <= 1e-12);
            assert!((&s1.z - &s2.z).amax() <= 1e-12);
        }
    }

    #[test]
    fn baseline_iterates_the_operator() {
        let res_a = L1Norm::new(2, 1.0);
        let res_b = ZeroOperator::new(2);
        let mut st = SolverState::new(dvector![4.0, -1.5]);
        let mut x: Vector = st.x.clone();
        for _ in 0..10 {
            st = dr_step(&res_a, &res_b, 0.5, &st).unwrap();
            x = dr_operator(&res_a, &res_b, 0.5, &x).unwrap();
            assert_eq!(st.x, x);
        }
        let _ = Matrix::zeros(1, 1);
    }
}
