//! Randomised checks of the resolvent and Yosida properties every solver
//! relies on: firm nonexpansiveness of `J_{tA}`, cocoercivity and
//! 1-Lipschitz continuity of `Ã = I − J_A`, and the closed-form resolvent of
//! `Ã`.

use std::sync::Arc;

use proptest::prelude::*;
use sppa::operators::{
    resolvent_of_yosida, yosida_apply, AffineSet, DouglasRachford, L1Norm, LeastSquares, LinearOperator, ProxMap,
    ScaledIdentity, SeparableQuadraticL1, Simplex,
};
use sppa::problems::Rng;
use sppa::{Matrix, Vector};

const N: usize = 6;
const TOL: f64 = 1e-10;

fn operators() -> Vec<(&'static str, Arc<dyn ProxMap>)> {
    let mut rng = Rng::new(2024);
    let a = rng.normal_matrix(3, N);
    let b = rng.normal_vector(3);
    let ls_a = rng.normal_matrix(8, N);
    let ls_b = rng.normal_vector(8);
    let root = rng.normal_matrix(N, N);
    let skew = rng.normal_matrix(N, N);
    let m: Matrix = root.transpose() * &root / N as f64 + (&skew - skew.transpose());
    let d = rng.normal_vector(N).map(|v| 0.5 + v.abs());
    let l1: Arc<dyn ProxMap> = Arc::new(L1Norm::new(N, 0.7));
    let affine: Arc<dyn ProxMap> = Arc::new(AffineSet::new(a, b).unwrap());
    vec![
        ("l1", l1.clone()),
        ("scaled_identity", Arc::new(ScaledIdentity::new(N, 2.5))),
        ("simplex", Arc::new(Simplex::new(rng.normal_vector(N)))),
        ("affine", affine.clone()),
        ("least_squares", Arc::new(LeastSquares::new(ls_a, ls_b).unwrap())),
        ("linear_skew", Arc::new(LinearOperator::new(m).unwrap())),
        ("quadratic_l1", Arc::new(SeparableQuadraticL1::new(d, rng.normal_vector(N), 0.3).unwrap())),
        ("douglas_rachford", Arc::new(DouglasRachford::new(l1, affine, 1.5).unwrap())),
    ]
}

fn vector() -> impl Strategy<Value = Vector> {
    prop::collection::vec(-10.0..10.0f64, N).prop_map(Vector::from_vec)
}

fn steps(op: &dyn ProxMap) -> Vec<f64> {
    if op.label() == "douglas_rachford" {
        vec![1.0]
    } else {
        vec![0.1, 1.0, 3.7]
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn resolvents_are_firmly_nonexpansive(x in vector(), y in vector()) {
        for (name, op) in operators() {
            for t in steps(op.as_ref()) {
                let (jx, jy) = (op.eval(t, &x).unwrap(), op.eval(t, &y).unwrap());
                let d = &jx - &jy;
                let lhs = d.norm_squared();
                let rhs = d.dot(&(&x - &y));
                prop_assert!(lhs <= rhs + TOL * rhs.abs().max(1.0), "{name} t={t}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn yosida_is_cocoercive_and_nonexpansive(x in vector(), y in vector()) {
        for (name, op) in operators() {
            let d = yosida_apply(op.as_ref(), &x).unwrap() - yosida_apply(op.as_ref(), &y).unwrap();
            let diff = &x - &y;
            let inner = d.dot(&diff);
            prop_assert!(d.norm_squared() <= inner + TOL * inner.abs().max(1.0), "{name}: cocoercivity");
            prop_assert!(d.norm() <= diff.norm() * (1.0 + TOL) + TOL, "{name}: Lipschitz");
        }
    }

    #[test]
    fn resolvent_of_yosida_inverts_i_plus_c_yosida(x in vector(), c in 0.05..20.0f64) {
        for (name, op) in operators() {
            if op.label() == "douglas_rachford" {
                // Only the unit-step resolvent exists for the DR operator.
                prop_assert!(resolvent_of_yosida(op.as_ref(), c, &x).is_err());
                continue;
            }
            let y = resolvent_of_yosida(op.as_ref(), c, &x).unwrap();
            let back = &y + yosida_apply(op.as_ref(), &y).unwrap() * c;
            let err = (&back - &x).amax();
            prop_assert!(err <= TOL * x.amax().max(1.0), "{name} c={c}: error {err}");
        }
    }
}
