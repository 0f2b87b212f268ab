//! Wiring from generated instances to the splitting problems.

use std::sync::Arc;

use super::{
    AdmmOracle, AdmmProblem, Block, EqualityConstrainedProblem, FusedF, FusedG, LassoSplit, ProxBlock,
    QuadraticL1Split, SaddleProblem,
};
use crate::error::{domain, Result};
use crate::operators::{AffineSet, L1Norm, LeastSquares, ProxMap, SeparableQuadraticL1, Simplex};
use crate::problems::{Kind, ProblemInstance};
use crate::Vector;

fn expect(p: &ProblemInstance, kinds: &[Kind]) -> Result<()> {
    if kinds.contains(&p.kind) {
        Ok(())
    } else {
        Err(domain(format!("instance of kind {} cannot be used here", p.kind)))
    }
}

fn l1_block(n: usize, weight: f64, negated: bool) -> Arc<dyn AdmmOracle> {
    let l1 = L1Norm::new(n, weight);
    let value = l1.clone();
    Arc::new(ProxBlock { prox: Arc::new(l1), negated, value: Arc::new(move |x| value.value(x)) })
}

/// LASSO as `½‖Ax − b‖² + μ‖y‖₁` with `x − y = 0`.
pub fn lasso_admm(p: &ProblemInstance, rho: f64) -> Result<AdmmProblem> {
    expect(p, &[Kind::Lasso])?;
    let ls = Arc::new(LeastSquares::new(p.matrix("A")?.clone(), p.vector("b")?.clone())?);
    let value = ls.clone();
    let f: Arc<dyn AdmmOracle> =
        Arc::new(ProxBlock { prox: ls, negated: false, value: Arc::new(move |x| value.value(x)) });
    let g = l1_block(p.n, p.param("mu")?, true);
    AdmmProblem::new(f, g, Block::Identity(p.n), Block::NegIdentity(p.n), Vector::zeros(p.n), rho)
}

/// Basis pursuit as `‖x‖₁ + I(Ay = b)` with `x − y = 0`.
pub fn basis_pursuit_admm(p: &ProblemInstance, rho: f64) -> Result<AdmmProblem> {
    expect(p, &[Kind::BasisPursuit])?;
    let f = l1_block(p.n, 1.0, false);
    let set = AffineSet::new(p.matrix("A")?.clone(), p.vector("b")?.clone())?;
    let g: Arc<dyn AdmmOracle> = Arc::new(ProxBlock { prox: Arc::new(set), negated: true, value: Arc::new(|_| 0.0) });
    AdmmProblem::new(f, g, Block::Identity(p.n), Block::NegIdentity(p.n), Vector::zeros(p.n), rho)
}

/// Fused LASSO with copies `x = (y, y, Dy)`:
/// `f(x) = ½‖Ax¹ − b‖² + μ₁‖x²‖₁ + μ₂‖x³‖₁`, `g = 0`, `x − [I; I; D]y = 0`.
pub fn fused_lasso_admm(p: &ProblemInstance, rho: f64) -> Result<AdmmProblem> {
    expect(p, &[Kind::FusedLasso])?;
    let n = p.n;
    let f = FusedF {
        least_squares: LeastSquares::new(p.matrix("A")?.clone(), p.vector("b")?.clone())?,
        n,
        mu1: p.param("mu1")?,
        mu2: p.param("mu2")?,
    };
    let g = FusedG::new(p.matrix("D")?.clone())?;
    let block = g.block();
    AdmmProblem::new(Arc::new(f), Arc::new(g), Block::Identity(3 * n - 1), block, Vector::zeros(3 * n - 1), rho)
}

/// Fused LASSO objective at `x`.
pub fn fused_lasso_value(p: &ProblemInstance, x: &Vector) -> Result<f64> {
    expect(p, &[Kind::FusedLasso])?;
    let r = p.matrix("A")? * x - p.vector("b")?;
    Ok(0.5 * r.norm_squared() + p.param("mu1")? * x.lp_norm(1) + p.param("mu2")? * (p.matrix("D")? * x).lp_norm(1))
}

/// The separable objective as a prox map.
pub fn quadratic_l1_prox(p: &ProblemInstance) -> Result<SeparableQuadraticL1> {
    expect(p, &[Kind::QuadraticL1])?;
    SeparableQuadraticL1::new(p.vector("d")?.clone(), p.vector("a")?.clone(), p.param("mu")?)
}

/// Split equality form of the quadratic + ℓ₁ instance.
pub fn quadratic_l1_split(p: &ProblemInstance) -> Result<EqualityConstrainedProblem> {
    expect(p, &[Kind::QuadraticL1])?;
    let oracle = QuadraticL1Split { d: p.vector("d")?.clone(), a: p.vector("a")?.clone(), mu: p.param("mu")? };
    EqualityConstrainedProblem::new(Arc::new(oracle), QuadraticL1Split::constraint(p.n), Vector::zeros(p.n))
}

/// Split equality form of a LASSO instance, `x − y = 0`.
pub fn lasso_split(p: &ProblemInstance) -> Result<EqualityConstrainedProblem> {
    expect(p, &[Kind::Lasso])?;
    let oracle = LassoSplit::new(p.matrix("A")?.clone(), p.vector("b")?.clone(), p.param("mu")?)?;
    EqualityConstrainedProblem::new(Arc::new(oracle), QuadraticL1Split::constraint(p.n), Vector::zeros(p.n))
}

/// Matrix game with both steps `0.99/‖A‖`.
pub fn matrix_game(p: &ProblemInstance) -> Result<SaddleProblem> {
    expect(p, &[Kind::MatrixGame])?;
    let norm = p.param("norm_a")?;
    if norm <= 0.0 {
        return Err(domain("matrix game with a zero payoff matrix"));
    }
    let mu = 0.99 / norm;
    SaddleProblem::new(
        Arc::new(Simplex::new(p.vector("a")?.clone())),
        Arc::new(Simplex::new(p.vector("b")?.clone())),
        p.matrix("A")?.clone(),
        mu,
        mu,
        norm,
    )
}

/// Resolvents `(∂‖·‖₁, N_{Ax=b})` for Douglas-Rachford on basis pursuit.
pub fn basis_pursuit_dr(p: &ProblemInstance) -> Result<(Arc<dyn ProxMap>, Arc<dyn ProxMap>)> {
    expect(p, &[Kind::BasisPursuit])?;
    Ok((Arc::new(L1Norm::new(p.n, 1.0)), Arc::new(AffineSet::new(p.matrix("A")?.clone(), p.vector("b")?.clone())?)))
}
