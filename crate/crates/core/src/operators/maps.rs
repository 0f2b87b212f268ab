use std::sync::{Arc, RwLock};

use nalgebra::Cholesky;

use super::{check_input, check_output, check_vector, resolvent_of_yosida, shrink, ProxMap};
use crate::error::{domain, Error, Result};
use crate::{Matrix, Vector};

type Chol = Cholesky<f64, nalgebra::Dyn>;

/// `A = 0`; every resolvent is the identity.
#[derive(Debug, Clone)]
pub struct ZeroOperator {
    n: usize,
}

impl ZeroOperator {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl ProxMap for ZeroOperator {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, t: f64, v: &Vector) -> Result<Vector> {
        check_input(self.n, t, v)?;
        Ok(v.clone())
    }
    fn label(&self) -> &str {
        "zero"
    }
}

/// `f = w‖·‖₁`.
#[derive(Debug, Clone)]
pub struct L1Norm {
    n: usize,
    weight: f64,
}

impl L1Norm {
    pub fn new(n: usize, weight: f64) -> Self {
        assert!(weight >= 0.0 && weight.is_finite(), "l1 weight must be nonnegative");
        Self { n, weight }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.weight * x.lp_norm(1)
    }
}

impl ProxMap for L1Norm {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, t: f64, v: &Vector) -> Result<Vector> {
        check_input(self.n, t, v)?;
        let tau = t * self.weight;
        Ok(v.map(|x| shrink(x, tau)))
    }
    fn label(&self) -> &str {
        "l1"
    }
}

/// `A = αI` (equivalently `f = (α/2)‖·‖²`), `α ≥ 0`.
#[derive(Debug, Clone)]
pub struct ScaledIdentity {
    n: usize,
    alpha: f64,
}

impl ScaledIdentity {
    pub fn new(n: usize, alpha: f64) -> Self {
        assert!(alpha >= 0.0 && alpha.is_finite(), "alpha must be nonnegative");
        Self { n, alpha }
    }
}

impl ProxMap for ScaledIdentity {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, t: f64, v: &Vector) -> Result<Vector> {
        check_input(self.n, t, v)?;
        Ok(v / (1.0 + t * self.alpha))
    }
    fn label(&self) -> &str {
        "scaled_identity"
    }
}

/// `f(x) = ½Σ d_i (x_i − a_i)² + μ‖x‖₁` with `d_i > 0`.
///
/// Separable, so the prox, the minimiser and the optimal value are all in
/// closed form. Used as the exactly certified convex test family.
#[derive(Debug, Clone)]
pub struct SeparableQuadraticL1 {
    pub d: Vector,
    pub a: Vector,
    pub mu: f64,
}

impl SeparableQuadraticL1 {
    pub fn new(d: Vector, a: Vector, mu: f64) -> Result<Self> {
        if d.len() != a.len() {
            return Err(Error::Dimension { expected: d.len(), got: a.len() });
        }
        if d.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(domain("curvatures must be positive"));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(domain("mu must be nonnegative"));
        }
        Ok(Self { d, a, mu })
    }

    pub fn value(&self, x: &Vector) -> f64 {
        let quad: f64 =
            x.iter().zip(self.d.iter().zip(self.a.iter())).map(|(xi, (di, ai))| 0.5 * di * (xi - ai) * (xi - ai)).sum();
        quad + self.mu * x.lp_norm(1)
    }

    pub fn gradient_smooth(&self, x: &Vector) -> Vector {
        self.d.component_mul(&(x - &self.a))
    }

    /// Unique minimiser `soft(a_i, μ/d_i)`.
    pub fn minimizer(&self) -> Vector {
        Vector::from_fn(self.a.len(), |i, _| shrink(self.a[i], self.mu / self.d[i]))
    }
}

impl ProxMap for SeparableQuadraticL1 {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn eval(&self, t: f64, v: &Vector) -> Result<Vector> {
        check_input(self.dim(), t, v)?;
        Ok(Vector::from_fn(v.len(), |i, _| {
            let s = 1.0 + t * self.d[i];
            shrink((t * self.d[i] * self.a[i] + v[i]) / s, t * self.mu / s)
        }))
    }
    fn label(&self) -> &str {
        "quadratic_l1"
    }
}

/// `f = I_Δ + ⟨q, ·⟩` on the unit simplex; `prox_{tf}(v) = P_Δ(v − tq)`.
#[derive(Debug, Clone)]
pub struct Simplex {
    linear: Vector,
}

impl Simplex {
    pub fn new(linear: Vector) -> Self {
        Self { linear }
    }

    pub fn plain(n: usize) -> Self {
        Self { linear: Vector::zeros(n) }
    }
}

impl ProxMap for Simplex {
    fn dim(&self) -> usize {
        self.linear.len()
    }
    fn eval(&self, t: f64, v: &Vector) -> Result<Vector> {
        check_input(self.dim(), t, v)?;
        super::project_simplex(&(v - &self.linear * t))
    }
    fn label(&self) -> &str {
        "simplex"
    }
}

/// Indicator of the affine set `{y : Ay = b}`; the resolvent is the
/// orthogonal projection `w − Aᵀ(AAᵀ)^{-1}(Aw − b)` for every step.
#[derive(Clone)]
pub struct AffineSet {
    a: Matrix,
    b: Vector,
    gram: Chol,
}

impl AffineSet {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::Dimension { expected: a.nrows(), got: b.len() });
        }
        let gram = Cholesky::new(&a * a.transpose())
            .ok_or_else(|| domain("AAᵀ is not positive definite (A needs full row rank)"))?;
        Ok(Self { a, b, gram })
    }

    pub fn project(&self, w: &Vector) -> Vector {
        let r = &self.a * w - &self.b;
        w - self.a.transpose() * self.gram.solve(&r)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &Vector {
        &self.b
    }
}

impl ProxMap for AffineSet {
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn eval(&self, t: f64, v: &Vector) -> Result<Vector> {
        check_input(self.dim(), t, v)?;
        check_output(self.project(v))
    }
    fn label(&self) -> &str {
        "affine"
    }
}

/// `f(x) = ½‖Ax − b‖²`. Factorizations of `AᵀA + I/t` are cached per
/// distinct `t` (populate-once; safe under concurrent reads).
pub struct LeastSquares {
    a: Matrix,
    b: Vector,
    atb: Vector,
    ata: Matrix,
    cache: RwLock<Vec<(u64, Arc<Chol>)>>,
}

impl LeastSquares {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::Dimension { expected: a.nrows(), got: b.len() });
        }
        let atb = a.transpose() * &b;
        let ata = a.transpose() * &a;
        Ok(Self { a, b, atb, ata, cache: RwLock::new(Vec::new()) })
    }

    fn factor(&self, t: f64) -> Result<Arc<Chol>> {
        let key = t.to_bits();
        if let Some((_, c)) = self.cache.read().expect("cache lock").iter().find(|(k, _)| *k == key) {
            return Ok(Arc::clone(c));
        }
        let mut m = self.ata.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += 1.0 / t;
        }
        let chol = Arc::new(Cholesky::new(m).ok_or_else(|| domain("normal matrix not positive definite"))?);
        let mut guard = self.cache.write().expect("cache lock");
        if let Some((_, c)) = guard.iter().find(|(k, _)| *k == key) {
            return Ok(Arc::clone(c));
        }
        guard.push((key, Arc::clone(&chol)));
        Ok(chol)
    }

    pub fn value(&self, x: &Vector) -> f64 {
        0.5 * (&self.a * x - &self.b).norm_squared()
    }
}

impl ProxMap for LeastSquares {
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn eval(&self, t: f64, v: &Vector) -> Result<Vector> {
        check_input(self.dim(), t, v)?;
        let chol = self.factor(t)?;
        let rhs = &self.atb + v / t;
        check_output(chol.solve(&rhs))
    }
    fn label(&self) -> &str {
        "least_squares"
    }
}

/// Linear monotone operator `A(x) = Mx` with `M + Mᵀ ⪰ 0` (skew parts
/// allowed, so this covers operators that are not subdifferentials).
#[derive(Debug, Clone)]
pub struct LinearOperator {
    m: Matrix,
}

impl LinearOperator {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(domain("linear operator must be square"));
        }
        let sym = (&m + m.transpose()) * 0.5;
        let min_eig = sym.symmetric_eigenvalues().min();
        if min_eig < -1e-12 {
            return Err(domain(format!("operator is not monotone (min eigenvalue {min_eig:e})")));
        }
        Ok(Self { m })
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.m * x
    }
}

impl ProxMap for LinearOperator {
    fn dim(&self) -> usize {
        self.m.nrows()
    }
    fn eval(&self, t: f64, v: &Vector) -> Result<Vector> {
        check_input(self.dim(), t, v)?;
        let sys = Matrix::identity(self.dim(), self.dim()) + &self.m * t;
        let x = sys.lu().solve(v).ok_or_else(|| domain("I + tM is singular"))?;
        check_output(x)
    }
    fn label(&self) -> &str {
        "linear"
    }
}

/// The Douglas-Rachford operator `T_{ρA,ρB}` packaged as a resolvent.
///
/// `T` is firmly nonexpansive, hence the unit-step resolvent of some maximally
/// monotone operator; only `t = 1` is available.
#[derive(Clone)]
pub struct DouglasRachford {
    a: Arc<dyn ProxMap>,
    b: Arc<dyn ProxMap>,
    rho: f64,
}

impl DouglasRachford {
    pub fn new(a: Arc<dyn ProxMap>, b: Arc<dyn ProxMap>, rho: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::Dimension { expected: a.dim(), got: b.dim() });
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(domain("rho must be positive"));
        }
        Ok(Self { a, b, rho })
    }
}

impl ProxMap for DouglasRachford {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn eval(&self, t: f64, v: &Vector) -> Result<Vector> {
        if t != 1.0 {
            return Err(domain("the Douglas-Rachford operator is only available as a unit-step resolvent"));
        }
        check_vector(self.dim(), v)?;
        super::dr_operator(self.a.as_ref(), self.b.as_ref(), self.rho, v)
    }
    fn label(&self) -> &str {
        "douglas_rachford"
    }
}

/// The Yosida approximation `Ã = I − J_A` of a base operator. As a
/// [`ProxMap`] it evaluates the resolvent of `Ã` in closed form.
#[derive(Clone)]
pub struct Yosida {
    base: Arc<dyn ProxMap>,
}

impl Yosida {
    pub fn new(base: Arc<dyn ProxMap>) -> Self {
        Self { base }
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        super::yosida_apply(self.base.as_ref(), x)
    }

    pub fn base(&self) -> &dyn ProxMap {
        self.base.as_ref()
    }
}

impl ProxMap for Yosida {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, t: f64, v: &Vector) -> Result<Vector> {
        resolvent_of_yosida(self.base.as_ref(), t, v)
    }
    fn label(&self) -> &str {
        "yosida"
    }
}
