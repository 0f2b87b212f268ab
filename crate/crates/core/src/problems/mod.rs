//! Seeded benchmark instances, reference solutions and a plain-text
//! instance format.
//!
//! Every generator is a pure function of its dimensions, parameters and seed;
//! see [`Rng`] for the exact random stream.

mod io;
mod reference;
mod rng;

pub use io::{load_instance, parse_instance, save_instance, write_instance};
pub use reference::{reference_solution, Budget, ReferenceSolution};
pub use rng::Rng;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Lasso,
    BasisPursuit,
    FusedLasso,
    MatrixGame,
    QuadraticL1,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Lasso => "lasso",
            Kind::BasisPursuit => "basis_pursuit",
            Kind::FusedLasso => "fused_lasso",
            Kind::MatrixGame => "matrix_game",
            Kind::QuadraticL1 => "quadratic_l1",
        }
    }

    /// Named matrices, vectors and parameters each kind must carry.
    fn layout(self) -> (&'static [&'static str], &'static [&'static str], &'static [&'static str]) {
        match self {
            Kind::Lasso => (&["A"], &["b", "x_planted"], &["mu"]),
            Kind::BasisPursuit => (&["A"], &["b", "x_planted"], &[]),
            Kind::FusedLasso => (&["A", "D"], &["b", "x_planted"], &["mu1", "mu2"]),
            Kind::MatrixGame => (&["A"], &["a", "b"], &["norm_a"]),
            Kind::QuadraticL1 => (&[], &["d", "a"], &["mu"]),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lasso" => Kind::Lasso,
            "basis_pursuit" => Kind::BasisPursuit,
            "fused_lasso" => Kind::FusedLasso,
            "matrix_game" => Kind::MatrixGame,
            "quadratic_l1" => Kind::QuadraticL1,
            other => return Err(domain(format!("unknown problem kind `{other}`"))),
        })
    }
}

/// A benchmark instance: named dense blocks plus scalar parameters.
///
/// | kind | matrices | vectors | params |
/// |---|---|---|---|
/// | lasso | `A` (m×n) | `b`, `x_planted` | `mu` |
/// | basis_pursuit | `A` (m×n) | `b`, `x_planted` | |
/// | fused_lasso | `A` (m×n), `D` ((n−1)×n) | `b`, `x_planted` | `mu1`, `mu2` |
/// | matrix_game | `A` (m×n) | `a` (m), `b` (n) | `norm_a` |
/// | quadratic_l1 | | `d`, `a` (n) | `mu` |
///
/// For `quadratic_l1`, `m = n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub kind: Kind,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub params: BTreeMap<String, f64>,
    pub matrices: BTreeMap<String, Matrix>,
    pub vectors: BTreeMap<String, Vector>,
}

impl ProblemInstance {
    fn empty(kind: Kind, seed: u64, m: usize, n: usize) -> Self {
        Self { kind, seed, m, n, params: BTreeMap::new(), matrices: BTreeMap::new(), vectors: BTreeMap::new() }
    }

    pub fn matrix(&self, name: &str) -> Result<&Matrix> {
        self.matrices.get(name).ok_or_else(|| domain(format!("{} instance has no matrix `{name}`", self.kind)))
    }

    pub fn vector(&self, name: &str) -> Result<&Vector> {
        self.vectors.get(name).ok_or_else(|| domain(format!("{} instance has no vector `{name}`", self.kind)))
    }

    pub fn param(&self, name: &str) -> Result<f64> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| domain(format!("{} instance has no parameter `{name}`", self.kind)))
    }

    /// Checks that the blocks required by the kind exist and agree with
    /// `(m, n)`.
    pub fn validate(&self) -> Result<()> {
        let (mats, vecs, params) = self.kind.layout();
        for name in mats {
            self.matrix(name)?;
        }
        for name in vecs {
            self.vector(name)?;
        }
        for name in params {
            let v = self.param(name)?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(domain(format!("parameter {name} must be finite and nonnegative, got {v}")));
            }
        }
        let shape = |name: &str, r: usize, c: usize| -> Result<()> {
            let a = self.matrix(name)?;
            if a.nrows() != r {
                return Err(Error::Dimension { expected: r, got: a.nrows() });
            }
            if a.ncols() != c {
                return Err(Error::Dimension { expected: c, got: a.ncols() });
            }
            Ok(())
        };
        let len = |name: &str, n: usize| -> Result<()> {
            let v = self.vector(name)?;
            if v.len() != n {
                return Err(Error::Dimension { expected: n, got: v.len() });
            }
            Ok(())
        };
        let (m, n) = (self.m, self.n);
        match self.kind {
            Kind::Lasso | Kind::BasisPursuit => {
                shape("A", m, n)?;
                len("b", m)?;
                len("x_planted", n)?;
            }
            Kind::FusedLasso => {
                shape("A", m, n)?;
                shape("D", n - 1, n)?;
                len("b", m)?;
                len("x_planted", n)?;
            }
            Kind::MatrixGame => {
                shape("A", m, n)?;
                len("a", m)?;
                len("b", n)?;
            }
            Kind::QuadraticL1 => {
                if m != n {
                    return Err(Error::Dimension { expected: n, got: m });
                }
                len("d", n)?;
                len("a", n)?;
                if self.vector("d")?.iter().any(|&d| !(d > 0.0)) {
                    return Err(domain("quadratic weights d must be positive"));
                }
            }
        }
        Ok(())
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(domain(format!("dimensions must be positive, got {m}×{n}")));
    }
    Ok(())
}

fn check_weight(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(domain(format!("{name} must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

/// Planted `⌈n/10⌉`-sparse vector with standard normal nonzeros.
fn planted_sparse(rng: &mut Rng, n: usize) -> Vector {
    let mut x = Vector::zeros(n);
    for i in rng.sample_indices(n, n.div_ceil(10)) {
        x[i] = rng.normal();
    }
    x
}

/// Adds noise of level `0.01‖b‖/√m` to `b`.
fn add_noise(rng: &mut Rng, b: Vector) -> Vector {
    let sigma = 0.01 * b.norm() / (b.len() as f64).sqrt();
    let noise = rng.normal_vector(b.len());
    b + noise * sigma
}

/// `min ½‖Ax − b‖² + μ‖x‖₁` with i.i.d. standard normal `A`, a planted
/// `⌈n/10⌉`-sparse signal and noise level `0.01‖Ax_s‖/√m`.
pub fn gen_lasso(m: usize, n: usize, seed: u64, mu: f64) -> Result<ProblemInstance> {
    check_dims(m, n)?;
    check_weight("mu", mu)?;
    let mut rng = Rng::new(seed);
    let a = rng.normal_matrix(m, n);
    let xs = planted_sparse(&mut rng, n);
    let b = add_noise(&mut rng, &a * &xs);
    let mut p = ProblemInstance::empty(Kind::Lasso, seed, m, n);
    p.params.insert("mu".into(), mu);
    p.matrices.insert("A".into(), a);
    p.vectors.insert("b".into(), b);
    p.vectors.insert("x_planted".into(), xs);
    Ok(p)
}

/// `min ‖x‖₁ s.t. Ax = b` with `b = Ax_s` for a planted `⌈n/10⌉`-sparse
/// `x_s` (no noise, so the planted point is feasible).
pub fn gen_basis_pursuit(m: usize, n: usize, seed: u64) -> Result<ProblemInstance> {
    check_dims(m, n)?;
    if m >= n {
        return Err(domain(format!("basis pursuit needs m < n, got {m}×{n}")));
    }
    let mut rng = Rng::new(seed);
    let a = rng.normal_matrix(m, n);
    let xs = planted_sparse(&mut rng, n);
    let b = &a * &xs;
    let mut p = ProblemInstance::empty(Kind::BasisPursuit, seed, m, n);
    p.matrices.insert("A".into(), a);
    p.vectors.insert("b".into(), b);
    p.vectors.insert("x_planted".into(), xs);
    Ok(p)
}

/// First-difference matrix with rows `e_i − e_{i+1}`, shape `(n−1)×n`.
pub fn difference_matrix(n: usize) -> Matrix {
    let mut d = Matrix::zeros(n.saturating_sub(1), n);
    for i in 0..n.saturating_sub(1) {
        d[(i, i)] = 1.0;
        d[(i, i + 1)] = -1.0;
    }
    d
}

/// `min ½‖Ax − b‖² + μ₁‖x‖₁ + μ₂‖Dx‖₁`. The planted signal is piecewise
/// constant on blocks of 20 entries, each block active with probability 0.3
/// at a standard normal level (one block is forced on if none is drawn);
/// noise as in [`gen_lasso`].
pub fn gen_fused_lasso(m: usize, n: usize, seed: u64, mu1: f64, mu2: f64) -> Result<ProblemInstance> {
    check_dims(m, n)?;
    if n < 2 {
        return Err(domain("fused LASSO needs n ≥ 2"));
    }
    check_weight("mu1", mu1)?;
    check_weight("mu2", mu2)?;
    let mut rng = Rng::new(seed);
    let a = rng.normal_matrix(m, n);
    let mut xs = Vector::zeros(n);
    let fill = |xs: &mut Vector, start: usize, level: f64| {
        for i in start..(start + 20).min(n) {
            xs[i] = level;
        }
    };
    for start in (0..n).step_by(20) {
        if rng.uniform() < 0.3 {
            let level = rng.normal();
            fill(&mut xs, start, level);
        }
    }
    if xs.iter().all(|&v| v == 0.0) {
        // An all-zero signal would make b = 0 and the instance trivial.
        let blocks = n.div_ceil(20);
        let start = 20 * ((rng.uniform() * blocks as f64) as usize).min(blocks - 1);
        let level = rng.normal();
        fill(&mut xs, start, level);
    }
    let b = add_noise(&mut rng, &a * &xs);
    let mut p = ProblemInstance::empty(Kind::FusedLasso, seed, m, n);
    p.params.insert("mu1".into(), mu1);
    p.params.insert("mu2".into(), mu2);
    p.matrices.insert("A".into(), a);
    p.matrices.insert("D".into(), difference_matrix(n));
    p.vectors.insert("b".into(), b);
    p.vectors.insert("x_planted".into(), xs);
    Ok(p)
}

/// Largest singular value.
pub fn spectral_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// `min_{x∈Δ_m} max_{y∈Δ_n} ⟨a, x⟩ + ⟨x, Ay⟩ − ⟨b, y⟩` with standard normal
/// data; stores `‖A‖` as `norm_a`.
pub fn gen_matrix_game(m: usize, n: usize, seed: u64) -> Result<ProblemInstance> {
    check_dims(m, n)?;
    let mut rng = Rng::new(seed);
    let a_mat = rng.normal_matrix(m, n);
    let a = rng.normal_vector(m);
    let b = rng.normal_vector(n);
    let mut p = ProblemInstance::empty(Kind::MatrixGame, seed, m, n);
    p.params.insert("norm_a".into(), spectral_norm(&a_mat));
    p.matrices.insert("A".into(), a_mat);
    p.vectors.insert("a".into(), a);
    p.vectors.insert("b".into(), b);
    Ok(p)
}

/// Separable `f(x) = ½Σ d_i(x_i − a_i)² + μ‖x‖₁` with `d_i` uniform on
/// `[0.5, 2]` and `a_i = 2·N(0,1)`. Prox, minimiser and optimal value are
/// closed form, which makes it the certified instance for rate suites.
pub fn gen_quadratic_l1(n: usize, seed: u64, mu: f64) -> Result<ProblemInstance> {
    check_dims(n, n)?;
    check_weight("mu", mu)?;
    let mut rng = Rng::new(seed);
    let d = Vector::from_fn(n, |_, _| 0.5 + 1.5 * rng.uniform());
    let a = rng.normal_vector(n) * 2.0;
    let mut p = ProblemInstance::empty(Kind::QuadraticL1, seed, n, n);
    p.params.insert("mu".into(), mu);
    p.vectors.insert("d".into(), d);
    p.vectors.insert("a".into(), a);
    Ok(p)
}

/// The fused LASSO preset weights `(μ₁, μ₂) = (5, 10)`.
pub const FUSED_PRESET_WEIGHTS: (f64, f64) = (5.0, 10.0);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lasso_shapes_and_determinism() {
        let p = gen_lasso(100, 200, 42, 1.0).unwrap();
        assert_eq!(p.matrix("A").unwrap().shape(), (100, 200));
        assert_eq!(p.vector("b").unwrap().len(), 100);
        assert_eq!(p.vector("x_planted").unwrap().iter().filter(|v| **v != 0.0).count(), 20);
        assert_eq!(p, gen_lasso(100, 200, 42, 1.0).unwrap());
        assert_ne!(p, gen_lasso(100, 200, 43, 1.0).unwrap());
        assert!(p.validate().is_ok());
        assert!(gen_lasso(10, 20, 1, 0.0).is_ok());
        assert!(gen_lasso(0, 20, 1, 1.0).is_err());
        assert!(gen_lasso(10, 20, 1, -1.0).is_err());
    }

    #[test]
    fn lasso_noise_level() {
        let p = gen_lasso(100, 200, 42, 1.0).unwrap();
        let clean = p.matrix("A").unwrap() * p.vector("x_planted").unwrap();
        let noise = p.vector("b").unwrap() - &clean;
        let sigma = 0.01 * clean.norm() / 10.0;
        let rms = noise.norm() / 10.0;
        assert!(rms > 0.5 * sigma && rms < 1.5 * sigma);
    }

    #[test]
    fn basis_pursuit_is_feasible() {
        let p = gen_basis_pursuit(100, 200, 7).unwrap();
        assert_eq!(p.matrix("A").unwrap().shape(), (100, 200));
        let r = p.matrix("A").unwrap() * p.vector("x_planted").unwrap() - p.vector("b").unwrap();
        assert!(r.amax() <= 1e-12);
        assert_eq!(p, gen_basis_pursuit(100, 200, 7).unwrap());
        assert!(gen_basis_pursuit(200, 200, 7).is_err());
        assert!(gen_basis_pursuit(300, 200, 7).is_err());
    }

    #[test]
    fn fused_lasso_signal_is_never_empty() {
        // Seed 42 draws no active block at n = 200.
        for seed in [42, 0, 1, 2, 3] {
            let p = gen_fused_lasso(30, 200, seed, 5.0, 10.0).unwrap();
            assert!(p.vector("x_planted").unwrap().amax() > 0.0, "seed {seed}");
            assert!(p.vector("b").unwrap().norm() > 0.0, "seed {seed}");
        }
    }

    #[test]
    fn fused_lasso_difference_matrix() {
        let (mu1, mu2) = FUSED_PRESET_WEIGHTS;
        let p = gen_fused_lasso(100, 200, 3, mu1, mu2).unwrap();
        let d = p.matrix("D").unwrap();
        assert_eq!(d.shape(), (199, 200));
        for i in 0..199 {
            assert_eq!(d.row(i).sum(), 0.0);
            assert_eq!((d[(i, i)], d[(i, i + 1)]), (1.0, -1.0));
            assert_eq!(d.row(i).iter().filter(|v| **v != 0.0).count(), 2);
        }
        assert_eq!((p.param("mu1").unwrap(), p.param("mu2").unwrap()), (5.0, 10.0));
        assert_eq!(p, gen_fused_lasso(100, 200, 3, 5.0, 10.0).unwrap());
        assert!(gen_fused_lasso(10, 1, 3, 5.0, 10.0).is_err());
        // Piecewise constant on blocks of 20.
        let xs = p.vector("x_planted").unwrap();
        for b in 0..10 {
            assert!((0..20).all(|i| xs[20 * b + i] == xs[20 * b]));
        }
    }

    fn power_iteration(a: &Matrix) -> f64 {
        let ata = a.transpose() * a;
        let mut v = Vector::from_element(a.ncols(), 1.0);
        let mut lambda = 0.0;
        for _ in 0..20_000 {
            let w = &ata * &v;
            let next = w.norm();
            v = w / next;
            if (next - lambda).abs() <= 1e-15 * next {
                break;
            }
            lambda = next;
        }
        lambda.sqrt()
    }

    #[test]
    fn matrix_game_norm() {
        let p = gen_matrix_game(50, 50, 11).unwrap();
        let norm = p.param("norm_a").unwrap();
        assert!((norm - power_iteration(p.matrix("A").unwrap())).abs() < 1e-8);
        assert_eq!(p, gen_matrix_game(50, 50, 11).unwrap());
        let one = gen_matrix_game(1, 1, 1).unwrap();
        assert_eq!(one.param("norm_a").unwrap(), one.matrix("A").unwrap()[(0, 0)].abs());
    }

    #[test]
    fn quadratic_l1_ranges() {
        let p = gen_quadratic_l1(50, 5, 1.0).unwrap();
        assert!(p.vector("d").unwrap().iter().all(|&d| (0.5..2.0).contains(&d)));
        assert!(p.validate().is_ok());
        assert_eq!(p, gen_quadratic_l1(50, 5, 1.0).unwrap());
    }

    #[test]
    fn validate_catches_shape_errors() {
        let mut p = gen_lasso(5, 8, 1, 1.0).unwrap();
        p.m = 6;
        assert!(matches!(p.validate(), Err(Error::Dimension { .. })));
        let mut q = gen_lasso(5, 8, 1, 1.0).unwrap();
        q.params.remove("mu");
        assert!(q.validate().is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in [Kind::Lasso, Kind::BasisPursuit, Kind::FusedLasso, Kind::MatrixGame, Kind::QuadraticL1] {
            assert_eq!(k.as_str().parse::<Kind>().unwrap(), k);
        }
        assert!("ridge".parse::<Kind>().is_err());
    }
}
