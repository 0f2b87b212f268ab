use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::{Matrix, Vector};

/// Portable random stream for instance generation.
///
/// Xoshiro256++ seeded with SplitMix64 (`seed_from_u64`). Uniforms take the
/// top 53 bits, `(u >> 11)·2⁻⁵³ ∈ [0, 1)`. Normals use one Box-Muller pair per
/// draw, keeping only the cosine branch:
/// `√(−2 ln(1 − u₁))·cos(2π u₂)`. Matrices are filled row-major.
pub struct Rng {
    inner: Xoshiro256PlusPlus,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { inner: Xoshiro256PlusPlus::seed_from_u64(seed) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn normal_vector(&mut self, n: usize) -> Vector {
        Vector::from_fn(n, |_, _| self.normal())
    }

    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| self.normal()).collect();
        Matrix::from_row_slice(rows, cols, &data)
    }

    /// `count` distinct indices from `0..n` by a partial Fisher-Yates shuffle,
    /// in selection order.
    pub fn sample_indices(&mut self, n: usize, count: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        let count = count.min(n);
        for i in 0..count {
            let j = i + ((self.uniform() * (n - i) as f64) as usize).min(n - i - 1);
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }
}
