use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};
use crate::Vector;

/// Named auxiliary vectors carried between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    /// Halpern's `y_k`, or the convex SPPA's extrapolated point `y_k`.
    Y,
    /// Halpern's `y_{k−1}`.
    PrevY,
    /// Anchored point `x̃_k` (or `ũ_k`, `λ̃_k`).
    Tilde,
    /// Certified residual of the last step, e.g. `x̃_k − x_k ∈ A(x_k)` or
    /// `∇̃f(x_k)`.
    Residual,
    /// Primal iterate when `x` holds a dual variable (ALM, ADMM).
    Primal,
    /// Second primal block (ADMM's `y_k`).
    Partner,
    /// Douglas-Rachford inner points `J_{ρB}(x̃)` and `J_{ρA}(2u − x̃)`.
    U,
    V,
}

/// Iteration state shared by all steppers.
///
/// `k` is the schedule clock, which restarts reset to zero; `x` holds the
/// variable the proximal point method acts on (for dual methods that is the
/// multiplier) and `z` the symplectic partner.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub k: usize,
    pub x: Vector,
    pub z: Vector,
    pub aux: BTreeMap<Slot, Vector>,
}

impl SolverState {
    /// `k = 0`, `z₀ = x₀`.
    pub fn new(x0: Vector) -> Self {
        Self { k: 0, z: x0.clone(), x: x0, aux: BTreeMap::new() }
    }

    pub fn with_aux(mut self, slot: Slot, v: Vector) -> Self {
        self.aux.insert(slot, v);
        self
    }

    pub fn aux(&self, slot: Slot) -> Option<&Vector> {
        self.aux.get(&slot)
    }

    pub(crate) fn require(&self, slot: Slot) -> Result<&Vector> {
        self.aux.get(&slot).ok_or_else(|| domain(format!("state is missing auxiliary slot {slot:?}")))
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Checks that `x` and `z` agree in dimension.
    pub fn check(&self) -> Result<()> {
        if self.x.len() != self.z.len() {
            return Err(Error::Dimension { expected: self.x.len(), got: self.z.len() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamMode {
    /// `0 < C ≤ 1`, `r ≥ 2`: the rate envelopes are asserted.
    Guarantee,
    /// Any positive `C`, `r`; rates are logged but never asserted.
    Exploratory,
}

/// Parameters `(C, r)` of the monotone symplectic methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneParams {
    pub c: f64,
    pub r: f64,
    pub mode: ParamMode,
}

impl MonotoneParams {
    pub fn guarantee(c: f64, r: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0 && r >= 2.0 && r.is_finite()) {
            return Err(domain(format!("guarantee mode needs 0 < C ≤ 1 and r ≥ 2, got C={c}, r={r}")));
        }
        Ok(Self { c, r, mode: ParamMode::Guarantee })
    }

    pub fn exploratory(c: f64, r: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && r > 0.0 && r.is_finite()) {
            return Err(domain(format!("C and r must be positive, got C={c}, r={r}")));
        }
        Ok(Self { c, r, mode: ParamMode::Exploratory })
    }

    /// Guarantee mode when the parameters allow it, exploratory otherwise.
    pub fn auto(c: f64, r: f64) -> Result<Self> {
        Self::guarantee(c, r).or_else(|_| Self::exploratory(c, r))
    }

    pub fn armed(&self) -> bool {
        self.mode == ParamMode::Guarantee
    }

    /// Anchor weight `r/(k+r)` on `z_k`.
    pub fn anchor_weight(&self, k: usize) -> f64 {
        self.r / (k as f64 + self.r)
    }

    /// `(r³−r²)d₀ / (Ck[k+3r−C(k+1)])`, the residual envelope.
    pub fn residual_envelope(&self, k: usize, d0: f64) -> f64 {
        let (c, r, k) = (self.c, self.r, k as f64);
        (r.powi(3) - r * r) * d0 / (c * k * (k + 3.0 * r - c * (k + 1.0)))
    }

    /// `(r³−r²)d₀ / (Ck[k+r−C(k+1)])`, the envelope the Lyapunov argument
    /// supports for general (non-cocoercive) monotone operators.
    pub fn residual_envelope_weak(&self, k: usize, d0: f64) -> f64 {
        let (c, r, k) = (self.c, self.r, k as f64);
        (r.powi(3) - r * r) * d0 / (c * k * (k + r - c * (k + 1.0)))
    }

    /// `(r³−r²)d₀ / (2Crk)`, the envelope for `⟨g_k, x_k − x*⟩`.
    pub fn inner_envelope(&self, k: usize, d0: f64) -> f64 {
        let (c, r, k) = (self.c, self.r, k as f64);
        (r.powi(3) - r * r) * d0 / (2.0 * c * r * k)
    }
}
