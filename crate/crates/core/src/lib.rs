//! Symplectic proximal point algorithms.
//!
//! The crate is organised bottom-up:
//!
//! * [`operators`]: proximal maps, resolvents, the Yosida approximation,
//!   the Douglas-Rachford operator and a FISTA subproblem solver.
//! * [`schedules`]: the parameter sequences `(A_k, a_k, b_k, c_k)` driving the
//!   convex SPPA, with validity checks, plus their continuous counterparts.
//! * [`solvers`]: PPA, Halpern-accelerated PPA and the symplectic steppers,
//!   discrete Lyapunov monitors and a run loop with restarts.
//! * [`splitting`]: symplectic ALM, Douglas-Rachford, ADMM and PDHG together
//!   with their classical baselines.
//! * [`ode_lab`]: integrators for the continuous-time systems and their
//!   Lyapunov monitors.
//! * [`problems`]: seeded benchmark instances, reference solutions and a
//!   plain-text instance format.

pub mod error;
pub mod ode_lab;
pub mod operators;
pub mod problems;
pub mod schedules;
pub mod solvers;
pub mod splitting;

pub use error::{Error, Result};

/// Dense real vector used throughout.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix used throughout.
pub type Matrix = nalgebra::DMatrix<f64>;

pub(crate) fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}
