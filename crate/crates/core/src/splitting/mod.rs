//! Splitting methods built on the symplectic proximal point steps: ALM,
//! Douglas-Rachford, ADMM and primal-dual hybrid gradient, each with its
//! classical counterpart.

mod admm;
mod baselines;
mod dr;
pub mod instances;
mod pdhg;
mod salm;

pub use admm::{
    admm_step, constraint_residual_sq, sadmm_step, sadmm_step_v2, AdmmOracle, AdmmProblem, AdmmStepper, Block, FusedF,
    FusedG, ProxBlock, SadmmStepper, SadmmV2Stepper,
};
pub use baselines::{baseline_step, Baseline, BaselineProblem};
pub use dr::{dr_step, sdr_step, SdrStepper};
pub use pdhg::{pdhg_step, spdhg_step, PdhgStepper, SaddleProblem, SpdhgStepper};
pub use salm::{
    alm_step, salm_generic_step, salm_step, AlmMonitor, AlmOracle, EqualityConstrainedProblem, EqualityPerturbation,
    LassoSplit, PerturbationOracle, QuadraticL1Split, QuadraticObjective, SalmStepper,
};
