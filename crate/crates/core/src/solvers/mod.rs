//! Iteration kernels: plain and Halpern-accelerated PPA, the symplectic
//! steppers for convex functions and monotone operators, discrete Lyapunov
//! functions, monitors and a run loop with restarts.

mod lyapunov;
mod monitors;
mod run;
mod state;
mod steps;

pub use lyapunov::{
    lyapunov_convex, lyapunov_monotone, lyapunov_ppa_convex, lyapunov_ppa_monotone, MonotoneLyapunov, NEGATIVE_GAP_TOL,
};
pub use monitors::{
    ConvexSppaMonitor, Envelope, MonotoneMonitor, Objective, PpaConvexMonitor, PpaMonotoneMonitor, LYAPUNOV_RTOL,
};
pub use run::{run, Check, CheckStats, InvariantSummary, Monitor, RunOutput, Stepper, TraceRecord};
pub use state::{MonotoneParams, ParamMode, Slot, SolverState};
pub use steps::{
    halpern_step, ppa_convex_step, sppa_convex_step, sppa_monotone_step, sppa_yosida_step, yosida_constant_a,
    HalpernStepper, PpaStepper, SppaConvexStepper, SppaMonotoneStepper, SppaYosidaStepper,
};
