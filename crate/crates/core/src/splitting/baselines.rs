use std::fmt;
use std::str::FromStr;

use super::{admm_step, alm_step, dr_step, pdhg_step, AdmmProblem, EqualityConstrainedProblem, SaddleProblem};
use crate::error::{domain, Error, Result};
use crate::operators::ProxMap;
use crate::solvers::{halpern_step, ppa_convex_step, SolverState};

/// The classical methods the symplectic variants are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    Ppa,
    Alm,
    Dr,
    Admm,
    Pdhg,
    Halpern,
}

impl Baseline {
    pub const ALL: [Baseline; 6] =
        [Baseline::Ppa, Baseline::Alm, Baseline::Dr, Baseline::Admm, Baseline::Pdhg, Baseline::Halpern];

    pub fn as_str(self) -> &'static str {
        match self {
            Baseline::Ppa => "ppa",
            Baseline::Alm => "alm",
            Baseline::Dr => "dr",
            Baseline::Admm => "admm",
            Baseline::Pdhg => "pdhg",
            Baseline::Halpern => "halpern",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL.into_iter().find(|b| b.as_str() == s).ok_or_else(|| domain(format!("unknown baseline `{s}`")))
    }
}

/// What a baseline acts on.
#[derive(Clone, Copy)]
pub enum BaselineProblem<'a> {
    /// A resolvent with its step (PPA uses `c`, Halpern uses `J` as given).
    Resolvent {
        res: &'a dyn ProxMap,
        c: f64,
    },
    Equality {
        problem: &'a EqualityConstrainedProblem,
        rho: f64,
    },
    Splitting {
        res_a: &'a dyn ProxMap,
        res_b: &'a dyn ProxMap,
        rho: f64,
    },
    Admm(&'a AdmmProblem),
    Saddle(&'a SaddleProblem),
}

/// One step of the named classical method.
pub fn baseline_step(kind: Baseline, problem: BaselineProblem<'_>, state: &SolverState) -> Result<SolverState> {
    match (kind, problem) {
        (Baseline::Ppa, BaselineProblem::Resolvent { res, c }) => ppa_convex_step(res, c, state),
        (Baseline::Halpern, BaselineProblem::Resolvent { res, .. }) => halpern_step(res, state),
        (Baseline::Alm, BaselineProblem::Equality { problem, rho }) => alm_step(problem, rho, state),
        (Baseline::Dr, BaselineProblem::Splitting { res_a, res_b, rho }) => dr_step(res_a, res_b, rho, state),
        (Baseline::Admm, BaselineProblem::Admm(p)) => admm_step(p, state),
        (Baseline::Pdhg, BaselineProblem::Saddle(p)) => pdhg_step(p, state),
        (kind, _) => Err(domain(format!("baseline `{kind}` does not apply to this problem"))),
    }
}
