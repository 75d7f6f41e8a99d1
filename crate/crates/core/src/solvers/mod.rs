//! Per-round primal solves and full-horizon offline benchmarks.

mod offline;
mod per_round;

pub use offline::{solve_fair_opt, solve_offline_opt, OfflineSolution};
pub use per_round::{
    hitting_minimizer, solve_auxiliary, solve_per_round, PerRoundProblem, RoundSolution,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Step `1/Lip` with `Lip` the curvature of the objective.
    Fixed,
    /// Halve from `initial` until the quadratic upper model holds.
    Backtracking { initial: f64 },
}

/// How the per-round action subproblem is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimalMethod {
    /// The objective is an isotropic quadratic plus a linear term, so the
    /// minimizer is a single projection.
    ClosedForm,
    /// Projected gradient iterations governed by `step_rule`.
    ProjectedGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OfflineMethod {
    /// Operator splitting on the stacked trajectory.
    Admm,
    /// Normalized projected subgradient with best-iterate tracking.
    Subgradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Bound on the projected-gradient mapping norm of per-round solutions.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub step_rule: StepRule,
    /// Seeds the starting point of the offline restart.
    pub seed: u64,
    pub primal: PrimalMethod,
    /// Cap on golden-section iterations of the budget subproblem for
    /// `1 < p < ∞`.
    pub aux_iters: usize,
    pub offline: OfflineMethod,
    pub offline_max_iters: usize,
    /// Relative stopping tolerance of the offline solver.
    pub offline_tol: f64,
    /// Run a second, differently started offline solve and compare.
    pub offline_restart: bool,
    /// Relative disagreement between restarts that triggers a warning.
    pub restart_agreement: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            grad_tol: 1e-8,
            max_iters: 10_000,
            step_rule: StepRule::Backtracking { initial: 1.0 },
            seed: 0,
            primal: PrimalMethod::ClosedForm,
            aux_iters: 500,
            offline: OfflineMethod::Admm,
            offline_max_iters: 20_000,
            offline_tol: 1e-7,
            offline_restart: true,
            restart_agreement: 5e-3,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) || !(self.offline_tol > 0.0) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        if self.max_iters == 0 || self.offline_max_iters == 0 || self.aux_iters == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        if let StepRule::Backtracking { initial } = self.step_rule {
            if !(initial > 0.0) {
                return Err(Error::Config("initial backtracking step must be positive".into()));
            }
        }
        if !(self.restart_agreement >= 0.0) {
            return Err(Error::Config("restart agreement must be nonnegative".into()));
        }
        Ok(())
    }
}
