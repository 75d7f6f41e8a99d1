//! Fairness-regularized smoothed online convex optimization.
//!
//! An online agent picks an action `x_t` each round, paying a quadratic
//! hitting cost, a quadratic switching cost against `x_{t−1}`, and at the end
//! of the horizon a convex fairness cost `g` of the averaged vector
//! `(1/T) Σ A_t x_t`. The crate provides:
//!
//! - [`model`]: instances, trajectories and exact cost evaluation;
//! - [`geometry`]: boxes, capped simplices and their projections;
//! - [`mirror`]: Bregman divergences and the dual mirror-descent update;
//! - [`solvers`]: per-round subproblems and the offline benchmarks;
//! - [`policies`]: FairOBD and the ROBD, DMD and HitMin baselines, plus the
//!   competitive-ratio constants and additive bounds;
//! - [`adversary`]: adaptive lower-bound games against any online policy;
//! - [`bench`]: trace ingestion, the data-center provisioning experiment and
//!   report emission.
//!
//! Runnable walkthroughs live in `examples/`:
//! `cost_model`, `projections`, `mirror_updates`, `fairobd_episode`,
//! `offline_benchmarks`, `lower_bound_games`, `datacenter_experiment` and
//! `theorem_bounds`.

pub mod adversary;
pub mod bench;
pub mod error;
pub mod geometry;
pub mod mirror;
pub mod model;
pub mod policies;
pub mod solvers;
pub mod synthetic;

pub use error::{Error, Result};
pub use geometry::{BoundingBox, FeasibleSet};
pub use mirror::{DualState, ReferenceFunction, ReferenceKind};
pub use model::{
    fairness_deviation, lipschitz_constant, total_cost, ContextStep, CostBreakdown, Episode, FairnessSpec,
    QuadraticHitting,
};
pub use policies::{run_episode, EpisodeRun, HyperParams, PolicyKind};
pub use solvers::SolveOptions;
