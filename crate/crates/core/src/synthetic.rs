//! Seeded instance generators.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::model::{ContextStep, Episode, FairnessSpec, QuadraticHitting};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetFamily {
    /// `{x : Σx = w_t, 0 ≤ x ≤ caps}` with a random total each round.
    CappedSimplex,
    /// `[0, 1]^N`.
    UnitBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub action_dim: usize,
    pub fairness_dim: usize,
    pub horizon: usize,
    /// Range of the hitting curvature, drawn once per instance.
    pub curvature: (f64, f64),
    pub switching: (f64, f64),
    pub weight: (f64, f64),
    #[serde(with = "crate::model::norm_order")]
    pub p: f64,
    pub sets: SetFamily,
    /// Scale of the nonnegative linear hitting term.
    pub linear_scale: f64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec {
            action_dim: 7,
            fairness_dim: 7,
            horizon: 72,
            curvature: (1.0, 40.0),
            switching: (0.0, 2000.0),
            weight: (0.5, 5.0),
            p: f64::INFINITY,
            sets: SetFamily::CappedSimplex,
            linear_scale: 1.0,
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    if range.1 > range.0 {
        rng.random_range(range.0..range.1)
    } else {
        range.0
    }
}

fn random_round(rng: &mut ChaCha8Rng, spec: &InstanceSpec, curvature: f64, caps: &DVector<f64>) -> (ContextStep, FeasibleSet) {
    let n = spec.action_dim;
    let center = DVector::from_fn(n, |_, _| rng.random_range(0.0..1.0));
    let linear = DVector::from_fn(n, |_, _| spec.linear_scale * rng.random_range(0.0..1.0));
    let matrix = DMatrix::from_fn(spec.fairness_dim, n, |_, _| rng.random_range(0.0..1.0));
    let set = match spec.sets {
        SetFamily::CappedSimplex => {
            let total = caps.sum() * rng.random_range(0.2..0.8);
            FeasibleSet::capped_simplex(total, caps.clone())
        }
        SetFamily::UnitBox => FeasibleSet::unit_box(n),
    };
    let hitting = QuadraticHitting {
        center,
        curvature,
        linear,
        offset: 0.0,
    };
    (ContextStep::new(hitting, matrix), set)
}

fn check(spec: &InstanceSpec) -> Result<()> {
    if spec.action_dim == 0 || spec.fairness_dim == 0 || spec.horizon == 0 {
        return Err(Error::Config("instance dimensions and horizon must be positive".into()));
    }
    if spec.curvature.0 < 0.0 || spec.switching.0 < 0.0 || spec.weight.0 < 0.0 || spec.linear_scale < 0.0 {
        return Err(Error::Config("instance ranges must be nonnegative".into()));
    }
    Ok(())
}

fn assemble(
    rng: &mut ChaCha8Rng,
    spec: &InstanceSpec,
    steps: Vec<ContextStep>,
    sets: Vec<FeasibleSet>,
    beta1: f64,
) -> Result<Episode> {
    let n = spec.action_dim;
    let guess = DVector::from_fn(n, |_, _| rng.random_range(0.0..1.0));
    let x0 = sets[0].project(&guess)?;
    let weight = draw(rng, spec.weight);
    Episode::new(steps, x0, beta1, FairnessSpec::new(weight, spec.p)?, sets)
}

/// Independent rounds with one curvature and switching weight per instance.
pub fn random_instance(spec: &InstanceSpec, seed: u64) -> Result<Episode> {
    check(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let curvature = draw(&mut rng, spec.curvature);
    let beta1 = draw(&mut rng, spec.switching);
    let caps = DVector::from_fn(spec.action_dim, |_, _| rng.random_range(0.5..1.5));
    let (steps, sets) = (0..spec.horizon).map(|_| random_round(&mut rng, spec, curvature, &caps)).unzip();
    assemble(&mut rng, spec, steps, sets, beta1)
}

/// Rounds that repeat with the given period. `spec.horizon` need not be a
/// multiple of the period.
pub fn periodic_instance(spec: &InstanceSpec, period: usize, seed: u64) -> Result<Episode> {
    check(spec)?;
    if period == 0 {
        return Err(Error::Config("period must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let curvature = draw(&mut rng, spec.curvature);
    let beta1 = draw(&mut rng, spec.switching);
    let caps = DVector::from_fn(spec.action_dim, |_, _| rng.random_range(0.5..1.5));
    let base: Vec<(ContextStep, FeasibleSet)> =
        (0..period).map(|_| random_round(&mut rng, spec, curvature, &caps)).collect();
    let (steps, sets) = (0..spec.horizon).map(|t| base[t % period].clone()).unzip();
    assemble(&mut rng, spec, steps, sets, beta1)
}
