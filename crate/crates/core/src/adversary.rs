//! Adaptive lower-bound games.
//!
//! The adversary plays a scalar instance against any online policy. After the
//! first half of the horizon it inspects the actions the policy emitted and
//! commits to whichever continuation hurts that policy more, then reports a
//! certified lower bound on the policy's regret or competitive ratio. The
//! offline side of each certificate is an explicit upper bound on the
//! optimal cost, so the certificate never overstates the true gap.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, FeasibleSet};
use crate::model::{total_cost, ContextStep, Episode, FairnessSpec, QuadraticHitting};
use crate::policies::{EpisodeMeta, HyperParams, Policy, PolicyKind};
use crate::solvers::SolveOptions;

/// Tolerance on actions in the action set, and on first-half deviation from
/// the target in the ratio game.
pub const GAME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Regret,
    Cr,
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameKind::Regret => "regret",
            GameKind::Cr => "cr",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub horizon: usize,
    pub m0: f64,
    pub policy: PolicyKind,
    pub hyper: HyperParams,
    pub opts: SolveOptions,
}

impl GameConfig {
    /// Default settings: balanced weights for curvature `m0` without
    /// switching, `η = T^{−1/3}` and `κ₁ = 0`.
    pub fn new(policy: PolicyKind, horizon: usize, m0: f64) -> Result<Self> {
        Ok(GameConfig {
            horizon,
            m0,
            policy,
            hyper: HyperParams::theorem(m0, 0.0)?,
            opts: SolveOptions::default(),
        })
    }

    fn validate(&self, kind: GameKind) -> Result<()> {
        if self.horizon == 0 || !self.horizon.is_multiple_of(2) {
            return Err(Error::Config(format!("game horizon must be even and positive, got {}", self.horizon)));
        }
        let floor = match kind {
            GameKind::Regret => 1.5,
            GameKind::Cr => 1.0,
        };
        if !(self.m0 > floor) || !self.m0.is_finite() {
            return Err(Error::Config(format!("{kind} game needs m0 > {floor}, got {}", self.m0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GameResult {
    pub game: GameKind,
    pub policy: PolicyKind,
    pub horizon: usize,
    pub m0: f64,
    pub online_cost: f64,
    /// Upper bound on the optimal offline cost of the revealed instance.
    pub offline_cost_bound: f64,
    /// `online − offline_bound` (regret) or `online / offline_bound` (ratio,
    /// infinite when the offline cost is zero).
    pub certified: f64,
    pub theoretical_bound: f64,
    pub chosen_option: u8,
    /// Average first-half action `(2/T) Σ_{t ≤ T/2} x_t`.
    pub s_dagger: f64,
    /// Largest first-half distance from the target action (ratio game).
    pub max_deviation: Option<f64>,
    /// Round of the first deviation beyond [`GAME_TOL`] (ratio game).
    pub deviation_round: Option<usize>,
    #[serde(skip)]
    pub episode: Episode,
    #[serde(skip)]
    pub trajectory: Vec<DVector<f64>>,
}

impl GameResult {
    pub fn is_infinite(&self) -> bool {
        self.certified.is_infinite()
    }
}

fn scalar_step(m0: f64, center: f64, a: f64) -> ContextStep {
    ContextStep::new(
        QuadraticHitting::centered(DVector::from_element(1, center), m0),
        DMatrix::from_element(1, 1, a),
    )
}

/// Shared scalar setting of both games: `X = [−1, 1]`, `g = |·|`, no switching.
struct Arena<'a> {
    config: &'a GameConfig,
    set: FeasibleSet,
    fairness: FairnessSpec,
    aux: BoundingBox,
}

impl<'a> Arena<'a> {
    fn new(config: &'a GameConfig) -> Self {
        Arena {
            config,
            set: FeasibleSet::interval(-1.0, 1.0),
            fairness: FairnessSpec { weight: 1.0, p: 1.0 },
            aux: BoundingBox::symmetric(1, 1.0),
        }
    }

    fn policy(&self) -> Result<Policy<'_>> {
        let meta = EpisodeMeta {
            horizon: self.config.horizon,
            beta1: 0.0,
            fairness: &self.fairness,
            aux_box: &self.aux,
        };
        Policy::new(
            self.config.policy,
            self.config.hyper.clone(),
            meta,
            DVector::zeros(1),
            self.config.opts.clone(),
        )
    }

    fn play(&self, policy: &mut Policy<'_>, round: usize, step: &ContextStep) -> Result<f64> {
        let x = policy.act(step, &self.set)?;
        if x.len() != 1 || !x[0].is_finite() || !self.set.is_feasible(&x, GAME_TOL) {
            return Err(Error::GameViolation {
                round,
                detail: format!("action {:?} outside [-1, 1]", x.as_slice()),
            });
        }
        Ok(x[0])
    }

    fn episode(&self, steps: Vec<ContextStep>) -> Result<Episode> {
        let horizon = steps.len();
        Episode::new(steps, DVector::zeros(1), 0.0, self.fairness, vec![self.set.clone(); horizon])?
            .with_aux_box(self.aux.clone())
    }
}

/// Regret game: the first half always shows `c = A = 1`. If the average
/// first-half action stays below `(2m₀−1)/(2m₀)` in magnitude, the second
/// half keeps `c = 1` and flips `A` to `−1`, so the offline optimum is zero;
/// otherwise both drop to 0 and the offline cost is at most `(2m₀−1)/(4m₀)`.
pub fn regret_game(config: &GameConfig) -> Result<GameResult> {
    config.validate(GameKind::Regret)?;
    let arena = Arena::new(config);
    let mut policy = arena.policy()?;
    let (t_len, half, m0) = (config.horizon, config.horizon / 2, config.m0);

    let first = scalar_step(m0, 1.0, 1.0);
    let mut steps = Vec::with_capacity(t_len);
    let mut trajectory = Vec::with_capacity(t_len);
    for round in 1..=half {
        let x = arena.play(&mut policy, round, &first)?;
        steps.push(first.clone());
        trajectory.push(DVector::from_element(1, x));
    }
    let s_dagger = trajectory.iter().map(|x| x[0]).sum::<f64>() / half as f64;
    let threshold = (2.0 * m0 - 1.0) / (2.0 * m0);
    let (option, second, offline_bound) = if s_dagger.abs() < threshold {
        (2, scalar_step(m0, 1.0, -1.0), 0.0)
    } else {
        (1, scalar_step(m0, 0.0, 0.0), (2.0 * m0 - 1.0) / (4.0 * m0))
    };
    for round in half + 1..=t_len {
        let x = arena.play(&mut policy, round, &second)?;
        steps.push(second.clone());
        trajectory.push(DVector::from_element(1, x));
    }
    let episode = arena.episode(steps)?;
    let online = total_cost(&episode, &trajectory)?.total;
    Ok(GameResult {
        game: GameKind::Regret,
        policy: config.policy,
        horizon: t_len,
        m0,
        online_cost: online,
        offline_cost_bound: offline_bound,
        certified: online - offline_bound,
        theoretical_bound: 1.0 / (16.0 * m0),
        chosen_option: option,
        s_dagger,
        max_deviation: None,
        deviation_round: None,
        episode,
        trajectory,
    })
}

/// Competitive-ratio game with target `a = 2/(m₀T)`. The first half shows
/// `c = a`, `A = 1`. Any first-half deviation from `a` is punished by
/// flipping `A` to `−1` with `c = a`, where the offline optimum is zero.
/// Otherwise `c` drops to 0 and `A` stays 1 for one more round.
pub fn cr_game(config: &GameConfig) -> Result<GameResult> {
    config.validate(GameKind::Cr)?;
    let arena = Arena::new(config);
    let mut policy = arena.policy()?;
    let (t_len, half, m0) = (config.horizon, config.horizon / 2, config.m0);
    let a = 2.0 / (m0 * t_len as f64);

    let first = scalar_step(m0, a, 1.0);
    let mut steps = Vec::with_capacity(t_len);
    let mut trajectory = Vec::with_capacity(t_len);
    let mut max_deviation = 0.0f64;
    let mut deviation_round = None;
    for round in 1..=half {
        let x = arena.play(&mut policy, round, &first)?;
        let dev = (x - a).abs();
        if dev > GAME_TOL && deviation_round.is_none() {
            deviation_round = Some(round);
        }
        max_deviation = max_deviation.max(dev);
        steps.push(first.clone());
        trajectory.push(DVector::from_element(1, x));
    }
    let s_dagger = trajectory.iter().map(|x| x[0]).sum::<f64>() / half as f64;
    let deviated = deviation_round.is_some();
    for round in half + 1..=t_len {
        let step = if deviated {
            scalar_step(m0, a, -1.0)
        } else if round == half + 1 {
            scalar_step(m0, 0.0, 1.0)
        } else {
            scalar_step(m0, 0.0, 0.0)
        };
        let x = arena.play(&mut policy, round, &step)?;
        steps.push(step);
        trajectory.push(DVector::from_element(1, x));
    }
    let episode = arena.episode(steps)?;
    let online = total_cost(&episode, &trajectory)?.total;
    let t = t_len as f64;
    let (option, offline_bound) = if deviated {
        (2, 0.0)
    } else {
        (1, ((m0 / 2.0) * (t / 2.0 + 1.0) * a * a + a) / t)
    };
    let certified = if offline_bound == 0.0 {
        f64::INFINITY
    } else {
        online / offline_bound
    };
    Ok(GameResult {
        game: GameKind::Cr,
        policy: config.policy,
        horizon: t_len,
        m0,
        online_cost: online,
        offline_cost_bound: offline_bound,
        certified,
        theoretical_bound: t / (6.0 + 4.0 / t),
        chosen_option: option,
        s_dagger,
        max_deviation: Some(max_deviation),
        deviation_round,
        episode,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn regret_floor_and_threshold() {
        let cfg = GameConfig::new(PolicyKind::HitMin, 100, 2.0).unwrap();
        let res = regret_game(&cfg).unwrap();
        assert_abs_diff_eq!(res.theoretical_bound, 0.03125);
        // HitMin chases c = 1 on the first half.
        assert_abs_diff_eq!(res.s_dagger, 1.0);
        assert_eq!(res.chosen_option, 1);
        assert_abs_diff_eq!(res.offline_cost_bound, 0.375);
    }

    #[test]
    fn cr_constants() {
        let cfg = GameConfig::new(PolicyKind::HitMin, 100, 2.0).unwrap();
        let res = cr_game(&cfg).unwrap();
        assert_abs_diff_eq!(res.theoretical_bound, 100.0 / 6.04, epsilon = 1e-12);
        assert_eq!(res.chosen_option, 1);
        assert!(res.certified >= 16.0);
        assert_abs_diff_eq!(res.trajectory[0][0], 0.01, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_configs() {
        let odd = GameConfig::new(PolicyKind::HitMin, 11, 2.0).unwrap();
        assert!(matches!(regret_game(&odd), Err(Error::Config(_))));
        let weak = GameConfig::new(PolicyKind::HitMin, 10, 1.2).unwrap();
        assert!(matches!(regret_game(&weak), Err(Error::Config(_))));
        assert!(cr_game(&weak).is_ok());
    }
}
