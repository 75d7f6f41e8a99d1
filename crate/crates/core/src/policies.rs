//! Online policies and the constants of their performance guarantees.
//!
//! Every policy sees one round at a time through [`Policy::act`]. The
//! [`run_episode`] driver plays a whole [`Episode`] and scores it.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, FeasibleSet};
use crate::mirror::{dual_update, DualState, ReferenceFunction, ReferenceKind};
use crate::model::{total_cost, ContextStep, CostBreakdown, Episode, FairnessSpec};
use crate::solvers::{hitting_minimizer, solve_per_round, PerRoundProblem, SolveOptions};

/// Serialized by display name; parsing ignores case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PolicyKind {
    /// Regularized balanced descent with a mirror-descent fairness price.
    FairObd,
    /// Regularized balanced descent without any fairness term.
    Robd,
    /// Dual mirror descent: fairness price, no switching awareness.
    Dmd,
    /// Greedy hitting-cost minimizer.
    HitMin,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [PolicyKind::FairObd, PolicyKind::Robd, PolicyKind::Dmd, PolicyKind::HitMin];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::FairObd => "FairOBD",
            PolicyKind::Robd => "ROBD",
            PolicyKind::Dmd => "DMD",
            PolicyKind::HitMin => "HitMin",
        }
    }

    fn uses_dual(self) -> bool {
        matches!(self, PolicyKind::FairObd | PolicyKind::Dmd)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<PolicyKind> for String {
    fn from(kind: PolicyKind) -> String {
        kind.name().to_string()
    }
}

impl TryFrom<String> for PolicyKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fairobd" => Ok(PolicyKind::FairObd),
            "robd" => Ok(PolicyKind::Robd),
            "dmd" => Ok(PolicyKind::Dmd),
            "hitmin" => Ok(PolicyKind::HitMin),
            other => Err(Error::Config(format!("unknown policy '{other}'"))),
        }
    }
}

/// Learning-rate rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum EtaSchedule {
    Constant { value: f64 },
    /// `scale · T^{−1/3}`.
    HorizonCubeRoot { scale: f64 },
}

impl EtaSchedule {
    pub fn value(&self, horizon: usize) -> f64 {
        match *self {
            EtaSchedule::Constant { value } => value,
            EtaSchedule::HorizonCubeRoot { scale } => scale * (horizon as f64).powf(-1.0 / 3.0),
        }
    }
}

/// Initial dual vector, either one value repeated or an explicit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialDual {
    Uniform(f64),
    Vector(Vec<f64>),
}

impl InitialDual {
    pub fn resolve(&self, dim: usize) -> Result<DVector<f64>> {
        match self {
            InitialDual::Uniform(v) => Ok(DVector::from_element(dim, *v)),
            InitialDual::Vector(v) if v.len() == dim => Ok(DVector::from_column_slice(v)),
            InitialDual::Vector(v) => Err(Error::Config(format!(
                "initial dual has length {}, fairness dimension is {dim}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub eta: EtaSchedule,
    pub kappa1: InitialDual,
    pub reference: ReferenceFunction,
    /// Apply `[·]^+` after additive dual updates.
    pub clamp_nonnegative: bool,
    /// Keep the `λ₂` proximal term in DMD's round objective.
    pub dmd_proximal: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams::experiment()
    }
}

impl HyperParams {
    /// Settings of the provisioning experiment: `λ₁ = 1`, `λ₂ = 30`,
    /// `η = 10⁻³`, `κ₁ = 3`.
    pub fn experiment() -> Self {
        HyperParams {
            lambda1: 1.0,
            lambda2: 30.0,
            eta: EtaSchedule::Constant { value: 1e-3 },
            kappa1: InitialDual::Uniform(3.0),
            reference: ReferenceFunction::squared_l2(),
            clamp_nonnegative: true,
            dmd_proximal: false,
        }
    }

    /// Balanced weights for curvature `m` and switching weight `β₁`,
    /// `η = T^{−1/3}` and `κ₁ = 0`.
    pub fn theorem(m: f64, beta1: f64) -> Result<Self> {
        let (lambda1, lambda2) = optimal_lambdas(m, beta1)?;
        Ok(HyperParams {
            lambda1,
            lambda2,
            eta: EtaSchedule::HorizonCubeRoot { scale: 1.0 },
            kappa1: InitialDual::Uniform(0.0),
            ..HyperParams::experiment()
        })
    }

    /// `λ₁ = λ₂ = 0`, `η = T^{−1/3}`, `κ₁ = 0`.
    pub fn no_switching() -> Self {
        HyperParams {
            lambda1: 0.0,
            lambda2: 0.0,
            eta: EtaSchedule::HorizonCubeRoot { scale: 1.0 },
            kappa1: InitialDual::Uniform(0.0),
            ..HyperParams::experiment()
        }
    }

    /// ROBD with balanced weights; the dual settings are unused.
    pub fn robd(m: f64, beta1: f64) -> Result<Self> {
        HyperParams::theorem(m, beta1)
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = EtaSchedule::Constant { value: eta };
        self
    }

    pub fn validate(&self, kind: PolicyKind) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda1) {
            return Err(Error::Config(format!("lambda1 = {} outside [0, 1]", self.lambda1)));
        }
        if !(self.lambda2 >= 0.0) || !self.lambda2.is_finite() {
            return Err(Error::Config(format!("lambda2 = {} must be nonnegative", self.lambda2)));
        }
        if kind == PolicyKind::FairObd && self.lambda1 == 0.0 && self.lambda2 != 0.0 {
            return Err(Error::Config(
                "FairOBD needs lambda1 in (0, 1], or lambda1 = lambda2 = 0".into(),
            ));
        }
        if kind.uses_dual() {
            let eta = self.eta.value(1);
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(Error::Config("learning rate must be positive".into()));
            }
            self.reference.validate()?;
        }
        Ok(())
    }
}

/// What a policy knows about the episode before the first round.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeMeta<'a> {
    pub horizon: usize,
    pub beta1: f64,
    pub fairness: &'a FairnessSpec,
    pub aux_box: &'a BoundingBox,
}

impl<'a> EpisodeMeta<'a> {
    pub fn of(episode: &'a Episode) -> Self {
        EpisodeMeta {
            horizon: episode.horizon(),
            beta1: episode.switching_weight(),
            fairness: episode.fairness(),
            aux_box: episode.aux_box(),
        }
    }
}

/// Diagnostics of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub x: DVector<f64>,
    pub z: Option<DVector<f64>>,
    /// `z_t − A_t x_t`.
    pub d: Option<DVector<f64>>,
    /// The dual vector used in this round, before its update.
    pub kappa: DVector<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    pub x_prev: DVector<f64>,
    pub dual: DualState,
    /// Rounds played so far.
    pub t: usize,
    pub diagnostics: Vec<RoundRecord>,
}

impl PolicyState {
    pub fn new(kind: PolicyKind, x0: DVector<f64>, fairness_dim: usize, hyper: &HyperParams) -> Result<Self> {
        hyper.validate(kind)?;
        let kappa = if kind.uses_dual() {
            hyper.kappa1.resolve(fairness_dim)?
        } else {
            DVector::zeros(fairness_dim)
        };
        let clamp = hyper.clamp_nonnegative && hyper.reference.kind == ReferenceKind::SquaredL2;
        let dual = DualState::new(kappa, clamp);
        if kind.uses_dual() {
            dual.validate(&hyper.reference)?;
        }
        Ok(PolicyState {
            x_prev: x0,
            dual,
            t: 0,
            diagnostics: Vec::new(),
        })
    }
}

/// Plays one round: chooses `x_t` for `step` and returns the updated state.
pub fn policy_step(
    kind: PolicyKind,
    mut state: PolicyState,
    step: &ContextStep,
    action_set: &FeasibleSet,
    meta: &EpisodeMeta<'_>,
    hyper: &HyperParams,
    opts: &SolveOptions,
) -> Result<(DVector<f64>, PolicyState)> {
    let x = advance(kind, &mut state, step, action_set, meta, hyper, opts)?;
    Ok((x, state))
}

/// Mutates `state` only once the round has been solved successfully.
fn advance(
    kind: PolicyKind,
    state: &mut PolicyState,
    step: &ContextStep,
    action_set: &FeasibleSet,
    meta: &EpisodeMeta<'_>,
    hyper: &HyperParams,
    opts: &SolveOptions,
) -> Result<DVector<f64>> {
    if state.t >= meta.horizon {
        return Err(Error::EpisodeExhausted {
            round: state.t + 1,
            horizon: meta.horizon,
        });
    }
    let zeros;
    let (lambda1, lambda2, kappa) = match kind {
        PolicyKind::FairObd => (hyper.lambda1, hyper.lambda2, &state.dual.kappa),
        PolicyKind::Dmd => (0.0, if hyper.dmd_proximal { hyper.lambda2 } else { 0.0 }, &state.dual.kappa),
        PolicyKind::Robd => {
            zeros = DVector::zeros(meta.aux_box.dim());
            (hyper.lambda1, hyper.lambda2, &zeros)
        }
        PolicyKind::HitMin => {
            let x = hitting_minimizer(step, action_set, opts)?;
            state.diagnostics.push(RoundRecord {
                x: x.clone(),
                z: None,
                d: None,
                kappa: state.dual.kappa.clone(),
                residual: 0.0,
            });
            state.x_prev = x.clone();
            state.t += 1;
            return Ok(x);
        }
    };
    let problem = PerRoundProblem {
        step,
        action_set,
        aux_box: meta.aux_box,
        fairness: meta.fairness,
        x_prev: &state.x_prev,
        kappa,
        lambda1,
        lambda2,
        beta1: meta.beta1,
    };
    let record = if kind.uses_dual() {
        let sol = solve_per_round(&problem, opts)?;
        let d = &sol.z - &step.fairness_matrix * &sol.x;
        let next = dual_update(&hyper.reference, &state.dual, &d, hyper.eta.value(meta.horizon))?;
        RoundRecord {
            x: sol.x,
            z: Some(sol.z),
            d: Some(d),
            kappa: std::mem::replace(&mut state.dual, next).kappa,
            residual: sol.residual,
        }
    } else {
        let (x, _, residual, _) = problem.solve_primal(opts)?;
        RoundRecord {
            x,
            z: None,
            d: None,
            kappa: state.dual.kappa.clone(),
            residual,
        }
    };
    let x = record.x.clone();
    state.x_prev = x.clone();
    state.t += 1;
    state.diagnostics.push(record);
    Ok(x)
}

/// A policy bound to its hyperparameters and episode metadata.
#[derive(Debug, Clone)]
pub struct Policy<'a> {
    kind: PolicyKind,
    hyper: HyperParams,
    meta: EpisodeMeta<'a>,
    opts: SolveOptions,
    state: PolicyState,
}

impl<'a> Policy<'a> {
    pub fn new(
        kind: PolicyKind,
        hyper: HyperParams,
        meta: EpisodeMeta<'a>,
        x0: DVector<f64>,
        opts: SolveOptions,
    ) -> Result<Self> {
        let state = PolicyState::new(kind, x0, meta.aux_box.dim(), &hyper)?;
        Ok(Policy {
            kind,
            hyper,
            meta,
            opts,
            state,
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// Reveals one round and returns the committed action.
    pub fn act(&mut self, step: &ContextStep, action_set: &FeasibleSet) -> Result<DVector<f64>> {
        advance(self.kind, &mut self.state, step, action_set, &self.meta, &self.hyper, &self.opts)
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    pub fn into_state(self) -> PolicyState {
        self.state
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRun {
    pub trajectory: Vec<DVector<f64>>,
    pub cost: CostBreakdown,
    pub diagnostics: Vec<RoundRecord>,
    pub final_kappa: DVector<f64>,
}

/// Plays `kind` on `episode` round by round and evaluates the realized cost.
pub fn run_episode(kind: PolicyKind, episode: &Episode, hyper: &HyperParams, opts: &SolveOptions) -> Result<EpisodeRun> {
    let mut policy = Policy::new(kind, hyper.clone(), EpisodeMeta::of(episode), episode.x0().clone(), opts.clone())?;
    let mut trajectory = Vec::with_capacity(episode.horizon());
    for (step, set) in episode.steps().iter().zip(episode.action_sets()) {
        trajectory.push(policy.act(step, set)?);
    }
    let cost = total_cost(episode, &trajectory)?;
    let state = policy.into_state();
    Ok(EpisodeRun {
        trajectory,
        cost,
        diagnostics: state.diagnostics,
        final_kappa: state.dual.kappa,
    })
}

/// Balanced weights `λ₁ = 1`, `λ₂ = (m/2)(1 + √(1 + 4β₁/m)) − m`.
pub fn optimal_lambdas(m: f64, beta1: f64) -> Result<(f64, f64)> {
    check_curvature(m, beta1)?;
    Ok((1.0, (0.5 * m * (1.0 + (1.0 + 4.0 * beta1 / m).sqrt()) - m).max(0.0)))
}

/// `½(1 + √(1 + 4β₁/m))`.
pub fn theoretical_cr(m: f64, beta1: f64) -> Result<f64> {
    check_curvature(m, beta1)?;
    Ok(0.5 * (1.0 + (1.0 + 4.0 * beta1 / m).sqrt()))
}

/// `C = max{(m + λ₂)/(mλ₁), 1 + λ₁β₁/(m + λ₂)}`.
pub fn competitive_constant(m: f64, beta1: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    check_curvature(m, beta1)?;
    if !(lambda1 > 0.0 && lambda1 <= 1.0) || !(lambda2 >= 0.0) {
        return Err(Error::domain("competitive constant needs lambda1 in (0, 1] and lambda2 >= 0"));
    }
    Ok(((m + lambda2) / (m * lambda1)).max(1.0 + lambda1 * beta1 / (m + lambda2)))
}

fn check_curvature(m: f64, beta1: f64) -> Result<()> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("curvature must be positive, got {m}")));
    }
    if !(beta1 >= 0.0) || !beta1.is_finite() {
        return Err(Error::domain(format!("switching weight must be nonnegative, got {beta1}")));
    }
    Ok(())
}

/// Inputs of the additive slack of the competitive guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub eta: f64,
    pub l: f64,
    pub beta2: f64,
    /// Diameter `Z` of the budget set.
    pub diameter: f64,
    /// Lipschitz constant `L` of `g`.
    pub lipschitz: f64,
    /// Frame size `R`.
    pub frame: f64,
    pub kappa1_norm: f64,
    /// Measured frame deviation of the comparator.
    pub delta: f64,
    pub lambda1: f64,
    pub horizon: f64,
}

/// `(1/λ₁)[ηZ²R/(2l) + Z‖κ₁‖ + β₂L√((1/T)(Z²/l² + 2LZ/(ηl) + 2Z‖κ₁‖/(η²l))) + Lδ/T]`.
pub fn theorem_bound(b: &BoundParams) -> f64 {
    let z = b.diameter;
    let root = ((z * z / (b.l * b.l)
        + 2.0 * b.lipschitz * z / (b.eta * b.l)
        + 2.0 * z * b.kappa1_norm / (b.eta * b.eta * b.l))
        / b.horizon)
        .sqrt();
    (b.eta * z * z * b.frame / (2.0 * b.l) + z * b.kappa1_norm + b.beta2 * b.lipschitz * root + b.lipschitz * b.delta / b.horizon)
        / b.lambda1
}
