//! Problem instances, trajectories and the three-part cost.
//!
//! An [`Episode`] holds a horizon of rounds. Each round reveals a quadratic
//! hitting cost and a fairness matrix `A_t`; the online agent commits to an
//! action `x_t` from that round's [`FeasibleSet`]. The total cost of a
//! trajectory is
//!
//! ```text
//! cost(x) = (1/T) Σ_t [ f_t(x_t) + (β₁/2)‖x_t − x_{t−1}‖² ] + g( (1/T) Σ_t A_t x_t )
//! ```
//!
//! where `g(y) = w‖y‖_p` is evaluated once, on the episode average.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, FeasibleSet};

/// Tolerance used when checking that `x0` and trajectory points are feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// `f(x) = (m/2)‖x − c‖² + b·x + r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticHitting {
    pub center: DVector<f64>,
    pub curvature: f64,
    pub linear: DVector<f64>,
    pub offset: f64,
}

impl QuadraticHitting {
    pub fn new(center: DVector<f64>, curvature: f64, linear: DVector<f64>, offset: f64) -> Result<Self> {
        let hitting = QuadraticHitting {
            center,
            curvature,
            linear,
            offset,
        };
        hitting.validate()?;
        Ok(hitting)
    }

    /// Pure isotropic quadratic `(m/2)‖x − c‖²`.
    pub fn centered(center: DVector<f64>, curvature: f64) -> Self {
        let n = center.len();
        QuadraticHitting {
            center,
            curvature,
            linear: DVector::zeros(n),
            offset: 0.0,
        }
    }

    /// The identically zero cost in dimension `n`.
    pub fn zero(n: usize) -> Self {
        QuadraticHitting::centered(DVector::zeros(n), 0.0)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.center.len() != self.linear.len() {
            return Err(Error::shape(format!(
                "hitting center has length {}, linear term has length {}",
                self.center.len(),
                self.linear.len()
            )));
        }
        if !self.curvature.is_finite()
            || !self.offset.is_finite()
            || self.center.iter().chain(self.linear.iter()).any(|v| !v.is_finite())
        {
            return Err(Error::non_finite("hitting cost parameters"));
        }
        if self.curvature < 0.0 {
            return Err(Error::domain("hitting curvature must be nonnegative"));
        }
        if self.offset < 0.0 {
            return Err(Error::domain("hitting offset must be nonnegative"));
        }
        Ok(())
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.curvature * (x - &self.center).norm_squared() + self.linear.dot(x) + self.offset
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (x - &self.center) * self.curvature + &self.linear
    }
}

/// `g(y) = w‖y‖_p`, with `p = ∞` allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessSpec {
    pub weight: f64,
    #[serde(with = "norm_order")]
    pub p: f64,
}

/// Serializes a norm order, writing `∞` as the string `"inf"` so that it
/// survives formats without infinite floats. Accepts numbers or strings.
pub mod norm_order {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(p) => Ok(p),
            Raw::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" | "∞" => Ok(f64::INFINITY),
                other => other.parse().map_err(|_| de::Error::custom(format!("invalid norm order '{t}'"))),
            },
        }
    }
}

impl FairnessSpec {
    pub fn new(weight: f64, p: f64) -> Result<Self> {
        let spec = FairnessSpec { weight, p };
        spec.validate()?;
        Ok(spec)
    }

    /// Weighted max-norm, the default for provisioning experiments.
    pub fn max_norm(weight: f64) -> Self {
        FairnessSpec {
            weight,
            p: f64::INFINITY,
        }
    }

    pub fn none() -> Self {
        FairnessSpec::max_norm(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_nan() || self.p < 1.0 {
            return Err(Error::domain(format!("norm order p = {} must be at least 1", self.p)));
        }
        if !self.weight.is_finite() || self.weight < 0.0 {
            return Err(Error::domain("fairness weight must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn eval(&self, y: &DVector<f64>) -> f64 {
        if self.weight == 0.0 {
            return 0.0;
        }
        self.weight * p_norm(y, self.p)
    }

    /// A subgradient of `g` at `y`. For `p = ∞` the lowest tied index of
    /// `max |y_i|` carries the whole weight.
    pub fn subgradient(&self, y: &DVector<f64>) -> DVector<f64> {
        let n = y.len();
        let mut out = DVector::zeros(n);
        if self.weight == 0.0 || n == 0 {
            return out;
        }
        let sign = |v: f64| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 };
        if self.p.is_infinite() {
            let mut best = 0;
            for i in 1..n {
                if y[i].abs() > y[best].abs() {
                    best = i;
                }
            }
            out[best] = self.weight * sign(y[best]);
        } else if self.p == 1.0 {
            for i in 0..n {
                out[i] = self.weight * sign(y[i]);
            }
        } else {
            let norm = p_norm(y, self.p);
            if norm > 0.0 {
                for i in 0..n {
                    out[i] = self.weight * sign(y[i]) * (y[i].abs() / norm).powf(self.p - 1.0);
                }
            }
        }
        out
    }

    /// l2-relative Lipschitz constant in dimension `m`.
    pub fn lipschitz(&self, m: usize) -> Result<f64> {
        lipschitz_constant(self, m)
    }
}

pub fn p_norm(y: &DVector<f64>, p: f64) -> f64 {
    if p.is_infinite() {
        y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    } else if p == 1.0 {
        y.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        y.norm()
    } else {
        let scale = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        scale * y.iter().map(|v| (v.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Smallest standard bound `L` with `g(y) − g(y′) ≤ L‖y − y′‖₂` in dimension `m`:
/// `w` for `p ≥ 2` and `w·m^{1/p − 1/2}` for `p ∈ [1, 2)`.
pub fn lipschitz_constant(spec: &FairnessSpec, m: usize) -> Result<f64> {
    spec.validate()?;
    if m == 0 {
        return Err(Error::domain("fairness dimension must be at least 1"));
    }
    if spec.p >= 2.0 {
        Ok(spec.weight)
    } else {
        Ok(spec.weight * (m as f64).powf(1.0 / spec.p - 0.5))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextStep {
    pub hitting: QuadraticHitting,
    /// `A_t`, shape `M × N`.
    pub fairness_matrix: DMatrix<f64>,
}

impl ContextStep {
    pub fn new(hitting: QuadraticHitting, fairness_matrix: DMatrix<f64>) -> Self {
        ContextStep {
            hitting,
            fairness_matrix,
        }
    }

    pub fn fairness_vector(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.fairness_matrix * x
    }
}

/// A full problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    steps: Vec<ContextStep>,
    x0: DVector<f64>,
    switching_weight: f64,
    fairness: FairnessSpec,
    action_sets: Vec<FeasibleSet>,
    aux_box: BoundingBox,
    diameter: f64,
}

impl Episode {
    /// Builds an episode and derives the auxiliary box and its diameter `Z`
    /// from the exact range of every row of `A_t` over `X_t`.
    pub fn new(
        steps: Vec<ContextStep>,
        x0: DVector<f64>,
        switching_weight: f64,
        fairness: FairnessSpec,
        action_sets: Vec<FeasibleSet>,
    ) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::shape("episode needs at least one round"));
        }
        if action_sets.len() != steps.len() {
            return Err(Error::shape(format!(
                "{} action sets for {} rounds",
                action_sets.len(),
                steps.len()
            )));
        }
        let n = x0.len();
        let m = steps[0].fairness_matrix.nrows();
        if m == 0 || n == 0 {
            return Err(Error::shape("action and fairness dimensions must be positive"));
        }
        for (t, (step, set)) in steps.iter().zip(&action_sets).enumerate() {
            step.hitting.validate()?;
            if step.hitting.dim() != n {
                return Err(Error::shape(format!(
                    "round {}: hitting cost has dimension {}, expected {n}",
                    t + 1,
                    step.hitting.dim()
                )));
            }
            if step.fairness_matrix.nrows() != m || step.fairness_matrix.ncols() != n {
                return Err(Error::shape(format!(
                    "round {}: fairness matrix is {}x{}, expected {m}x{n}",
                    t + 1,
                    step.fairness_matrix.nrows(),
                    step.fairness_matrix.ncols()
                )));
            }
            if step.fairness_matrix.iter().any(|v| !v.is_finite()) {
                return Err(Error::non_finite(format!("fairness matrix of round {}", t + 1)));
            }
            if set.dim() != n {
                return Err(Error::shape(format!(
                    "round {}: action set has dimension {}, expected {n}",
                    t + 1,
                    set.dim()
                )));
            }
            set.validate().map_err(|e| match e {
                Error::Infeasible(msg) => Error::Infeasible(format!("round {}: {msg}", t + 1)),
                other => other,
            })?;
        }
        if !switching_weight.is_finite() || switching_weight < 0.0 {
            return Err(Error::domain("switching weight must be finite and nonnegative"));
        }
        fairness.validate()?;
        if !action_sets[0].is_feasible(&x0, FEASIBILITY_TOL) {
            return Err(Error::Infeasible("x0 is not feasible for the first round".into()));
        }

        let aux_box = image_bounding_box(&steps, &action_sets)?;
        let diameter = aux_box.diagonal();
        Ok(Episode {
            steps,
            x0,
            switching_weight,
            fairness,
            action_sets,
            aux_box,
            diameter,
        })
    }

    /// Replaces the derived auxiliary box. Every `A_t x_t` with `x_t ∈ X_t`
    /// must still lie inside it.
    pub fn with_aux_box(mut self, aux_box: BoundingBox) -> Result<Self> {
        if aux_box.dim() != self.fairness_dim() {
            return Err(Error::shape("auxiliary box dimension mismatch"));
        }
        let image = image_bounding_box(&self.steps, &self.action_sets)?;
        let covers = (0..aux_box.dim()).all(|j| {
            aux_box.lower[j] <= image.lower[j] + FEASIBILITY_TOL
                && aux_box.upper[j] >= image.upper[j] - FEASIBILITY_TOL
        });
        if !covers {
            return Err(Error::domain("auxiliary box does not cover the image of the action sets"));
        }
        self.diameter = aux_box.diagonal();
        self.aux_box = aux_box;
        Ok(self)
    }

    /// Overrides the diameter bound `Z`.
    pub fn with_diameter(mut self, diameter: f64) -> Result<Self> {
        if !(diameter > 0.0) || !diameter.is_finite() {
            return Err(Error::domain("diameter must be positive and finite"));
        }
        self.diameter = diameter;
        Ok(self)
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn action_dim(&self) -> usize {
        self.x0.len()
    }

    pub fn fairness_dim(&self) -> usize {
        self.steps[0].fairness_matrix.nrows()
    }

    pub fn steps(&self) -> &[ContextStep] {
        &self.steps
    }

    pub fn step(&self, t: usize) -> &ContextStep {
        &self.steps[t]
    }

    pub fn action_sets(&self) -> &[FeasibleSet] {
        &self.action_sets
    }

    pub fn action_set(&self, t: usize) -> &FeasibleSet {
        &self.action_sets[t]
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn switching_weight(&self) -> f64 {
        self.switching_weight
    }

    pub fn fairness(&self) -> &FairnessSpec {
        &self.fairness
    }

    pub fn aux_box(&self) -> &BoundingBox {
        &self.aux_box
    }

    /// Diameter bound `Z` of the auxiliary set.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn lipschitz(&self) -> f64 {
        // Validated at construction.
        lipschitz_constant(&self.fairness, self.fairness_dim()).unwrap_or(self.fairness.weight)
    }

    /// Smallest hitting curvature over the horizon.
    pub fn min_curvature(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.hitting.curvature)
            .fold(f64::INFINITY, f64::min)
    }

    /// Copy of the episode truncated to its first `len` rounds.
    pub fn prefix(&self, len: usize) -> Result<Episode> {
        if len == 0 || len > self.horizon() {
            return Err(Error::shape(format!("prefix length {len} outside 1..={}", self.horizon())));
        }
        let mut out = self.clone();
        out.steps.truncate(len);
        out.action_sets.truncate(len);
        Ok(out)
    }

    fn check_trajectory(&self, trajectory: &[DVector<f64>]) -> Result<()> {
        if trajectory.len() != self.horizon() {
            return Err(Error::shape(format!(
                "trajectory has {} rounds, episode has {}",
                trajectory.len(),
                self.horizon()
            )));
        }
        for (t, x) in trajectory.iter().enumerate() {
            if x.len() != self.action_dim() {
                return Err(Error::shape(format!(
                    "round {}: action has dimension {}, expected {}",
                    t + 1,
                    x.len(),
                    self.action_dim()
                )));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::non_finite(format!("action of round {}", t + 1)));
            }
        }
        Ok(())
    }

    /// `A_t x_t` for every round.
    pub fn fairness_vectors(&self, trajectory: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        self.check_trajectory(trajectory)?;
        Ok(self
            .steps
            .iter()
            .zip(trajectory)
            .map(|(s, x)| s.fairness_vector(x))
            .collect())
    }

    /// `(1/T) Σ_t A_t x_t`.
    pub fn average_fairness_vector(&self, trajectory: &[DVector<f64>]) -> Result<DVector<f64>> {
        let vectors = self.fairness_vectors(trajectory)?;
        let mut sum = DVector::zeros(self.fairness_dim());
        for v in &vectors {
            sum += v;
        }
        Ok(sum / self.horizon() as f64)
    }
}

fn image_bounding_box(steps: &[ContextStep], sets: &[FeasibleSet]) -> Result<BoundingBox> {
    let m = steps[0].fairness_matrix.nrows();
    let mut lower = DVector::from_element(m, f64::INFINITY);
    let mut upper = DVector::from_element(m, f64::NEG_INFINITY);
    for (step, set) in steps.iter().zip(sets) {
        for j in 0..m {
            let row = step.fairness_matrix.row(j).transpose();
            let (lo, hi) = set.linear_range(&row)?;
            lower[j] = lower[j].min(lo);
            upper[j] = upper[j].max(hi);
        }
    }
    BoundingBox::new(lower, upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub hitting: f64,
    pub switching: f64,
    pub fairness: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(hitting: f64, switching: f64, fairness: f64) -> Self {
        CostBreakdown {
            hitting,
            switching,
            fairness,
            total: hitting + switching + fairness,
        }
    }
}

/// Evaluates every component of the cost of `trajectory`.
/// Switching at round 1 is measured from `x0`.
pub fn total_cost(episode: &Episode, trajectory: &[DVector<f64>]) -> Result<CostBreakdown> {
    episode.check_trajectory(trajectory)?;
    let horizon = episode.horizon() as f64;
    let mut hitting = 0.0;
    let mut switching = 0.0;
    let mut prev = episode.x0();
    for (step, x) in episode.steps().iter().zip(trajectory) {
        hitting += step.hitting.eval(x);
        switching += 0.5 * episode.switching_weight() * (x - prev).norm_squared();
        prev = x;
    }
    let average = episode.average_fairness_vector(trajectory)?;
    let fairness = episode.fairness().eval(&average);
    Ok(CostBreakdown::new(hitting / horizon, switching / horizon, fairness))
}

/// Objective of the budget-decomposed problem:
/// `(1/T)(Σ f_t + Σ d) + (1/T) Σ_t g(z_t)`. Ignores the coupling constraint.
pub fn decomposed_cost(
    episode: &Episode,
    trajectory: &[DVector<f64>],
    budgets: &[DVector<f64>],
) -> Result<f64> {
    if budgets.len() != episode.horizon() {
        return Err(Error::shape("one budget per round is required"));
    }
    let base = total_cost(episode, trajectory)?;
    let fairness: f64 = budgets.iter().map(|z| episode.fairness().eval(z)).sum::<f64>()
        / episode.horizon() as f64;
    Ok(base.hitting + base.switching + fairness)
}

/// Total frame deviation `Σ_k ‖Σ_{t∈frame k} A_t x_t − (R/T) Σ_t A_t x_t‖₂`
/// of a trajectory with frame size `frame`.
pub fn fairness_deviation(episode: &Episode, trajectory: &[DVector<f64>], frame: usize) -> Result<f64> {
    let vectors = episode.fairness_vectors(trajectory)?;
    frame_deviation(&vectors, frame)
}

/// Frame deviation computed directly on a sequence of fairness vectors.
pub fn frame_deviation(vectors: &[DVector<f64>], frame: usize) -> Result<f64> {
    let horizon = vectors.len();
    if frame == 0 || horizon == 0 || horizon % frame != 0 {
        return Err(Error::FrameSize { frame, horizon });
    }
    let dim = vectors[0].len();
    let mut total = DVector::zeros(dim);
    for v in vectors {
        total += v;
    }
    let scaled = total * (frame as f64 / horizon as f64);
    Ok(vectors
        .chunks(frame)
        .map(|chunk| {
            let mut sum = DVector::zeros(dim);
            for v in chunk {
                sum += v;
            }
            (sum - &scaled).norm()
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn symmetric_episode(horizon: usize) -> Episode {
        let step = ContextStep::new(
            QuadraticHitting::centered(v(&[0.5, 0.5]), 2.0),
            DMatrix::identity(2, 2),
        );
        Episode::new(
            vec![step; horizon],
            v(&[0.5, 0.5]),
            0.0,
            FairnessSpec::max_norm(3.5),
            vec![FeasibleSet::capped_simplex(1.0, v(&[1.0, 1.0])); horizon],
        )
        .unwrap()
    }

    #[test]
    fn symmetric_fixed_point_cost() {
        let ep = symmetric_episode(1);
        let c = total_cost(&ep, &[v(&[0.5, 0.5])]).unwrap();
        assert_eq!(c.hitting, 0.0);
        assert_eq!(c.switching, 0.0);
        assert_abs_diff_eq!(c.fairness, 1.75);
        assert_abs_diff_eq!(c.total, 1.75);
    }

    #[test]
    fn zero_cost_when_tracking_centers() {
        let steps: Vec<_> = [0.2, 0.7, 0.4]
            .iter()
            .map(|&c| {
                ContextStep::new(
                    QuadraticHitting::centered(v(&[c, 1.0 - c]), 3.0),
                    DMatrix::identity(2, 2),
                )
            })
            .collect();
        let ep = Episode::new(
            steps,
            v(&[0.5, 0.5]),
            0.0,
            FairnessSpec::none(),
            vec![FeasibleSet::capped_simplex(1.0, v(&[1.0, 1.0])); 3],
        )
        .unwrap();
        let traj = vec![v(&[0.2, 0.8]), v(&[0.7, 0.3]), v(&[0.4, 0.6])];
        assert_abs_diff_eq!(total_cost(&ep, &traj).unwrap().total, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn switching_from_x0() {
        let step = ContextStep::new(QuadraticHitting::zero(2), DMatrix::identity(2, 2));
        let ep = Episode::new(
            vec![step],
            v(&[0.0, 0.0]),
            1000.0,
            FairnessSpec::none(),
            vec![FeasibleSet::unit_box(2)],
        )
        .unwrap();
        let c = total_cost(&ep, &[v(&[1.0, 0.0])]).unwrap();
        assert_abs_diff_eq!(c.switching, 500.0);
        assert_abs_diff_eq!(c.total, 500.0);
    }

    #[test]
    fn trajectory_errors() {
        let ep = symmetric_episode(2);
        assert!(matches!(total_cost(&ep, &[v(&[0.5, 0.5])]), Err(Error::Shape(_))));
        assert!(matches!(
            total_cost(&ep, &[v(&[0.5, 0.5]), v(&[f64::NAN, 0.5])]),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            total_cost(&ep, &[v(&[0.5, 0.5]), v(&[0.5])]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn deviation_examples() {
        let seq: Vec<_> = [1.0, 1.0, 3.0, 3.0].iter().map(|&a| v(&[a])).collect();
        assert_abs_diff_eq!(frame_deviation(&seq, 2).unwrap(), 4.0);
        assert_abs_diff_eq!(frame_deviation(&seq, 4).unwrap(), 0.0);
        let constant: Vec<_> = (0..6).map(|_| v(&[2.0, -1.0])).collect();
        assert_abs_diff_eq!(frame_deviation(&constant, 3).unwrap(), 0.0);
        assert!(matches!(frame_deviation(&seq, 3), Err(Error::FrameSize { frame: 3, horizon: 4 })));
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(lipschitz_constant(&FairnessSpec::max_norm(3.5), 7).unwrap(), 3.5);
        assert_abs_diff_eq!(
            lipschitz_constant(&FairnessSpec { weight: 1.0, p: 1.0 }, 4).unwrap(),
            2.0
        );
        for m in 1..6 {
            assert_eq!(lipschitz_constant(&FairnessSpec { weight: 1.0, p: 2.0 }, m).unwrap(), 1.0);
        }
        assert!(matches!(
            lipschitz_constant(&FairnessSpec { weight: 1.0, p: 0.5 }, 3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn max_norm_subgradient_breaks_ties_low() {
        let g = FairnessSpec::max_norm(2.0);
        let s = g.subgradient(&v(&[-3.0, 3.0, 1.0]));
        assert_eq!(s, v(&[-2.0, 0.0, 0.0]));
    }

    #[test]
    fn derived_aux_box_and_diameter() {
        let ep = symmetric_episode(2);
        assert_eq!(ep.aux_box().lower, v(&[0.0, 0.0]));
        assert_eq!(ep.aux_box().upper, v(&[1.0, 1.0]));
        assert_abs_diff_eq!(ep.diameter(), 2f64.sqrt());
    }

    #[test]
    fn episode_rejects_infeasible_x0() {
        let step = ContextStep::new(QuadraticHitting::zero(2), DMatrix::identity(2, 2));
        let err = Episode::new(
            vec![step],
            v(&[0.9, 0.9]),
            0.0,
            FairnessSpec::none(),
            vec![FeasibleSet::capped_simplex(1.0, v(&[1.0, 1.0]))],
        );
        assert!(matches!(err, Err(Error::Infeasible(_))));
    }
}
