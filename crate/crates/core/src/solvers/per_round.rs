use nalgebra::DVector;

use super::{PrimalMethod, SolveOptions, StepRule};
use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, FeasibleSet};
use crate::model::{p_norm, ContextStep, FairnessSpec};

/// The minimizer `v_t = argmin_{x ∈ X} f_t(x)` of the hitting cost alone.
pub fn hitting_minimizer(step: &ContextStep, set: &FeasibleSet, opts: &SolveOptions) -> Result<DVector<f64>> {
    let f = &step.hitting;
    if f.dim() != set.dim() {
        return Err(Error::shape(format!(
            "hitting cost has dimension {}, action set has dimension {}",
            f.dim(),
            set.dim()
        )));
    }
    let m = f.curvature;
    if m == 0.0 {
        return set.linear_minimizer(&f.linear);
    }
    let target = &f.center - &f.linear / m;
    let gradient = |x: &DVector<f64>| f.gradient(x);
    let value = |x: &DVector<f64>| f.eval(x);
    minimize_isotropic(set, &target, m, &gradient, &value, opts).map(|(x, _, _)| x)
}

/// One round of the regularized primal problem
///
/// ```text
/// min_x  f_t(x) + λ₁(β₁/2)‖x − x_prev‖² + (λ₂/2)‖x − v_t‖² + κ·A_t x
/// ```
///
/// together with the budget problem `min_z g(z) − κ·z` over the auxiliary box.
#[derive(Debug, Clone, Copy)]
pub struct PerRoundProblem<'a> {
    pub step: &'a ContextStep,
    pub action_set: &'a FeasibleSet,
    pub aux_box: &'a BoundingBox,
    pub fairness: &'a FairnessSpec,
    pub x_prev: &'a DVector<f64>,
    pub kappa: &'a DVector<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub beta1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundSolution {
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    /// The hitting minimizer, when the proximal term was active.
    pub v: Option<DVector<f64>>,
    /// Projected-gradient mapping norm at `x`.
    pub residual: f64,
    pub iterations: usize,
}

impl PerRoundProblem<'_> {
    fn check(&self) -> Result<()> {
        let n = self.action_set.dim();
        let m = self.aux_box.dim();
        let a = &self.step.fairness_matrix;
        if self.step.hitting.dim() != n || self.x_prev.len() != n || a.ncols() != n {
            return Err(Error::shape("per-round action dimensions disagree"));
        }
        if self.kappa.len() != m || a.nrows() != m {
            return Err(Error::shape("per-round fairness dimensions disagree"));
        }
        for (name, val) in [("lambda1", self.lambda1), ("lambda2", self.lambda2), ("beta1", self.beta1)] {
            if !val.is_finite() || val < 0.0 {
                return Err(Error::domain(format!("{name} must be finite and nonnegative")));
            }
        }
        if self.kappa.iter().any(|v| !v.is_finite()) {
            return Err(Error::non_finite("dual variable"));
        }
        Ok(())
    }

    /// Curvature `m + λ₁β₁ + λ₂` of the action objective.
    pub fn curvature(&self) -> f64 {
        self.step.hitting.curvature + self.lambda1 * self.beta1 + self.lambda2
    }

    fn prox_center(&self, opts: &SolveOptions) -> Result<Option<DVector<f64>>> {
        if self.lambda2 > 0.0 {
            hitting_minimizer(self.step, self.action_set, opts).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Value of the action objective at `x`, given the proximal center `v`.
    pub fn objective(&self, x: &DVector<f64>, v: Option<&DVector<f64>>) -> f64 {
        let mut value = self.step.hitting.eval(x)
            + 0.5 * self.lambda1 * self.beta1 * (x - self.x_prev).norm_squared()
            + self.kappa.dot(&(&self.step.fairness_matrix * x));
        if let Some(v) = v {
            value += 0.5 * self.lambda2 * (x - v).norm_squared();
        }
        value
    }

    fn gradient(&self, x: &DVector<f64>, v: Option<&DVector<f64>>) -> DVector<f64> {
        let mut g = self.step.hitting.gradient(x)
            + (x - self.x_prev) * (self.lambda1 * self.beta1)
            + self.step.fairness_matrix.tr_mul(self.kappa);
        if let Some(v) = v {
            g += (x - v) * self.lambda2;
        }
        g
    }

    /// Solves only the action subproblem. Returns `(x, v, residual, iterations)`.
    pub fn solve_primal(&self, opts: &SolveOptions) -> Result<(DVector<f64>, Option<DVector<f64>>, f64, usize)> {
        self.check()?;
        let v = self.prox_center(opts)?;
        let mu = self.curvature();
        let f = &self.step.hitting;
        let dual_push = self.step.fairness_matrix.tr_mul(self.kappa);
        if mu == 0.0 {
            let x = self.action_set.linear_minimizer(&(&f.linear + &dual_push))?;
            return Ok((x, v, 0.0, 0));
        }
        let mut target = &f.center * f.curvature - &f.linear - dual_push
            + self.x_prev * (self.lambda1 * self.beta1);
        if let Some(v) = &v {
            target += v * self.lambda2;
        }
        target /= mu;
        let gradient = |x: &DVector<f64>| self.gradient(x, v.as_ref());
        let value = |x: &DVector<f64>| self.objective(x, v.as_ref());
        let (x, residual, iterations) = minimize_isotropic(self.action_set, &target, mu, &gradient, &value, opts)?;
        Ok((x, v, residual, iterations))
    }
}

/// Minimizes an objective of the form `(μ/2)‖x − target‖² + const` over
/// `set`, either in closed form or by projected gradient from `target`'s
/// projection, and certifies the result through the mapping norm.
fn minimize_isotropic(
    set: &FeasibleSet,
    target: &DVector<f64>,
    mu: f64,
    gradient: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    value: &dyn Fn(&DVector<f64>) -> f64,
    opts: &SolveOptions,
) -> Result<(DVector<f64>, f64, usize)> {
    match opts.primal {
        PrimalMethod::ClosedForm => {
            let x = set.project(target)?;
            let (residual, scale) = mapping_residual(set, &x, gradient, mu)?;
            if residual > opts.grad_tol * scale {
                return Err(Error::Convergence {
                    iterations: 1,
                    residual,
                });
            }
            Ok((x, residual, 1))
        }
        PrimalMethod::ProjectedGradient => {
            let start = set.linear_minimizer(&DVector::zeros(set.dim()))?;
            projected_gradient(set, start, mu, gradient, value, opts)
        }
    }
}

/// Norm of `(x − P(x − ∇F(x)/μ))·μ`, and the scale the tolerance is relative to.
fn mapping_residual(
    set: &FeasibleSet,
    x: &DVector<f64>,
    gradient: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    mu: f64,
) -> Result<(f64, f64)> {
    let g = gradient(x);
    let moved = set.project(&(x - &g / mu))?;
    Ok(((x - moved).norm() * mu, 1.0 + g.norm()))
}

fn projected_gradient(
    set: &FeasibleSet,
    mut x: DVector<f64>,
    mu: f64,
    gradient: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    value: &dyn Fn(&DVector<f64>) -> f64,
    opts: &SolveOptions,
) -> Result<(DVector<f64>, f64, usize)> {
    let mut step = match opts.step_rule {
        StepRule::Fixed => 1.0 / mu,
        StepRule::Backtracking { initial } => initial,
    };
    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_iters {
        let g = gradient(&x);
        let fx = value(&x);
        let next = loop {
            let candidate = set.project(&(&x - &g * step))?;
            if opts.step_rule == StepRule::Fixed {
                break candidate;
            }
            let diff = &candidate - &x;
            let model = fx + g.dot(&diff) + diff.norm_squared() / (2.0 * step);
            if value(&candidate) <= model + 1e-15 * fx.abs().max(1.0) || step < 1e-16 {
                break candidate;
            }
            step *= 0.5;
        };
        x = next;
        let (r, scale) = mapping_residual(set, &x, gradient, mu)?;
        residual = r;
        if residual <= opts.grad_tol * scale {
            return Ok((x, residual, iter));
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iters,
        residual,
    })
}

/// Solves the action and budget subproblems of one round independently.
pub fn solve_per_round(problem: &PerRoundProblem<'_>, opts: &SolveOptions) -> Result<RoundSolution> {
    let (x, v, residual, iterations) = problem.solve_primal(opts)?;
    let reference = &problem.step.fairness_matrix * &x;
    let z = solve_auxiliary(problem.fairness, problem.kappa, problem.aux_box, &reference, opts)?;
    Ok(RoundSolution {
        x,
        z,
        v,
        residual,
        iterations,
    })
}

/// `argmin_{z ∈ box} w‖z‖_p − κ·z`.
///
/// When the minimizer is not unique the one closest to `reference` is
/// returned (for `p = ∞` this applies per coordinate on the optimal level
/// set of `‖z‖_∞`). Exact for `w = 0`, `p = 1` and `p = ∞`; other orders use
/// a one-dimensional search that is exact up to floating point.
pub fn solve_auxiliary(
    fairness: &FairnessSpec,
    kappa: &DVector<f64>,
    aux_box: &BoundingBox,
    reference: &DVector<f64>,
    opts: &SolveOptions,
) -> Result<DVector<f64>> {
    fairness.validate()?;
    let m = aux_box.dim();
    if kappa.len() != m || reference.len() != m {
        return Err(Error::shape("budget subproblem dimensions disagree"));
    }
    if fairness.weight == 0.0 || fairness.p == 1.0 {
        Ok(separable_budget(fairness.weight, kappa, aux_box, reference))
    } else if fairness.p.is_infinite() {
        Ok(max_norm_budget(fairness.weight, kappa, aux_box, reference))
    } else {
        Ok(norm_ball_budget(fairness, kappa, aux_box, opts.aux_iters))
    }
}

/// Per coordinate `w|z| − κz` over `[lo, hi]`.
fn separable_budget(w: f64, kappa: &DVector<f64>, aux_box: &BoundingBox, reference: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(kappa.len(), |i, _| {
        let (lo, hi) = (aux_box.lower[i], aux_box.upper[i]);
        let k = kappa[i];
        // Minimizer interval of the unconstrained piecewise-linear function.
        let (a, b) = if k > w {
            (f64::INFINITY, f64::INFINITY)
        } else if k == w {
            (0.0, f64::INFINITY)
        } else if k > -w {
            (0.0, 0.0)
        } else if k == -w {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (f64::NEG_INFINITY, f64::NEG_INFINITY)
        };
        let (a, b) = if w == 0.0 && k == 0.0 {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (a, b)
        };
        let (l, u) = (a.max(lo), b.min(hi));
        if l <= u {
            reference[i].clamp(l, u)
        } else if a > hi {
            hi
        } else {
            lo
        }
    })
}

/// Exact minimizer for `w‖z‖_∞ − κ·z` over a box, found by a one-dimensional
/// search over the level `s = ‖z‖_∞`.
fn max_norm_budget(w: f64, kappa: &DVector<f64>, aux_box: &BoundingBox, reference: &DVector<f64>) -> DVector<f64> {
    let m = kappa.len();
    let (lo, hi) = (&aux_box.lower, &aux_box.upper);
    let s_min = (0..m)
        .map(|i| {
            if lo[i] > 0.0 {
                lo[i]
            } else if hi[i] < 0.0 {
                -hi[i]
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);

    // Coordinate i keeps pulling (slope −|κ_i|) while s is below its breakpoint.
    let breakpoint = |i: usize| -> Option<f64> {
        if kappa[i] > 0.0 {
            Some(hi[i])
        } else if kappa[i] < 0.0 {
            Some(-lo[i])
        } else {
            None
        }
    };
    let right_slope = |s: f64| -> f64 {
        w - (0..m)
            .filter(|&i| breakpoint(i).is_some_and(|b| s < b))
            .map(|i| kappa[i].abs())
            .sum::<f64>()
    };
    let mut points: Vec<f64> = (0..m).filter_map(breakpoint).filter(|&b| b > s_min).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut s = s_min;
    let mut next = points.iter().copied();
    let mut slope = right_slope(s);
    while slope < 0.0 {
        match next.next() {
            Some(b) => {
                s = b;
                slope = right_slope(s);
            }
            None => break,
        }
    }
    if slope == 0.0 {
        // Flat stretch up to the next breakpoint: pick the level nearest the reference.
        let upper = points.iter().copied().find(|&b| b > s).unwrap_or(s);
        let ref_level = reference.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        s = ref_level.clamp(s, upper);
    }

    DVector::from_fn(m, |i, _| {
        if kappa[i] > 0.0 {
            hi[i].min(s)
        } else if kappa[i] < 0.0 {
            lo[i].max(-s)
        } else {
            reference[i].clamp(lo[i].max(-s), hi[i].min(s))
        }
    })
}

/// `1 < p < ∞`. Every minimizer lies on the curve
/// `z(μ) = clamp(μ sign(κ)|κ|^{q−1})`, which traces the maximizers of `κ·z`
/// over the box intersected with `‖z‖_p ≤ t` as `t` grows. The objective is
/// convex in `t`, so a golden-section search over `t` with a bisection on `μ`
/// for each level finds it.
fn norm_ball_budget(fairness: &FairnessSpec, kappa: &DVector<f64>, aux_box: &BoundingBox, iters: usize) -> DVector<f64> {
    let (w, p) = (fairness.weight, fairness.p);
    let (lo, hi) = (&aux_box.lower, &aux_box.upper);
    let m = kappa.len();
    let scale = kappa.amax();
    let origin = DVector::from_fn(m, |i, _| 0.0f64.clamp(lo[i], hi[i]));
    if scale == 0.0 {
        return origin;
    }
    let exponent = 1.0 / (p - 1.0);
    let dir = kappa.map(|k| k.signum() * (k.abs() / scale).powf(exponent));
    let curve = |mu: f64| DVector::from_fn(m, |i, _| (mu * dir[i]).clamp(lo[i], hi[i]));
    let far = DVector::from_fn(m, |i, _| {
        if dir[i] > 0.0 {
            hi[i]
        } else if dir[i] < 0.0 {
            lo[i]
        } else {
            origin[i]
        }
    });
    let saturation = (0..m)
        .filter(|&i| dir[i] != 0.0)
        .map(|i| lo[i].abs().max(hi[i].abs()) / dir[i].abs())
        .fold(0.0, f64::max);
    let (t_lo, t_hi) = (p_norm(&origin, p), p_norm(&far, p));
    let at_level = |t: f64| {
        if t >= t_hi {
            return far.clone();
        }
        let (mut a, mut b) = (0.0, saturation);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if p_norm(&curve(mid), p) < t {
                a = mid;
            } else {
                b = mid;
            }
        }
        curve(b)
    };
    let objective = |z: &DVector<f64>| w * p_norm(z, p) - kappa.dot(z);

    let mut best = (objective(&origin), origin.clone());
    let far_value = objective(&far);
    if far_value < best.0 {
        best = (far_value, far.clone());
    }
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (t_lo, t_hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (zc, zd) = (at_level(c), at_level(d));
    let (mut fc, mut fd) = (objective(&zc), objective(&zd));
    for (value, z) in [(fc, zc), (fd, zd)] {
        if value < best.0 {
            best = (value, z);
        }
    }
    for _ in 0..iters {
        if b - a <= 1e-14 * (1.0 + t_hi) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            let z = at_level(c);
            fc = objective(&z);
            if fc < best.0 {
                best = (fc, z);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            let z = at_level(d);
            fd = objective(&z);
            if fd < best.0 {
                best = (fd, z);
            }
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuadraticHitting;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn simplex() -> FeasibleSet {
        FeasibleSet::capped_simplex(1.0, v(&[1.0, 1.0]))
    }

    #[test]
    fn euclidean_budget_cases() {
        let opts = SolveOptions::default();
        let spec = FairnessSpec { weight: 1.0, p: 2.0 };
        let unit = BoundingBox::symmetric(2, 1.0);
        let reference = v(&[0.0, 0.0]);
        let z = solve_auxiliary(&spec, &v(&[0.3, 0.4]), &unit, &reference, &opts).unwrap();
        assert_abs_diff_eq!(z, v(&[0.0, 0.0]), epsilon = 1e-9);
        let z = solve_auxiliary(&spec, &v(&[3.0, 4.0]), &unit, &reference, &opts).unwrap();
        assert_abs_diff_eq!(z, v(&[1.0, 1.0]), epsilon = 1e-9);
        // z₁ = 1 and z₂/‖z‖ = 0.1.
        let z = solve_auxiliary(&spec, &v(&[3.0, 0.1]), &unit, &reference, &opts).unwrap();
        assert_abs_diff_eq!(z, v(&[1.0, 0.1 / 0.99f64.sqrt()]), epsilon = 1e-7);
    }

    #[test]
    fn hitting_minimizer_examples() {
        let opts = SolveOptions::default();
        let step = ContextStep::new(QuadraticHitting::centered(v(&[0.6, 0.6]), 20.0), DMatrix::identity(2, 2));
        let x = hitting_minimizer(&step, &simplex(), &opts).unwrap();
        assert_abs_diff_eq!(x, v(&[0.5, 0.5]), epsilon = 1e-12);

        let step = ContextStep::new(QuadraticHitting::centered(v(&[0.3, 0.7]), 4.0), DMatrix::identity(2, 2));
        let x = hitting_minimizer(&step, &simplex(), &opts).unwrap();
        assert_abs_diff_eq!(x, v(&[0.3, 0.7]), epsilon = 1e-12);

        let hitting = QuadraticHitting::new(v(&[1.0, 0.0]), 2.0, v(&[0.2, 0.0]), 0.0).unwrap();
        let step = ContextStep::new(hitting, DMatrix::identity(2, 2));
        let x = hitting_minimizer(&step, &FeasibleSet::unit_box(2), &opts).unwrap();
        assert_abs_diff_eq!(x, v(&[0.9, 0.0]), epsilon = 1e-12);
    }

    #[test]
    fn per_round_midpoint() {
        let step = ContextStep::new(QuadraticHitting::centered(v(&[1.0, 0.0]), 2.0), DMatrix::identity(2, 2));
        let set = simplex();
        let aux = BoundingBox::symmetric(2, 1.0);
        let fairness = FairnessSpec::max_norm(1.0);
        let x_prev = v(&[0.5, 0.5]);
        let kappa = v(&[0.0, 0.0]);
        let problem = PerRoundProblem {
            step: &step,
            action_set: &set,
            aux_box: &aux,
            fairness: &fairness,
            x_prev: &x_prev,
            kappa: &kappa,
            lambda1: 1.0,
            lambda2: 0.0,
            beta1: 2.0,
        };
        let opts = SolveOptions::default();
        let sol = solve_per_round(&problem, &opts).unwrap();
        assert_abs_diff_eq!(sol.x, v(&[0.75, 0.25]), epsilon = 1e-12);
        assert!(sol.residual <= 1e-8);

        let pg = SolveOptions {
            primal: PrimalMethod::ProjectedGradient,
            ..SolveOptions::default()
        };
        let (x, _, _, _) = problem.solve_primal(&pg).unwrap();
        assert_abs_diff_eq!(x, v(&[0.75, 0.25]), epsilon = 1e-8);
    }

    #[test]
    fn l1_budget_example() {
        let spec = FairnessSpec { weight: 1.0, p: 1.0 };
        let aux = BoundingBox::symmetric(2, 1.0);
        let z = solve_auxiliary(&spec, &v(&[2.0, 0.5]), &aux, &v(&[0.3, 0.3]), &SolveOptions::default()).unwrap();
        assert_eq!(z, v(&[1.0, 0.0]));
    }

    #[test]
    fn zero_weight_budget_tracks_reference() {
        let spec = FairnessSpec::none();
        let aux = BoundingBox::new(v(&[0.0, -1.0]), v(&[2.0, 1.0])).unwrap();
        let z = solve_auxiliary(&spec, &v(&[0.0, 0.0]), &aux, &v(&[0.4, -0.2]), &SolveOptions::default()).unwrap();
        assert_eq!(z, v(&[0.4, -0.2]));
        let z = solve_auxiliary(&spec, &v(&[1.0, -1.0]), &aux, &v(&[0.4, -0.2]), &SolveOptions::default()).unwrap();
        assert_eq!(z, v(&[2.0, -1.0]));
    }

    #[test]
    fn max_norm_budget_levels() {
        let spec = FairnessSpec::max_norm(1.0);
        let aux = BoundingBox::symmetric(3, 2.0);
        let opts = SolveOptions::default();
        // Total pull 0.9 < w: stay at the origin.
        let z = solve_auxiliary(&spec, &v(&[0.5, 0.4, 0.0]), &aux, &v(&[0.0; 3]), &opts).unwrap();
        assert_eq!(z, v(&[0.0, 0.0, 0.0]));
        // Pull 1.5 > w: go to the edge of the box.
        let z = solve_auxiliary(&spec, &v(&[1.0, -0.5, 0.0]), &aux, &v(&[0.0; 3]), &opts).unwrap();
        assert_eq!(z, v(&[2.0, -2.0, 0.0]));
    }
}
