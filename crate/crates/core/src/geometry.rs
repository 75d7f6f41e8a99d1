//! Per-round action sets and exact Euclidean projections onto them.
//!
//! Two families cover every instance in this crate: axis-aligned boxes and
//! capped simplices `{x : Σ x_i = w, 0 ≤ x_i ≤ M_i}`. Projection onto a box
//! is a componentwise clamp; projection onto a capped simplex solves for the
//! scalar multiplier `τ` of the equality constraint so that
//! `Σ clamp(p_i − τ, 0, M_i) = w`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residual on the equality constraint at which bisection stops.
const BISECTION_RESIDUAL: f64 = 1e-12;
const BISECTION_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeasibleSet {
    Box {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
    CappedSimplex {
        total: f64,
        caps: DVector<f64>,
    },
}

impl FeasibleSet {
    pub fn unit_box(dim: usize) -> Self {
        FeasibleSet::Box {
            lower: DVector::zeros(dim),
            upper: DVector::from_element(dim, 1.0),
        }
    }

    pub fn interval(lower: f64, upper: f64) -> Self {
        FeasibleSet::Box {
            lower: DVector::from_element(1, lower),
            upper: DVector::from_element(1, upper),
        }
    }

    pub fn capped_simplex(total: f64, caps: DVector<f64>) -> Self {
        FeasibleSet::CappedSimplex { total, caps }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::CappedSimplex { caps, .. } => caps.len(),
        }
    }

    /// Checks the set is well formed and nonempty.
    pub fn validate(&self) -> Result<()> {
        match self {
            FeasibleSet::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return Err(Error::shape(format!(
                        "box bounds have lengths {} and {}",
                        lower.len(),
                        upper.len()
                    )));
                }
                if lower.iter().chain(upper.iter()).any(|v| v.is_nan()) {
                    return Err(Error::non_finite("box bounds"));
                }
                if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
                    return Err(Error::Infeasible(format!(
                        "box lower bound {} exceeds upper bound {} at coordinate {i}",
                        lower[i], upper[i]
                    )));
                }
                Ok(())
            }
            FeasibleSet::CappedSimplex { total, caps } => {
                if !total.is_finite() || caps.iter().any(|c| !c.is_finite()) {
                    return Err(Error::non_finite("capped simplex parameters"));
                }
                if caps.iter().any(|&c| c <= 0.0) {
                    return Err(Error::domain("capped simplex caps must be positive"));
                }
                let capacity = caps.sum();
                if *total < 0.0 || *total > capacity {
                    return Err(Error::Infeasible(format!(
                        "capped simplex total {total} outside [0, {capacity}]"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Euclidean projection of `point` onto the set.
    pub fn project(&self, point: &DVector<f64>) -> Result<DVector<f64>> {
        self.validate()?;
        if point.len() != self.dim() {
            return Err(Error::shape(format!(
                "point has dimension {}, set has dimension {}",
                point.len(),
                self.dim()
            )));
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::non_finite("projection input"));
        }
        Ok(match self {
            FeasibleSet::Box { lower, upper } => {
                DVector::from_fn(point.len(), |i, _| point[i].clamp(lower[i], upper[i]))
            }
            FeasibleSet::CappedSimplex { total, caps } => project_capped_simplex(point, *total, caps),
        })
    }

    /// True iff every constraint holds to within `tol` (absolute).
    pub fn is_feasible(&self, point: &DVector<f64>, tol: f64) -> bool {
        if point.len() != self.dim() || point.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            FeasibleSet::Box { lower, upper } => (0..point.len())
                .all(|i| point[i] >= lower[i] - tol && point[i] <= upper[i] + tol),
            FeasibleSet::CappedSimplex { total, caps } => {
                (point.sum() - total).abs() <= tol
                    && (0..point.len()).all(|i| point[i] >= -tol && point[i] <= caps[i] + tol)
            }
        }
    }

    /// Minimizes the linear function `direction · x` over the set.
    ///
    /// Boxes pick the lower bound wherever the direction is nonnegative.
    /// Capped simplices fill coordinates greedily in increasing order of
    /// `direction`, ties by index.
    pub fn linear_minimizer(&self, direction: &DVector<f64>) -> Result<DVector<f64>> {
        self.validate()?;
        if direction.len() != self.dim() {
            return Err(Error::shape("direction dimension mismatch"));
        }
        Ok(match self {
            FeasibleSet::Box { lower, upper } => DVector::from_fn(direction.len(), |i, _| {
                if direction[i] >= 0.0 {
                    lower[i]
                } else {
                    upper[i]
                }
            }),
            FeasibleSet::CappedSimplex { total, caps } => {
                let mut order: Vec<usize> = (0..direction.len()).collect();
                order.sort_by(|&a, &b| direction[a].total_cmp(&direction[b]).then(a.cmp(&b)));
                let mut x = DVector::zeros(direction.len());
                let mut remaining = *total;
                for i in order {
                    if remaining <= 0.0 {
                        break;
                    }
                    let fill = caps[i].min(remaining);
                    x[i] = fill;
                    remaining -= fill;
                }
                x
            }
        })
    }

    /// Range `[min, max]` of `row · x` over the set.
    pub fn linear_range(&self, row: &DVector<f64>) -> Result<(f64, f64)> {
        let lo = self.linear_minimizer(row)?;
        let hi = self.linear_minimizer(&(-row))?;
        Ok((row.dot(&lo), row.dot(&hi)))
    }

    /// Upper bound on the Euclidean distance between two points of the set.
    ///
    /// Exact for boxes. For capped simplices uses `‖x − y‖₁ ≤ 2w` together
    /// with `|x_i − y_i| ≤ M_i`.
    pub fn diameter_bound(&self) -> f64 {
        match self {
            FeasibleSet::Box { lower, upper } => (upper - lower).norm(),
            FeasibleSet::CappedSimplex { total, caps } => {
                let by_caps = caps.norm();
                let by_mass = (2.0 * total * caps.max()).sqrt();
                by_caps.min(by_mass)
            }
        }
    }
}

/// Euclidean projection onto a set.
pub fn project(set: &FeasibleSet, point: &DVector<f64>) -> Result<DVector<f64>> {
    set.project(point)
}

/// Feasibility test with absolute tolerance.
pub fn is_feasible(set: &FeasibleSet, point: &DVector<f64>, tol: f64) -> bool {
    set.is_feasible(point, tol)
}

fn clamped_sum(point: &DVector<f64>, caps: &DVector<f64>, tau: f64) -> f64 {
    point
        .iter()
        .zip(caps.iter())
        .map(|(&p, &c)| (p - tau).clamp(0.0, c))
        .sum()
}

fn project_capped_simplex(point: &DVector<f64>, total: f64, caps: &DVector<f64>) -> DVector<f64> {
    let n = point.len();
    // At tau = max(p) every coordinate clamps to 0; at tau = min(p - cap)
    // every coordinate sits at its cap. The clamped sum is nonincreasing in tau.
    let mut hi = point.max();
    let mut lo = (0..n).map(|i| point[i] - caps[i]).fold(f64::INFINITY, f64::min);
    let mut tau = 0.5 * (lo + hi);
    for _ in 0..BISECTION_MAX_ITERS {
        tau = 0.5 * (lo + hi);
        let residual = clamped_sum(point, caps, tau) - total;
        if residual.abs() < BISECTION_RESIDUAL {
            break;
        }
        if residual > 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
    }

    // Polish: with the active set fixed, tau solves a linear equation exactly.
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut fixed_sum = 0.0;
    for i in 0..n {
        let v = point[i] - tau;
        if v <= 0.0 {
            continue;
        } else if v >= caps[i] {
            fixed_sum += caps[i];
        } else {
            free_sum += point[i];
            free_count += 1;
        }
    }
    if free_count > 0 {
        let exact = (free_sum + fixed_sum - total) / free_count as f64;
        let consistent = (0..n).all(|i| {
            let before = point[i] - tau;
            let after = point[i] - exact;
            let class = |v: f64| {
                if v <= 0.0 {
                    0
                } else if v >= caps[i] {
                    2
                } else {
                    1
                }
            };
            class(before) == class(after)
        });
        if consistent {
            tau = exact;
        }
    }
    DVector::from_fn(n, |i, _| (point[i] - tau).clamp(0.0, caps[i]))
}

/// Coordinatewise bounding box, used for the auxiliary budget set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl BoundingBox {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        FeasibleSet::Box {
            lower: lower.clone(),
            upper: upper.clone(),
        }
        .validate()?;
        Ok(BoundingBox { lower, upper })
    }

    pub fn symmetric(dim: usize, radius: f64) -> Self {
        BoundingBox {
            lower: DVector::from_element(dim, -radius),
            upper: DVector::from_element(dim, radius),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn diagonal(&self) -> f64 {
        (&self.upper - &self.lower).norm()
    }

    pub fn contains(&self, point: &DVector<f64>, tol: f64) -> bool {
        point.len() == self.dim()
            && (0..point.len())
                .all(|i| point[i] >= self.lower[i] - tol && point[i] <= self.upper[i] + tol)
    }

    pub fn clamp(&self, point: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(point.len(), |i, _| point[i].clamp(self.lower[i], self.upper[i]))
    }

    pub fn as_set(&self) -> FeasibleSet {
        FeasibleSet::Box {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn symmetric_capped_projection() {
        let set = FeasibleSet::capped_simplex(1.0, v(&[1.0, 1.0]));
        let p = set.project(&v(&[0.9, 0.9])).unwrap();
        assert_abs_diff_eq!(p, v(&[0.5, 0.5]), epsilon = 1e-12);
    }

    #[test]
    fn capped_projection_hits_cap() {
        let set = FeasibleSet::capped_simplex(1.0, v(&[1.0, 1.0]));
        let p = set.project(&v(&[2.0, 0.0])).unwrap();
        assert_abs_diff_eq!(p, v(&[1.0, 0.0]), epsilon = 1e-12);
    }

    #[test]
    fn box_projection_clamps() {
        let set = FeasibleSet::unit_box(2);
        let p = set.project(&v(&[-0.3, 1.7])).unwrap();
        assert_eq!(p, v(&[0.0, 1.0]));
    }

    #[test]
    fn infeasible_capped_simplex() {
        let set = FeasibleSet::capped_simplex(3.0, v(&[1.0, 1.0]));
        assert!(matches!(set.project(&v(&[0.0, 0.0])), Err(Error::Infeasible(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let set = FeasibleSet::unit_box(2);
        assert!(matches!(set.project(&v(&[0.0])), Err(Error::Shape(_))));
    }

    #[test]
    fn feasibility_checks() {
        let set = FeasibleSet::capped_simplex(1.0, v(&[1.0, 1.0]));
        assert!(set.is_feasible(&v(&[0.5, 0.5]), 1e-9));
        assert!(!set.is_feasible(&v(&[0.6, 0.6]), 1e-9));
        let unit = FeasibleSet::unit_box(2);
        assert!(unit.is_feasible(&v(&[1.0 + 1e-10, 0.0]), 1e-9));
    }

    #[test]
    fn greedy_linear_minimizer() {
        let set = FeasibleSet::capped_simplex(1.5, v(&[1.0, 1.0, 1.0]));
        let x = set.linear_minimizer(&v(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(x, v(&[0.0, 1.0, 0.5]));
        let (lo, hi) = set.linear_range(&v(&[3.0, 1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(lo, 2.0);
        assert_abs_diff_eq!(hi, 4.0);
    }

    #[test]
    fn zero_total_projects_to_origin() {
        let set = FeasibleSet::capped_simplex(0.0, v(&[1.0, 2.0]));
        let p = set.project(&v(&[0.4, -1.0])).unwrap();
        assert_abs_diff_eq!(p.sum(), 0.0, epsilon = 1e-12);
        assert!(set.is_feasible(&p, 1e-12));
    }
}
