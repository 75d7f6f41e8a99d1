//! Mirror-descent machinery for the dual variable `κ`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to entropy coordinates before taking logarithms.
pub const ENTROPY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// `h(κ) = ½‖κ‖²`.
    SquaredL2,
    /// `h(κ) = Σ κ_i ln κ_i`, defined on the positive orthant.
    NegativeEntropy,
}

/// A reference function `h` with strong convexity `l` and smoothness `β₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFunction {
    pub kind: ReferenceKind,
    pub l: f64,
    pub beta2: f64,
}

impl Default for ReferenceFunction {
    fn default() -> Self {
        ReferenceFunction::squared_l2()
    }
}

impl ReferenceFunction {
    pub fn squared_l2() -> Self {
        ReferenceFunction {
            kind: ReferenceKind::SquaredL2,
            l: 1.0,
            beta2: 1.0,
        }
    }

    /// Negative entropy restricted to `κ ∈ [kappa_min, kappa_max]^M`,
    /// where it is `1/kappa_max`-strongly convex and `1/kappa_min`-smooth.
    pub fn negative_entropy(kappa_min: f64, kappa_max: f64) -> Result<Self> {
        if !(kappa_min > 0.0) || !(kappa_max >= kappa_min) || !kappa_max.is_finite() {
            return Err(Error::domain(format!(
                "entropy bounds need 0 < kappa_min <= kappa_max < inf, got [{kappa_min}, {kappa_max}]"
            )));
        }
        Ok(ReferenceFunction {
            kind: ReferenceKind::NegativeEntropy,
            l: 1.0 / kappa_max,
            beta2: 1.0 / kappa_min,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0) || !(self.beta2 >= self.l) || !self.beta2.is_finite() {
            return Err(Error::domain(format!(
                "reference constants need 0 < l <= beta2, got l = {}, beta2 = {}",
                self.l, self.beta2
            )));
        }
        if self.kind == ReferenceKind::SquaredL2 && (self.l != 1.0 || self.beta2 != 1.0) {
            return Err(Error::domain("squared l2 reference has l = beta2 = 1"));
        }
        Ok(())
    }

    fn check_domain(&self, x: &DVector<f64>) -> Result<()> {
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::non_finite(format!("dual vector coordinate {i}")));
        }
        if self.kind == ReferenceKind::NegativeEntropy {
            if let Some(i) = x.iter().position(|&v| v <= 0.0) {
                return Err(Error::domain(format!(
                    "negative entropy needs positive coordinates, coordinate {i} is {}",
                    x[i]
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match self.kind {
            ReferenceKind::SquaredL2 => 0.5 * x.norm_squared(),
            ReferenceKind::NegativeEntropy => x.iter().map(|&v| v * v.ln()).sum(),
        })
    }

    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_domain(x)?;
        Ok(match self.kind {
            ReferenceKind::SquaredL2 => x.clone(),
            ReferenceKind::NegativeEntropy => x.map(|v| v.max(ENTROPY_FLOOR).ln() + 1.0),
        })
    }

    /// `V_h(x, y) = h(x) − h(y) − ∇h(y)·(x − y)`.
    pub fn bregman(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        bregman(self, x, y)
    }
}

/// Bregman divergence of `h` between `x` and `y`.
pub fn bregman(h: &ReferenceFunction, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::shape(format!(
            "bregman arguments have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    h.check_domain(x)?;
    h.check_domain(y)?;
    let value = match h.kind {
        ReferenceKind::SquaredL2 => 0.5 * (x - y).norm_squared(),
        ReferenceKind::NegativeEntropy => x
            .iter()
            .zip(y.iter())
            .map(|(&a, &b)| a * (a.ln() - b.ln()) - a + b)
            .sum(),
    };
    Ok(value.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub kappa: DVector<f64>,
    pub clamp_nonnegative: bool,
}

impl DualState {
    pub fn new(kappa: DVector<f64>, clamp_nonnegative: bool) -> Self {
        DualState {
            kappa,
            clamp_nonnegative,
        }
    }

    pub fn validate(&self, h: &ReferenceFunction) -> Result<()> {
        h.check_domain(&self.kappa)?;
        if self.clamp_nonnegative && self.kappa.iter().any(|&v| v < 0.0) {
            return Err(Error::domain("clamped dual state has a negative coordinate"));
        }
        Ok(())
    }
}

/// One mirror-descent step `κ′ = argmin ⟨d, κ⟩ + V_h(κ, κ_t)/η`.
///
/// For `SquaredL2` this is `κ − η d`, followed by `[·]^+` when the state is
/// clamped. For `NegativeEntropy` it is the multiplicative rule
/// `κ_i exp(−η d_i)`, carried out in log space.
pub fn dual_update(h: &ReferenceFunction, state: &DualState, d: &DVector<f64>, eta: f64) -> Result<DualState> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::domain(format!("learning rate must be positive and finite, got {eta}")));
    }
    if d.len() != state.kappa.len() {
        return Err(Error::shape(format!(
            "subgradient has length {}, dual has length {}",
            d.len(),
            state.kappa.len()
        )));
    }
    if let Some(i) = d.iter().position(|v| !v.is_finite()) {
        return Err(Error::non_finite(format!("dual subgradient coordinate {i}")));
    }
    let kappa = match h.kind {
        ReferenceKind::SquaredL2 => {
            let mut next = &state.kappa - d * eta;
            if state.clamp_nonnegative {
                next.apply(|v| *v = v.max(0.0));
            }
            next
        }
        ReferenceKind::NegativeEntropy => {
            let mut next = DVector::zeros(d.len());
            for i in 0..d.len() {
                let log_next = state.kappa[i].max(ENTROPY_FLOOR).ln() - eta * d[i];
                if log_next > f64::MAX.ln() {
                    return Err(Error::Numeric {
                        coordinate: i,
                        message: format!("multiplicative update overflows (log value {log_next:.3e})"),
                    });
                }
                next[i] = log_next.exp().max(ENTROPY_FLOOR);
            }
            next
        }
    };
    Ok(DualState {
        kappa,
        clamp_nonnegative: state.clamp_nonnegative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn bregman_examples() {
        let sq = ReferenceFunction::squared_l2();
        assert_abs_diff_eq!(sq.bregman(&v(&[1.0, 2.0]), &v(&[0.0, 0.0])).unwrap(), 2.5);
        assert_eq!(sq.bregman(&v(&[0.3, -4.0]), &v(&[0.3, -4.0])).unwrap(), 0.0);
        let ent = ReferenceFunction::negative_entropy(0.01, 10.0).unwrap();
        assert_abs_diff_eq!(ent.bregman(&v(&[1.0]), &v(&[E])).unwrap(), E - 2.0, epsilon = 1e-12);
        assert_eq!(ent.bregman(&v(&[0.7, 2.0]), &v(&[0.7, 2.0])).unwrap(), 0.0);
        assert!(matches!(ent.bregman(&v(&[0.0]), &v(&[1.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn additive_updates() {
        let sq = ReferenceFunction::squared_l2();
        let s = dual_update(&sq, &DualState::new(v(&[3.0]), false), &v(&[0.5]), 0.001).unwrap();
        assert_abs_diff_eq!(s.kappa[0], 2.9995, epsilon = 1e-15);
        let s = dual_update(&sq, &DualState::new(v(&[0.1]), true), &v(&[200.0]), 0.001).unwrap();
        assert_eq!(s.kappa[0], 0.0);
        let s = dual_update(&sq, &DualState::new(v(&[0.1]), false), &v(&[200.0]), 0.001).unwrap();
        assert_abs_diff_eq!(s.kappa[0], -0.1, epsilon = 1e-15);
    }

    #[test]
    fn multiplicative_update() {
        let ent = ReferenceFunction::negative_entropy(1e-3, 10.0).unwrap();
        let s = dual_update(&ent, &DualState::new(v(&[1.0]), false), &v(&[1.0]), 0.5).unwrap();
        assert_abs_diff_eq!(s.kappa[0], (-0.5f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn entropy_overflow_names_coordinate() {
        let ent = ReferenceFunction::negative_entropy(1e-3, 10.0).unwrap();
        let err = dual_update(&ent, &DualState::new(v(&[1.0, 1.0]), false), &v(&[0.0, -1e6]), 1.0);
        assert!(matches!(err, Err(Error::Numeric { coordinate: 1, .. })));
    }

    #[test]
    fn entropy_constants() {
        let ent = ReferenceFunction::negative_entropy(0.5, 4.0).unwrap();
        assert_eq!(ent.l, 0.25);
        assert_eq!(ent.beta2, 2.0);
        assert!(ReferenceFunction::negative_entropy(0.0, 1.0).is_err());
        assert!(ReferenceFunction::negative_entropy(2.0, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_eta() {
        let sq = ReferenceFunction::squared_l2();
        let s = DualState::new(v(&[1.0]), true);
        assert!(dual_update(&sq, &s, &v(&[1.0]), 0.0).is_err());
        assert!(dual_update(&sq, &s, &v(&[1.0, 2.0]), 0.1).is_err());
    }
}
