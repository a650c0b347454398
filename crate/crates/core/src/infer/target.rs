use serde::{Deserialize, Serialize};

use crate::dists::{positive_from_log, unit_from_logit};
use crate::model::JointDensity;

/// Constraint on a latent, fixing the map from its unconstrained coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    /// `x = exp(u)`
    Positive,
    /// `x = sigmoid(u)`
    UnitInterval,
    /// `x = u`
    Real,
}

impl Support {
    /// Natural-space value and `ln |dx/du|` and its derivative in `u`.
    pub fn forward(self, u: f64) -> (f64, f64, f64) {
        match self {
            Support::Positive => (positive_from_log(u).value, u, 1.0),
            Support::UnitInterval => {
                let t = unit_from_logit(u);
                let p = t.value;
                let d = if t.clamped { 0.0 } else { 1.0 - 2.0 * p };
                (p, p.ln() + (-p).ln_1p(), d)
            }
            Support::Real => (u, 0.0, 0.0),
        }
    }

    pub fn to_unconstrained(self, x: f64) -> f64 {
        match self {
            Support::Positive => x.ln(),
            Support::UnitInterval => crate::dists::logit(x),
            Support::Real => x,
        }
    }
}

/// A log-density over latents, evaluated in unconstrained coordinates.
///
/// `log_density` returns the natural-space log-density at `x(u)` without the
/// Jacobian of the transform; the gradient written to `grad` is with respect
/// to `u`.
pub trait LatentTarget {
    fn supports(&self) -> &[Support];

    fn dim(&self) -> usize {
        self.supports().len()
    }

    fn log_density(&self, u: &[f64], grad: Option<&mut [f64]>) -> f64;
}

/// [`JointDensity`] with its support layout attached.
#[derive(Debug, Clone)]
pub struct ModelTarget {
    pub density: JointDensity,
    supports: Vec<Support>,
}

impl ModelTarget {
    pub fn new(density: JointDensity) -> Self {
        let mut supports = vec![Support::Positive; density.dim() - 1];
        supports.push(Support::UnitInterval);
        Self { density, supports }
    }
}

impl LatentTarget for ModelTarget {
    fn supports(&self) -> &[Support] {
        &self.supports
    }

    fn log_density(&self, u: &[f64], grad: Option<&mut [f64]>) -> f64 {
        self.density.log_density(u, grad)
    }
}
