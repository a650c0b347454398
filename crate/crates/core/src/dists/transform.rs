//! Reparameterization maps from a standard-normal draw to a constrained value.

use super::params::LogNormalParams;

/// Largest log-value passed to `exp` by [`transform_positive`]; beyond it the
/// result is clamped to `exp(MAX_LOG_POSITIVE)`.
pub const MAX_LOG_POSITIVE: f64 = 700.0;

/// Bounds applied to [`transform_unit_interval`] outputs.
pub const UNIT_INTERVAL_FLOOR: f64 = 1e-12;
pub const UNIT_INTERVAL_CEIL: f64 = 1.0 - 1e-12;

/// Result of a transform that may have saturated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transformed {
    pub value: f64,
    pub clamped: bool,
}

/// `exp(location + scale·eps)`, clamped at `exp(MAX_LOG_POSITIVE)`.
pub fn transform_positive(eps: f64, params: &LogNormalParams) -> Transformed {
    positive_from_log(params.location + params.scale * eps)
}

pub(crate) fn positive_from_log(u: f64) -> Transformed {
    if u > MAX_LOG_POSITIVE {
        Transformed {
            value: MAX_LOG_POSITIVE.exp(),
            clamped: true,
        }
    } else {
        Transformed {
            value: u.exp(),
            clamped: false,
        }
    }
}

/// `sigmoid(location + scale·eps)`, clamped to `[1e-12, 1 − 1e-12]`.
pub fn transform_unit_interval(eps: f64, location: f64, scale: f64) -> Transformed {
    unit_from_logit(location + scale * eps)
}

pub(crate) fn unit_from_logit(u: f64) -> Transformed {
    let raw = sigmoid(u);
    if raw < UNIT_INTERVAL_FLOOR {
        Transformed {
            value: UNIT_INTERVAL_FLOOR,
            clamped: true,
        }
    } else if raw > UNIT_INTERVAL_CEIL {
        Transformed {
            value: UNIT_INTERVAL_CEIL,
            clamped: true,
        }
    } else {
        Transformed {
            value: raw,
            clamped: false,
        }
    }
}

pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}
