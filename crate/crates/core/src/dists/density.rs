//! Log-densities. Points outside a support evaluate to negative infinity
//! rather than an error.

use super::params::{BetaParams, GammaParams, LogNormalParams};
use super::special::{ln_factorial, ln_gamma_unchecked, LN_SQRT_2PI};

pub fn log_pdf_gamma(x: f64, params: &GammaParams) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NEG_INFINITY;
    }
    gamma_log_normalizer(params) + (params.shape - 1.0) * x.ln() - params.rate * x
}

/// `shape·ln(rate) − lnΓ(shape)`.
pub(crate) fn gamma_log_normalizer(params: &GammaParams) -> f64 {
    params.shape * params.rate.ln() - ln_gamma_unchecked(params.shape)
}

pub fn log_pdf_beta(x: f64, params: &BetaParams) -> f64 {
    if !(x > 0.0 && x < 1.0) {
        return f64::NEG_INFINITY;
    }
    beta_log_normalizer(params) + (params.alpha - 1.0) * x.ln() + (params.beta - 1.0) * (-x).ln_1p()
}

/// `−ln B(alpha, beta)`.
pub(crate) fn beta_log_normalizer(params: &BetaParams) -> f64 {
    ln_gamma_unchecked(params.alpha + params.beta) - ln_gamma_unchecked(params.alpha) - ln_gamma_unchecked(params.beta)
}

/// Poisson log-mass `k·ln(rate) − rate − ln k!`.
///
/// Counts are unsigned so a negative count cannot reach this function. A zero
/// rate is a point mass at zero.
pub fn log_pmf_poisson(k: u64, rate: f64) -> f64 {
    if rate == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if !(rate > 0.0) {
        return f64::NEG_INFINITY;
    }
    let kf = k as f64;
    let term = if k == 0 { 0.0 } else { kf * rate.ln() };
    term - rate - ln_factorial(k)
}

pub fn log_pdf_lognormal(x: f64, params: &LogNormalParams) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NEG_INFINITY;
    }
    let lx = x.ln();
    let z = (lx - params.location) / params.scale;
    -lx - params.scale.ln() - LN_SQRT_2PI - 0.5 * z * z
}

pub fn log_pdf_standard_normal(z: f64) -> f64 {
    -LN_SQRT_2PI - 0.5 * z * z
}
