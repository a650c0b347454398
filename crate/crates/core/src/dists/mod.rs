//! Probability kernel: special functions, parameter conversions, densities,
//! random streams and reparameterization transforms.

mod density;
mod params;
mod rng;
mod special;
mod transform;

pub(crate) use density::{beta_log_normalizer, gamma_log_normalizer};
pub use density::{log_pdf_beta, log_pdf_gamma, log_pdf_lognormal, log_pdf_standard_normal, log_pmf_poisson};
pub use params::{beta_from_mode_std, gamma_from_mode_std, BetaParams, GammaParams, LogNormalParams};
pub use rng::{sample_standard_normal, RngState, StreamRng};
pub(crate) use special::ln_factorial;
pub use special::log_gamma_fn;
pub use transform::{
    logit, sigmoid, transform_positive, transform_unit_interval, Transformed, MAX_LOG_POSITIVE, UNIT_INTERVAL_CEIL,
    UNIT_INTERVAL_FLOOR,
};
pub(crate) use transform::{positive_from_log, unit_from_logit};

/// Standard-normal quantile function.
pub fn normal_quantile(q: f64) -> f64 {
    if q <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if q >= 1.0 {
        return f64::INFINITY;
    }
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * q)
}
