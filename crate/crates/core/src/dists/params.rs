//! Distribution parameter types and the mode/std conversions used to state
//! priors.
//!
//! Priors are specified by their mode and standard deviation. The gamma
//! conversion has a closed form; the beta conversion does not and is solved by
//! bisection on the concentration `c = alpha + beta - 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0 && rate.is_finite() && rate > 0.0) {
            return Err(Error::Domain(format!(
                "gamma needs shape > 0 and rate > 0, got ({shape}, {rate})"
            )));
        }
        Ok(Self { shape, rate })
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn std(&self) -> f64 {
        self.shape.sqrt() / self.rate
    }

    /// Mode; `None` when `shape <= 1` (density peaks at zero).
    pub fn mode(&self) -> Option<f64> {
        (self.shape > 1.0).then(|| (self.shape - 1.0) / self.rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!(
                "beta needs alpha > 0 and beta > 0, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn mode(&self) -> Option<f64> {
        (self.alpha > 1.0 && self.beta > 1.0).then(|| (self.alpha - 1.0) / (self.alpha + self.beta - 2.0))
    }
}

/// Normal distribution on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalParams {
    pub location: f64,
    pub scale: f64,
}

impl LogNormalParams {
    pub fn new(location: f64, scale: f64) -> Result<Self> {
        if !(location.is_finite() && scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!(
                "log-normal needs finite location and scale > 0, got ({location}, {scale})"
            )));
        }
        Ok(Self { location, scale })
    }

    pub fn mean(&self) -> f64 {
        (self.location + 0.5 * self.scale * self.scale).exp()
    }

    pub fn std(&self) -> f64 {
        let s2 = self.scale * self.scale;
        // exp(2μ + σ²)·(exp(σ²) − 1), written to avoid cancellation for tiny σ.
        (self.location + 0.5 * s2).exp() * s2.exp_m1().sqrt()
    }

    pub fn median(&self) -> f64 {
        self.location.exp()
    }

    pub fn mode(&self) -> f64 {
        (self.location - self.scale * self.scale).exp()
    }

    pub fn quantile(&self, q: f64) -> f64 {
        (self.location + self.scale * super::normal_quantile(q)).exp()
    }
}

/// Gamma parameters with the given mode and standard deviation.
///
/// Solves `(shape - 1) / rate = mode` and `shape / rate² = std²`, which gives
/// `rate = (mode + sqrt(mode² + 4 std²)) / (2 std²)` and `shape = 1 + mode·rate`.
pub fn gamma_from_mode_std(mode: f64, std: f64) -> Result<GammaParams> {
    if !(mode.is_finite() && mode > 0.0 && std.is_finite() && std > 0.0) {
        return Err(Error::Domain(format!(
            "gamma mode and std must be positive, got ({mode}, {std})"
        )));
    }
    let var = std * std;
    let rate = (mode + (mode * mode + 4.0 * var).sqrt()) / (2.0 * var);
    GammaParams::new(1.0 + mode * rate, rate)
}

const BETA_C_LO: f64 = 1e-6;
const BETA_C_HI: f64 = 1e6;
const BETA_C_TOL: f64 = 1e-12;

/// Beta parameters with the given interior mode and standard deviation.
///
/// With `alpha = 1 + mode·c` and `beta = 1 + (1 - mode)·c` the mode is fixed
/// for every `c > 0`, and the variance falls monotonically from 1/12-ish at
/// `c → 0` to zero. Bisection on `c` over `[1e-6, 1e6]` finds the match.
pub fn beta_from_mode_std(mode: f64, std: f64) -> Result<BetaParams> {
    if !(mode > 0.0 && mode < 1.0) || !(std.is_finite() && std > 0.0) {
        return Err(Error::Domain(format!(
            "beta mode must lie in (0, 1) and std be positive, got ({mode}, {std})"
        )));
    }
    let target = std * std;
    let excess = |c: f64| {
        let a = 1.0 + mode * c;
        let b = 1.0 + (1.0 - mode) * c;
        let s = a + b;
        a * b / (s * s * (s + 1.0)) - target
    };

    let (mut lo, mut hi) = (BETA_C_LO, BETA_C_HI);
    let (f_lo, f_hi) = (excess(lo), excess(hi));
    if f_lo < 0.0 || f_hi > 0.0 {
        return Err(Error::InfeasibleParameterization(format!(
            "no beta with alpha, beta > 1 has mode {mode} and std {std}"
        )));
    }
    // Relative bisection; the bracket spans twelve decades.
    while (hi - lo) > BETA_C_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    BetaParams::new(1.0 + mode * c, 1.0 + (1.0 - mode) * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gamma_fixtures_match_numerical_solve() {
        // Expected values from scipy.optimize.fsolve on the two moment equations.
        let cases = [
            (150.0, 150.0, 2.618_033_988_749_894_5, 0.010_786_893_258_332_628),
            (1e-4, 1e-4, 2.618_033_988_749_895, 16_180.339_887_498_954),
            (1000.0, 1000.0, 2.618_033_988_749_895, 0.001_618_033_988_749_894_3),
        ];
        for (mode, std, shape, rate) in cases {
            let g = gamma_from_mode_std(mode, std).unwrap();
            assert!(rel(g.shape, shape) < 1e-12, "{g:?}");
            assert!(rel(g.rate, rate) < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn gamma_round_trip_grid() {
        let grid = [1e-4, 1e-2, 1.0, 150.0, 1e4];
        for &mode in &grid {
            for &std in &grid {
                let g = gamma_from_mode_std(mode, std).unwrap();
                assert!(g.shape > 1.0);
                // shape − 1 cannot be stored more precisely than ε·shape, which
                // matters once mode/std falls far below one.
                let mode_tol = 1e-9f64.max(4.0 * f64::EPSILON * g.shape / (g.shape - 1.0));
                assert!(rel(g.mode().unwrap(), mode) < mode_tol, "mode {mode} std {std}");
                assert!(rel(g.std(), std) < 1e-9, "mode {mode} std {std}");
                if mode == std {
                    assert!(rel(g.mode().unwrap(), mode) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(gamma_from_mode_std(0.0, 1.0).is_err());
        assert!(gamma_from_mode_std(1.0, -1.0).is_err());
        assert!(gamma_from_mode_std(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn beta_fixtures_match_brentq() {
        // Expected values from scipy.optimize.brentq on the same equation.
        let b = beta_from_mode_std(0.1, 0.1).unwrap();
        assert!(rel(b.alpha, 2.065_699_175_384_084_5) < 1e-9, "{b:?}");
        assert!(rel(b.beta, 10.591_292_578_456_76) < 1e-9, "{b:?}");

        let b = beta_from_mode_std(0.2, 0.05).unwrap();
        assert!(rel(b.alpha, 13.635_103_804_578_74) < 1e-9, "{b:?}");
        assert!(rel(b.beta, 51.540_415_218_314_96) < 1e-9, "{b:?}");
        assert!((b.mode().unwrap() - 0.2).abs() < 1e-10);
        assert!((b.std() - 0.05).abs() < 1e-10);
    }

    #[test]
    fn beta_symmetric_mode_gives_equal_shapes() {
        for std in [0.01, 0.05, 0.1, 0.2] {
            let b = beta_from_mode_std(0.5, std).unwrap();
            assert!(rel(b.alpha, b.beta) < 1e-12, "{b:?}");
        }
    }

    #[test]
    fn beta_infeasible_std_is_reported() {
        assert!(matches!(
            beta_from_mode_std(0.3, 0.4),
            Err(Error::InfeasibleParameterization(_))
        ));
        assert!(matches!(beta_from_mode_std(1.0, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn beta_moments_by_monte_carlo() {
        use rand_distr::{Beta, Distribution};
        let b = beta_from_mode_std(0.1, 0.1).unwrap();
        let dist = Beta::new(b.alpha, b.beta).unwrap();
        let mut rng = crate::dists::StreamRng::new(crate::dists::RngState::new(11, 0));
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| dist.sample(rng.engine())).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() - 0.1).abs() < 2e-3, "std {}", var.sqrt());
        assert!((mean - b.mean()).abs() < 4.0 * 0.1 / (n as f64).sqrt());
    }

    #[test]
    fn lognormal_moments() {
        let ln = LogNormalParams::new(0.3, 0.7).unwrap();
        assert!(rel(ln.mean(), (0.3f64 + 0.245).exp()) < 1e-14);
        assert!(rel(ln.mode(), (0.3f64 - 0.49).exp()) < 1e-14);
        assert!(rel(ln.quantile(0.5), ln.median()) < 1e-12);
    }
}
