use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step: u64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(dim: usize, config: AdamConfig) -> Self {
        Self {
            first_moment: vec![0.0; dim],
            second_moment: vec![0.0; dim],
            step: 0,
            config,
        }
    }
}

/// One bias-corrected Adam update, moving `params` *up* the gradient.
pub fn adam_step(state: &mut AdamState, grads: &[f64], params: &mut [f64]) -> Result<()> {
    let dim = state.first_moment.len();
    if grads.len() != dim || params.len() != dim {
        return Err(Error::Contract(format!(
            "adam state has dimension {dim}, got {} gradients and {} parameters",
            grads.len(),
            params.len()
        )));
    }
    let AdamConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for i in 0..dim {
        let g = grads[i];
        let m = beta1 * state.first_moment[i] + (1.0 - beta1) * g;
        let v = beta2 * state.second_moment[i] + (1.0 - beta2) * g * g;
        state.first_moment[i] = m;
        state.second_moment[i] = v;
        params[i] += learning_rate * (m / c1) / ((v / c2).sqrt() + epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut s = AdamState::new(3, AdamConfig::default());
        let mut p = vec![0.0, 1.0, -1.0];
        adam_step(&mut s, &[5.0, -0.2, 1e3], &mut p).unwrap();
        assert!((p[0] - 1e-3).abs() < 1e-9);
        assert!((p[1] - (1.0 - 1e-3)).abs() < 1e-9);
        assert!((p[2] - (-1.0 + 1e-3)).abs() < 1e-9);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn zero_gradient_decays_moments() {
        let mut s = AdamState::new(1, AdamConfig::default());
        let mut p = vec![0.0];
        adam_step(&mut s, &[1.0], &mut p).unwrap();
        let (m, v) = (s.first_moment[0], s.second_moment[0]);
        let mut fresh = AdamState::new(1, AdamConfig::default());
        let mut q = vec![2.0];
        adam_step(&mut fresh, &[0.0], &mut q).unwrap();
        assert_eq!(q[0], 2.0);
        adam_step(&mut s, &[0.0], &mut p).unwrap();
        assert_eq!(s.first_moment[0], 0.9 * m);
        assert_eq!(s.second_moment[0], 0.999 * v);
    }

    #[test]
    fn identical_sequences_give_identical_paths() {
        let grads: Vec<[f64; 2]> = (0..50).map(|i| [(i as f64).sin(), (i as f64 * 0.3).cos()]).collect();
        let run = || {
            let mut s = AdamState::new(2, AdamConfig::default());
            let mut p = vec![0.5, -0.5];
            for g in &grads {
                adam_step(&mut s, g, &mut p).unwrap();
            }
            p
        };
        let (a, b) = (run(), run());
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        assert_eq!(a[1].to_bits(), b[1].to_bits());
    }

    #[test]
    fn dimension_mismatch() {
        let mut s = AdamState::new(2, AdamConfig::default());
        assert!(adam_step(&mut s, &[1.0], &mut [0.0, 0.0]).is_err());
    }
}
