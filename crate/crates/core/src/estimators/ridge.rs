use nalgebra::{DMatrix, DVector};

use crate::error::{GmfgError, Result};

/// Per-step ridge statistics for the transition model `P_h = θ_h φ`:
/// `Λ_h = I + Σ_j φ_j φ_jᵀ` and `M_h = Σ_j δ(s_{j,h+1}) φ_jᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeState {
    dim: usize,
    states: usize,
    gram: Vec<DMatrix<f64>>,
    moments: Vec<DMatrix<f64>>,
    samples: Vec<u64>,
}

impl RidgeState {
    pub fn new(horizon: usize, states: usize, dim: usize) -> Self {
        Self {
            dim,
            states,
            gram: vec![DMatrix::identity(dim, dim); horizon],
            moments: vec![DMatrix::zeros(states, dim); horizon],
            samples: vec![0; horizon],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self, h: usize) -> &DMatrix<f64> {
        &self.gram[h]
    }

    pub fn moments(&self, h: usize) -> &DMatrix<f64> {
        &self.moments[h]
    }

    pub fn samples(&self, h: usize) -> u64 {
        self.samples[h]
    }

    /// Adds one observed `(φ_j, s_{j,h+1})` pair at step `h`.
    pub fn update(&mut self, h: usize, features: &[f64], next_state: usize) -> Result<()> {
        if features.len() != self.dim {
            return Err(GmfgError::Dimension(format!("feature vector has length {}, expected {}", features.len(), self.dim)));
        }
        if next_state >= self.states {
            return Err(GmfgError::Dimension(format!("next state {next_state} out of range for {} states", self.states)));
        }
        if h >= self.gram.len() {
            return Err(GmfgError::Dimension(format!("step {h} out of range")));
        }
        let norm = features.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > 1.0 + 1e-9 {
            return Err(GmfgError::InvalidParams(format!("feature norm {norm} exceeds 1")));
        }
        let phi = DVector::from_column_slice(features);
        self.gram[h].ger(1.0, &phi, &phi, 1.0);
        let mut row = self.moments[h].row_mut(next_state);
        for (m, x) in row.iter_mut().zip(features) {
            *m += x;
        }
        self.samples[h] += 1;
        Ok(())
    }

    /// `θ̂_h = M_h Λ_h^{-1}` (an `S x d` matrix) via a Cholesky solve.
    pub fn solve(&self, h: usize) -> DMatrix<f64> {
        let chol = self.gram[h].clone().cholesky().expect("identity prior keeps the Gram matrix positive definite");
        chol.solve(&self.moments[h].transpose()).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_state_has_zero_estimate() {
        let r = RidgeState::new(2, 3, 4);
        assert_eq!(r.gram(0), &DMatrix::identity(4, 4));
        assert_eq!(r.solve(1), DMatrix::zeros(3, 4));
    }

    #[test]
    fn single_sample_halves_the_target() {
        let mut r = RidgeState::new(1, 3, 2);
        r.update(0, &[1.0, 0.0], 2).unwrap();
        let theta = r.solve(0);
        assert!((theta[(2, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(theta[(0, 0)], 0.0);
        assert_eq!(theta[(2, 1)], 0.0);
    }

    #[test]
    fn gram_bookkeeping_matches_recomputation() {
        let mut r = RidgeState::new(1, 2, 3);
        let data = [[0.1, 0.5, -0.2], [0.6, 0.0, 0.3], [-0.4, 0.4, 0.4]];
        let mut expect = DMatrix::<f64>::identity(3, 3);
        for (i, phi) in data.iter().enumerate() {
            r.update(0, phi, i % 2).unwrap();
            let v = DVector::from_column_slice(phi);
            expect += &v * v.transpose();
        }
        assert!((r.gram(0) - expect).abs().max() < 1e-12);
        assert_eq!(r.samples(0), 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut r = RidgeState::new(1, 2, 2);
        assert!(matches!(r.update(0, &[1.0], 0), Err(GmfgError::Dimension(_))));
        assert!(matches!(r.update(0, &[1.0, 1.0], 0), Err(GmfgError::InvalidParams(_))));
        assert!(matches!(r.update(0, &[0.5, 0.5], 2), Err(GmfgError::Dimension(_))));
    }
}
