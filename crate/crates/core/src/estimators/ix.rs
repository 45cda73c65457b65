use crate::error::{GmfgError, Result};

/// Importance-weighted gradient with implicit exploration:
/// `ĝ(a) = 1{a = taken}·payoff / (π(a) + γ)`.
pub fn ix_gradient(policy_row: &[f64], taken_action: usize, payoff: f64, gamma: f64) -> Result<Vec<f64>> {
    if taken_action >= policy_row.len() {
        return Err(GmfgError::Dimension(format!("action {taken_action} out of range for {} actions", policy_row.len())));
    }
    if !payoff.is_finite() {
        return Err(GmfgError::NonFiniteGradient);
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(GmfgError::InvalidParams(format!("exploration {gamma} must be nonnegative")));
    }
    let denom = policy_row[taken_action] + gamma;
    if denom <= 0.0 {
        return Err(GmfgError::ZeroPropensity { action: taken_action });
    }
    let mut g = vec![0.0; policy_row.len()];
    g[taken_action] = payoff / denom;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_formula() {
        assert_eq!(ix_gradient(&[0.5, 0.5], 1, 2.0, 0.5).unwrap(), vec![0.0, 2.0]);
    }

    #[test]
    fn unbiased_without_exploration() {
        let pi = [0.2, 0.5, 0.3];
        let q = [0.7, 1.9, 0.4];
        let mut mean = [0.0; 3];
        for (a, &p) in pi.iter().enumerate() {
            let g = ix_gradient(&pi, a, q[a], 0.0).unwrap();
            mean.iter_mut().zip(&g).for_each(|(m, x)| *m += p * x);
        }
        for a in 0..3 {
            assert!((mean[a] - q[a]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_propensity_without_exploration_is_rejected() {
        assert!(matches!(ix_gradient(&[1.0, 0.0], 1, 1.0, 0.0), Err(GmfgError::ZeroPropensity { action: 1 })));
        assert!(ix_gradient(&[1.0, 0.0], 1, 1.0, 0.1).is_ok());
    }

    #[test]
    fn non_finite_payoff_is_rejected() {
        assert!(matches!(ix_gradient(&[0.5, 0.5], 0, f64::NAN, 0.1), Err(GmfgError::NonFiniteGradient)));
    }
}
