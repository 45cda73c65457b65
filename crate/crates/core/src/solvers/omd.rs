use crate::error::{GmfgError, Result};
use crate::values::check_lambda;

/// Slack on `ηλ ≤ 1` so that `η = 1/(λt)` at `t = 1` is accepted despite rounding.
const ETA_LAMBDA_SLACK: f64 = 1e-12;

/// Lower bound on a shifted logit. Keeps every output entry strictly positive.
const LOGIT_FLOOR: f64 = -700.0;

/// Entropy-regularized mirror-descent step on one policy row:
/// the minimiser of `η⟨g + λ ln π_row, π⟩ + KL(π ‖ π_row)` over the simplex,
/// `π'(a) ∝ π_row(a)^{1-ηλ} exp(-η g(a))`.
pub fn mirror_descent_step(row: &[f64], gradient: &[f64], eta: f64, lambda: f64) -> Result<Vec<f64>> {
    let mut out = row.to_vec();
    mirror_descent_in_place(&mut out, gradient, eta, lambda)?;
    Ok(out)
}

/// [`mirror_descent_step`] overwriting `row`. On error `row` is untouched.
pub fn mirror_descent_in_place(row: &mut [f64], gradient: &[f64], eta: f64, lambda: f64) -> Result<()> {
    if row.len() != gradient.len() || row.is_empty() {
        return Err(GmfgError::Dimension(format!("policy row has {} entries, gradient {}", row.len(), gradient.len())));
    }
    if !eta.is_finite() || eta <= 0.0 {
        return Err(GmfgError::InvalidStepSize(eta));
    }
    check_lambda(lambda)?;
    if eta * lambda > 1.0 + ETA_LAMBDA_SLACK {
        return Err(GmfgError::StepTooLarge { eta, lambda });
    }
    if gradient.iter().any(|g| !g.is_finite()) {
        return Err(GmfgError::NonFiniteGradient);
    }
    if row.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(GmfgError::NonInteriorPolicy);
    }
    let keep = (1.0 - eta * lambda).max(0.0);
    let mut top = f64::NEG_INFINITY;
    for (p, g) in row.iter_mut().zip(gradient) {
        *p = keep * p.ln() - eta * g;
        top = top.max(*p);
    }
    let mut total = 0.0;
    for p in row.iter_mut() {
        *p = (*p - top).max(LOGIT_FLOOR).exp();
        total += *p;
    }
    row.iter_mut().for_each(|p| *p /= total);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_gradient_without_regularization_is_identity() {
        let row = [0.2, 0.3, 0.5];
        let out = mirror_descent_step(&row, &[4.0; 3], 0.7, 0.0).unwrap();
        for (a, b) in out.iter().zip(&row) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn full_step_forgets_the_previous_row() {
        let g = [0.1, 0.9];
        let a = mirror_descent_step(&[0.9, 0.1], &g, 2.0, 0.5).unwrap();
        let b = mirror_descent_step(&[0.1, 0.9], &g, 2.0, 0.5).unwrap();
        let z = (-0.2f64).exp() + (-1.8f64).exp();
        assert!((a[0] - (-0.2f64).exp() / z).abs() < 1e-15);
        assert!((a[0] - b[0]).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let row = [0.5, 0.5];
        assert!(matches!(mirror_descent_step(&row, &[0.0, 0.0], 3.0, 0.5), Err(GmfgError::StepTooLarge { .. })));
        assert!(matches!(mirror_descent_step(&row, &[f64::NAN, 0.0], 0.1, 0.5), Err(GmfgError::NonFiniteGradient)));
        assert!(matches!(mirror_descent_step(&[1.0, 0.0], &[0.0, 0.0], 0.1, 0.5), Err(GmfgError::NonInteriorPolicy)));
        assert!(matches!(mirror_descent_step(&row, &[0.0, 0.0], 0.0, 0.5), Err(GmfgError::InvalidStepSize(_))));
        assert!(matches!(mirror_descent_step(&row, &[0.0], 0.1, 0.5), Err(GmfgError::Dimension(_))));
    }

    #[test]
    fn huge_gradient_keeps_row_interior() {
        let out = mirror_descent_step(&[0.5, 0.5], &[0.0, 1e6], 1.0, 0.0).unwrap();
        assert!(out[1] > 0.0);
        assert!((out[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn accepts_rounded_unit_eta_lambda() {
        let lambda = 0.3;
        let eta = 1.0 / lambda;
        assert!(mirror_descent_step(&[0.5, 0.5], &[0.0, 1.0], eta, lambda).is_ok());
    }
}
