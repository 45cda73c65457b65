//! Step-size, exploration and value-estimator schedules.

use serde::{Deserialize, Serialize};

use crate::error::{GmfgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ScheduleRule {
    Constant { c: f64 },
    /// `c · t^{-p}`.
    Power { c: f64, p: f64 },
    /// `(H + 1) / (H + t)`.
    HorizonHarmonic,
}

impl ScheduleRule {
    /// Value at round `t ≥ 1` for horizon `H`.
    pub fn value(&self, t: u64, horizon: usize) -> f64 {
        match *self {
            ScheduleRule::Constant { c } => c,
            ScheduleRule::Power { c, p } => c * (t as f64).powf(-p),
            ScheduleRule::HorizonHarmonic => (horizon as f64 + 1.0) / (horizon as f64 + t as f64),
        }
    }

    fn check_finite(&self) -> Result<()> {
        let ok = match *self {
            ScheduleRule::Constant { c } => c.is_finite(),
            ScheduleRule::Power { c, p } => c.is_finite() && p.is_finite() && p >= 0.0,
            ScheduleRule::HorizonHarmonic => true,
        };
        if ok {
            Ok(())
        } else {
            Err(GmfgError::InvalidSchedule(format!("{self:?} has invalid parameters")))
        }
    }
}

/// Learning rate `η_t`, exploration `γ_t` and value step `β_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedules {
    pub learning_rate: ScheduleRule,
    pub exploration: ScheduleRule,
    pub value_step: ScheduleRule,
}

impl Schedules {
    /// `η_t = 1/(λt)`; exploration and value step unused.
    pub fn full_info(lambda: f64) -> Self {
        Self {
            learning_rate: ScheduleRule::Power { c: 1.0 / lambda, p: 1.0 },
            exploration: ScheduleRule::Constant { c: 0.0 },
            value_step: ScheduleRule::HorizonHarmonic,
        }
    }

    /// `η_t = t^{-3/4}`, `γ_t = t^{-1/4}`, `β_k = (H+1)/(H+k)`.
    pub fn bandit() -> Self {
        Self {
            learning_rate: ScheduleRule::Power { c: 1.0, p: 0.75 },
            exploration: ScheduleRule::Power { c: 1.0, p: 0.25 },
            value_step: ScheduleRule::HorizonHarmonic,
        }
    }

    /// `η_t = t^{-4/5}`, `γ_t = t^{-1/5}`.
    pub fn linear() -> Self {
        Self {
            learning_rate: ScheduleRule::Power { c: 1.0, p: 0.8 },
            exploration: ScheduleRule::Power { c: 1.0, p: 0.2 },
            value_step: ScheduleRule::HorizonHarmonic,
        }
    }

    /// Constant `η` and `γ`, harmonic value step.
    pub fn constant(eta: f64, gamma: f64) -> Self {
        Self {
            learning_rate: ScheduleRule::Constant { c: eta },
            exploration: ScheduleRule::Constant { c: gamma },
            value_step: ScheduleRule::HorizonHarmonic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.learning_rate.check_finite()?;
        self.exploration.check_finite()?;
        self.value_step.check_finite()?;
        if let ScheduleRule::Constant { c } | ScheduleRule::Power { c, .. } = self.learning_rate {
            if c <= 0.0 {
                return Err(GmfgError::InvalidSchedule("learning rate must be positive".into()));
            }
        }
        if let ScheduleRule::Constant { c } | ScheduleRule::Power { c, .. } = self.exploration {
            if c < 0.0 {
                return Err(GmfgError::InvalidSchedule("exploration must be nonnegative".into()));
            }
        }
        match self.value_step {
            ScheduleRule::Constant { c } if c <= 0.0 || c > 1.0 => {
                Err(GmfgError::InvalidSchedule("value step must lie in (0, 1]".into()))
            }
            ScheduleRule::Power { c, .. } if c <= 0.0 || c > 1.0 => {
                Err(GmfgError::InvalidSchedule("value step must lie in (0, 1]".into()))
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_rule_is_exact() {
        let r = ScheduleRule::Power { c: 2.0, p: 0.75 };
        for t in [1u64, 10, 1_000_000] {
            assert_eq!(r.value(t, 5), 2.0 * (t as f64).powf(-0.75));
        }
        assert_eq!(r.value(1, 5), 2.0);
    }

    #[test]
    fn horizon_harmonic_starts_at_one() {
        let r = ScheduleRule::HorizonHarmonic;
        assert_eq!(r.value(1, 7), 1.0);
        assert_eq!(r.value(4, 7), 8.0 / 11.0);
        for k in 1..50 {
            let b = r.value(k, 3);
            assert!(b > 0.0 && b <= 1.0);
        }
    }

    #[test]
    fn full_info_schedule_keeps_eta_lambda_at_most_one() {
        let s = Schedules::full_info(0.5);
        assert_eq!(s.learning_rate.value(1, 5) * 0.5, 1.0);
        assert!(s.learning_rate.value(2, 5) * 0.5 < 1.0);
    }

    #[test]
    fn invalid_schedules_are_rejected() {
        let mut s = Schedules::bandit();
        s.learning_rate = ScheduleRule::Constant { c: 0.0 };
        assert!(s.validate().is_err());
        let mut s = Schedules::bandit();
        s.value_step = ScheduleRule::Constant { c: 1.5 };
        assert!(s.validate().is_err());
        assert!(Schedules::bandit().validate().is_ok());
    }

    #[test]
    fn serde_shape() {
        let json = serde_json::to_string(&ScheduleRule::Power { c: 1.0, p: 0.5 }).unwrap();
        assert_eq!(json, r#"{"rule":"power","c":1.0,"p":0.5}"#);
        let back: ScheduleRule = serde_json::from_str(r#"{"rule":"horizon_harmonic"}"#).unwrap();
        assert_eq!(back, ScheduleRule::HorizonHarmonic);
    }
}
