//! Sample-based estimation for the bandit and linear solvers.

mod bandit_value;
mod ix;
mod linear;
mod ridge;

pub use bandit_value::{bandit_value_update, BanditValueState, VisitCounter};
pub use ix::ix_gradient;
pub use linear::{linear_q_backup, FeatureMap, LinearModelSpec, OneHotFeatures};
pub use ridge::RidgeState;
