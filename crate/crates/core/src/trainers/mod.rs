//! Backpropagation gradients and the five training regimes.
//!
//! Sign convention: deltas follow the classical backprop form
//! `δ = f'(nnet)·(target − output)`, so a descent step adds `η·δ·x`.
//! [`ParamBuffer`](crate::netcore::ParamBuffer) gradients, on the other
//! hand, always hold true partial derivatives `∂E/∂w = −δ·x`, and every
//! step function subtracts `η·∂E/∂w`. The two views describe the same update.
//!
//! The squared-error loss per observation is `½(y − ŷ)²`, which makes the
//! weight-decay updates reduce exactly to plain gradient descent at `λ = 0`.

mod gradient;
mod steps;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataprep::DataError;
use crate::netcore::NetError;

pub use gradient::{
    backprop_gradients, dataset_objective, observation_gradient, observation_objective, pinball_objective, GradientSet,
    Loss, ObjectiveValue, Penalty,
};
pub use steps::{step_momentum, step_penalized, step_plain_gd, step_weight_decay_l2, step_weight_decay_rational};
pub use train::{smoothing_schedule, train, EpochRecord, TrainTrace};

pub const DEFAULT_ETA: f64 = 0.1;
pub const DEFAULT_EPOCHS: usize = 1000;
pub const DEFAULT_SMOOTHING_EPS: f64 = 1e-3;
/// Smoothing width reached at the end of the annealing phase.
pub const SMOOTHING_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("parameter buffer is not shape-congruent with the network")]
    ShapeMismatch,
    #[error("length mismatch: {0} predictions vs {1} targets")]
    LengthMismatch(usize, usize),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("training diverged at epoch {epoch}: {reason}")]
    Diverged { epoch: usize, reason: String },
}

/// Training regime with exactly the hyperparameters it uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Regime {
    PlainGd,
    Momentum {
        mu: f64,
    },
    WeightDecayL2 {
        lambda: f64,
    },
    WeightDecayRational {
        lambda: f64,
    },
    /// Pinball loss at quantile `theta` with separate L2 penalties on the
    /// input→hidden (`lambda1`) and hidden→output (`lambda2`) weights.
    /// `smoothing_eps = 0` selects the exact subgradient.
    Quantile {
        theta: f64,
        lambda1: f64,
        lambda2: f64,
        smoothing_eps: f64,
    },
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::PlainGd => "plain-gd",
            Regime::Momentum { .. } => "momentum",
            Regime::WeightDecayL2 { .. } => "weight-decay-l2",
            Regime::WeightDecayRational { .. } => "weight-decay-rational",
            Regime::Quantile { .. } => "quantile",
        }
    }

    /// Per-observation loss at smoothing width `eps` (ignored unless quantile).
    pub fn loss(&self, eps: f64) -> Loss {
        match *self {
            Regime::Quantile { theta, .. } => Loss::Pinball { theta, eps },
            _ => Loss::SquaredError,
        }
    }

    pub fn penalty(&self) -> Penalty {
        match *self {
            Regime::PlainGd | Regime::Momentum { .. } => Penalty::None,
            Regime::WeightDecayL2 { lambda } => Penalty::L2 { lambda },
            Regime::WeightDecayRational { lambda } => Penalty::Rational { lambda },
            Regime::Quantile { lambda1, lambda2, .. } => Penalty::Split { lambda1, lambda2 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    /// Step after every observation, visiting rows in a seeded shuffled order.
    PerObservation,
    /// Average the gradient over all rows, then step once per epoch.
    FullBatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub regime: Regime,
    pub eta: f64,
    pub epochs: usize,
    pub batch_mode: BatchMode,
    /// Seeds the per-epoch visiting order.
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(regime: Regime) -> Self {
        Self {
            regime,
            eta: DEFAULT_ETA,
            epochs: DEFAULT_EPOCHS,
            batch_mode: BatchMode::PerObservation,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: String| Err(TrainError::InvalidConfig(msg));
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be > 0, got {}", self.eta));
        }
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        match self.regime {
            Regime::PlainGd => {}
            Regime::Momentum { mu } => {
                if !(0.0..=1.0).contains(&mu) {
                    return bad(format!("momentum must lie in [0, 1], got {mu}"));
                }
            }
            Regime::WeightDecayL2 { lambda } | Regime::WeightDecayRational { lambda } => {
                if !nonneg(lambda) {
                    return bad(format!("lambda must be >= 0, got {lambda}"));
                }
            }
            Regime::Quantile {
                theta,
                lambda1,
                lambda2,
                smoothing_eps,
            } => {
                if !(theta > 0.0 && theta < 1.0) {
                    return bad(format!("theta must lie in (0, 1), got {theta}"));
                }
                if !nonneg(lambda1) || !nonneg(lambda2) {
                    return bad("lambda1 and lambda2 must be >= 0".into());
                }
                if !nonneg(smoothing_eps) {
                    return bad(format!("smoothing eps must be >= 0, got {smoothing_eps}"));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TrainError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| TrainError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
