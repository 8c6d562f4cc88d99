//! The five named model presets and the architecture/config bundle the
//! benchmark trains.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::netcore::{init_network, Activation, InitSpec, NetError, Network};
use crate::trainers::{BatchMode, Regime, TrainConfig, DEFAULT_EPOCHS, DEFAULT_SMOOTHING_EPS};
use crate::Scalar;

pub const DEFAULT_HIDDEN: usize = 5;
pub const DEFAULT_HIDDEN_ETA: f64 = 0.1;
/// Zero-hidden-layer networks see every descriptor directly; with a few
/// hundred unit-range inputs the per-observation step is only stable for a
/// learning rate well below the hidden-layer default.
pub const DEFAULT_LINEAR_ETA: f64 = 0.01;
pub const DEFAULT_MOMENTUM: f64 = 0.5;
pub const DEFAULT_DECAY_LAMBDA: f64 = 1e-4;
pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_QUANTILE_LAMBDA: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Shlffnn,
    Gdbpnn,
    Gdbpmnn,
    Bpwdnn,
    Qrnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Shlffnn,
        ModelKind::Gdbpnn,
        ModelKind::Gdbpmnn,
        ModelKind::Bpwdnn,
        ModelKind::Qrnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Shlffnn => "shlffnn",
            ModelKind::Gdbpnn => "gdbpnn",
            ModelKind::Gdbpmnn => "gdbpmnn",
            ModelKind::Bpwdnn => "bpwdnn",
            ModelKind::Qrnn => "qrnn",
        }
    }

    pub fn label(self) -> String {
        self.name().to_uppercase()
    }

    /// Stable position in [`ModelKind::ALL`]; used as the model's seed
    /// identity in benchmarks so a model's column does not depend on which
    /// other models run beside it.
    pub fn index(self) -> usize {
        ModelKind::ALL.iter().position(|&k| k == self).expect("listed")
    }

    pub fn has_hidden_layer(self) -> bool {
        self != ModelKind::Shlffnn
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown model `{s}` (expected one of shlffnn, gdbpnn, gdbpmnn, bpwdnn, qrnn)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayKind {
    L2,
    Rational,
}

impl FromStr for DecayKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" | "quadratic" => Ok(DecayKind::L2),
            "rational" => Ok(DecayKind::Rational),
            other => Err(format!("unknown decay `{other}` (expected l2 or rational)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub hidden_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub init_half_width: f64,
}

impl Architecture {
    pub fn build<F: Scalar>(&self, n_inputs: usize, seed: u64) -> Result<Network<F>, NetError> {
        init_network(
            n_inputs,
            &self.hidden_sizes,
            self.hidden_activation,
            self.output_activation,
            InitSpec::uniform(self.init_half_width, seed),
        )
    }
}

/// A labelled architecture plus training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub label: String,
    pub architecture: Architecture,
    pub train: TrainConfig,
}

/// User overrides; `None` falls back to the per-model default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub eta: Option<f64>,
    pub epochs: Option<usize>,
    pub hidden: Option<usize>,
    pub momentum: Option<f64>,
    pub lambda: Option<f64>,
    pub decay: Option<DecayKind>,
    pub theta: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub smoothing_eps: Option<f64>,
    pub batch_mode: Option<BatchMode>,
    pub init_half_width: Option<f64>,
}

impl Hyperparameters {
    /// Names of overrides the given model does not use.
    pub fn unused_by(&self, kind: ModelKind) -> Vec<&'static str> {
        let mut unused = Vec::new();
        if kind != ModelKind::Gdbpmnn && self.momentum.is_some() {
            unused.push("momentum");
        }
        if kind != ModelKind::Bpwdnn {
            if self.lambda.is_some() {
                unused.push("lambda");
            }
            if self.decay.is_some() {
                unused.push("decay");
            }
        }
        if kind != ModelKind::Qrnn {
            for (name, set) in [
                ("theta", self.theta.is_some()),
                ("lambda1", self.lambda1.is_some()),
                ("lambda2", self.lambda2.is_some()),
                ("smoothing-eps", self.smoothing_eps.is_some()),
            ] {
                if set {
                    unused.push(name);
                }
            }
        }
        if kind == ModelKind::Shlffnn && self.hidden.is_some() {
            unused.push("hidden");
        }
        unused
    }
}

/// Fully resolved spec for a named model.
pub fn preset(kind: ModelKind, hp: &Hyperparameters, seed: u64) -> ModelSpec {
    let hidden_sizes = if kind.has_hidden_layer() {
        vec![hp.hidden.unwrap_or(DEFAULT_HIDDEN)]
    } else {
        Vec::new()
    };
    let default_eta = if kind.has_hidden_layer() {
        DEFAULT_HIDDEN_ETA
    } else {
        DEFAULT_LINEAR_ETA
    };
    let regime = match kind {
        ModelKind::Shlffnn | ModelKind::Gdbpnn => Regime::PlainGd,
        ModelKind::Gdbpmnn => Regime::Momentum {
            mu: hp.momentum.unwrap_or(DEFAULT_MOMENTUM),
        },
        ModelKind::Bpwdnn => {
            let lambda = hp.lambda.unwrap_or(DEFAULT_DECAY_LAMBDA);
            match hp.decay.unwrap_or(DecayKind::L2) {
                DecayKind::L2 => Regime::WeightDecayL2 { lambda },
                DecayKind::Rational => Regime::WeightDecayRational { lambda },
            }
        }
        ModelKind::Qrnn => Regime::Quantile {
            theta: hp.theta.unwrap_or(DEFAULT_THETA),
            lambda1: hp.lambda1.unwrap_or(DEFAULT_QUANTILE_LAMBDA),
            lambda2: hp.lambda2.unwrap_or(DEFAULT_QUANTILE_LAMBDA),
            smoothing_eps: hp.smoothing_eps.unwrap_or(DEFAULT_SMOOTHING_EPS),
        },
    };
    ModelSpec {
        label: kind.label(),
        architecture: Architecture {
            hidden_sizes,
            hidden_activation: Activation::Sigmoid,
            output_activation: Activation::Linear,
            init_half_width: hp.init_half_width.unwrap_or(InitSpec::DEFAULT_HALF_WIDTH),
        },
        train: TrainConfig {
            regime,
            eta: hp.eta.unwrap_or(default_eta),
            epochs: hp.epochs.unwrap_or(DEFAULT_EPOCHS),
            batch_mode: hp.batch_mode.unwrap_or(BatchMode::PerObservation),
            seed,
        },
    }
}
