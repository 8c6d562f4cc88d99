use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataprep::Dataset;
use crate::netcore::{Network, ParamBuffer};
use crate::seed::rng_from_seed;
use crate::Scalar;

use super::{
    backprop_gradients, dataset_objective, step_momentum, step_penalized, step_plain_gd, step_weight_decay_l2,
    step_weight_decay_rational, BatchMode, Loss, Regime, TrainConfig, TrainError, SMOOTHING_FLOOR,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Data term plus penalty.
    pub objective: f64,
    /// Mean per-observation loss (exact pinball for the quantile regime).
    pub data_term: f64,
    pub param_norm: f64,
}

/// One record per completed epoch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["epoch", "objective", "data_term", "param_norm"])?;
        for r in &self.records {
            wtr.write_record([
                r.epoch.to_string(),
                r.objective.to_string(),
                r.data_term.to_string(),
                r.param_norm.to_string(),
            ])?;
        }
        wtr.flush()
    }
}

/// Pinball smoothing width for `epoch` (0-based): constant at `eps0`, then
/// geometric decay to [`SMOOTHING_FLOOR`] across the final quarter of epochs.
pub fn smoothing_schedule(epoch: usize, epochs: usize, eps0: f64) -> f64 {
    let tail = epochs / 4;
    if eps0 <= SMOOTHING_FLOOR || tail == 0 {
        return eps0;
    }
    let start = epochs - tail;
    if epoch < start {
        eps0
    } else {
        let frac = (epoch - start + 1) as f64 / tail as f64;
        eps0 * (SMOOTHING_FLOOR / eps0).powf(frac)
    }
}

struct Stepper<F> {
    regime: Regime,
    eta: F,
    velocity: Option<ParamBuffer<F>>,
}

impl<F: Scalar> Stepper<F> {
    fn new(regime: Regime, eta: f64, net: &Network<F>) -> Self {
        let velocity = matches!(regime, Regime::Momentum { .. }).then(|| ParamBuffer::zeros_like(net));
        Self {
            regime,
            eta: F::of(eta),
            velocity,
        }
    }

    fn step(&mut self, net: &mut Network<F>, grads: &ParamBuffer<F>) -> Result<(), TrainError> {
        match self.regime {
            Regime::PlainGd => step_plain_gd(net, grads, self.eta),
            Regime::Momentum { mu } => {
                let velocity = self.velocity.as_mut().expect("momentum buffer");
                step_momentum(net, grads, velocity, self.eta, F::of(mu))
            }
            Regime::WeightDecayL2 { lambda } => step_weight_decay_l2(net, grads, self.eta, F::of(lambda)),
            Regime::WeightDecayRational { lambda } => step_weight_decay_rational(net, grads, self.eta, F::of(lambda)),
            Regime::Quantile { .. } => step_penalized(net, grads, self.eta, self.regime.penalty()),
        }
    }
}

fn diverged(epoch: usize) -> impl Fn(TrainError) -> TrainError {
    move |e| match e {
        TrainError::NonFinite(what) => TrainError::Diverged {
            epoch,
            reason: format!("non-finite {what}"),
        },
        other => other,
    }
}

/// Trains `net` on `rows` of `data` for exactly `cfg.epochs` epochs.
///
/// The trace records, after each epoch, the mean data loss plus penalty
/// evaluated on the training rows. For the quantile regime the optimized
/// loss is the smoothed pinball at the scheduled width, while the trace
/// reports the exact pinball.
pub fn train<F: Scalar>(
    mut net: Network<F>,
    data: &Dataset<F>,
    rows: &[usize],
    cfg: &TrainConfig,
) -> Result<(Network<F>, TrainTrace), TrainError> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(TrainError::Data(crate::dataprep::DataError::EmptyRows));
    }
    data.check_rows(rows)?;
    if data.n_features() != net.n_inputs {
        return Err(TrainError::Net(crate::netcore::NetError::DimensionMismatch {
            expected: net.n_inputs,
            found: data.n_features(),
        }));
    }
    if let Regime::WeightDecayL2 { lambda } = cfg.regime {
        if (1.0 - 2.0 * lambda * cfg.eta).abs() >= 1.0 && lambda > 0.0 {
            log::warn!(
                "|1 - 2*lambda*eta| = {} >= 1: weight decay will not contract the weights",
                (1.0 - 2.0 * lambda * cfg.eta).abs()
            );
        }
    }

    let mut rng = rng_from_seed(cfg.seed);
    let mut stepper = Stepper::new(cfg.regime, cfg.eta, &net);
    let base_eps = match cfg.regime {
        Regime::Quantile { smoothing_eps, .. } => smoothing_eps,
        _ => 0.0,
    };
    let report_loss = cfg.regime.loss(0.0);
    let penalty = cfg.regime.penalty();
    let mut order = rows.to_vec();
    let mut trace = TrainTrace::default();

    for epoch in 0..cfg.epochs {
        let loss = match cfg.regime.loss(0.0) {
            Loss::Pinball { theta, .. } => Loss::Pinball {
                theta,
                eps: smoothing_schedule(epoch, cfg.epochs, base_eps),
            },
            other => other,
        };
        let on_err = diverged(epoch);
        match cfg.batch_mode {
            BatchMode::PerObservation => {
                order.shuffle(&mut rng);
                for &r in &order {
                    let grads = backprop_gradients(&net, data.row(r), data.target()[r], loss).map_err(&on_err)?;
                    stepper.step(&mut net, &grads.partials).map_err(&on_err)?;
                }
            }
            BatchMode::FullBatch => {
                let mut sum = ParamBuffer::zeros_like(&net);
                for &r in rows {
                    let grads = backprop_gradients(&net, data.row(r), data.target()[r], loss).map_err(&on_err)?;
                    sum.add_scaled(&grads.partials, F::one());
                }
                sum.scale(F::one() / F::of(rows.len() as f64));
                stepper.step(&mut net, &sum).map_err(&on_err)?;
            }
        }
        let value = dataset_objective(&net, data, rows, report_loss, penalty).map_err(&on_err)?;
        let record = EpochRecord {
            epoch,
            objective: value.total.as_f64(),
            data_term: value.data_term.as_f64(),
            param_norm: net.params.norm().as_f64(),
        };
        if !(record.objective.is_finite() && record.param_norm.is_finite()) {
            return Err(TrainError::Diverged {
                epoch,
                reason: "objective is not finite".into(),
            });
        }
        trace.records.push(record);
    }
    Ok((net, trace))
}
