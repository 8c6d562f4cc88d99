use crate::dataprep::Dataset;
use crate::netcore::{Network, ParamBuffer};
use crate::Scalar;

use super::{Regime, TrainError};

/// Per-observation loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    /// `½(y − ŷ)²`
    SquaredError,
    /// Pinball loss at quantile `theta`. With `eps > 0` the absolute value is
    /// replaced by the Huber function of width `eps`.
    Pinball { theta: f64, eps: f64 },
}

fn huber<F: Scalar>(u: F, eps: F) -> (F, F) {
    if u.abs() <= eps {
        (u * u / (eps + eps), u / eps)
    } else {
        (u.abs() - eps / F::of(2.0), u.signum())
    }
}

impl Loss {
    pub fn validate(&self) -> Result<(), TrainError> {
        match *self {
            Loss::SquaredError => Ok(()),
            Loss::Pinball { theta, eps } => {
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(TrainError::InvalidConfig(format!("theta {theta} outside (0, 1)")));
                }
                if !(eps >= 0.0) {
                    return Err(TrainError::InvalidConfig(format!("smoothing eps {eps} < 0")));
                }
                Ok(())
            }
        }
    }

    /// Loss value and its derivative with respect to the prediction.
    pub fn value_and_slope<F: Scalar>(&self, y: F, yhat: F) -> (F, F) {
        let u = y - yhat;
        match *self {
            Loss::SquaredError => (F::of(0.5) * u * u, -u),
            Loss::Pinball { theta, eps } => {
                let weight = if u >= F::zero() {
                    F::of(theta)
                } else {
                    F::of(1.0 - theta)
                };
                if eps > 0.0 {
                    let (h, dh) = huber(u, F::of(eps));
                    (weight * h, -(weight * dh))
                } else {
                    let slope = if u > F::zero() {
                        -F::of(theta)
                    } else if u < F::zero() {
                        F::of(1.0 - theta)
                    } else {
                        F::zero()
                    };
                    (weight * u.abs(), slope)
                }
            }
        }
    }

    pub fn value<F: Scalar>(&self, y: F, yhat: F) -> F {
        self.value_and_slope(y, yhat).0
    }
}

/// Parameter penalty added to the data term. Biases are never penalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    None,
    /// `λ Σ w²`
    L2 {
        lambda: f64,
    },
    /// `λ Σ w² / (1 + w²)`
    Rational {
        lambda: f64,
    },
    /// `λ₁ Σ w²` over input→hidden weights plus `λ₂ Σ v²` over the weights
    /// feeding the output node. Without a hidden layer only `λ₂` applies.
    Split {
        lambda1: f64,
        lambda2: f64,
    },
}

impl Penalty {
    fn layer_lambda(&self, layer: usize, n_layers: usize) -> f64 {
        match *self {
            Penalty::None => 0.0,
            Penalty::L2 { lambda } | Penalty::Rational { lambda } => lambda,
            Penalty::Split { lambda1, lambda2 } => {
                if layer + 1 == n_layers {
                    lambda2
                } else {
                    lambda1
                }
            }
        }
    }

    pub fn value<F: Scalar>(&self, net: &Network<F>) -> F {
        let n_layers = net.n_layers();
        net.layers()
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                let lambda = F::of(self.layer_lambda(l, n_layers));
                let sum: F = match self {
                    Penalty::None => F::zero(),
                    Penalty::Rational { .. } => layer.weights.iter().map(|&w| w * w / (F::one() + w * w)).sum(),
                    _ => layer.weights.iter().map(|&w| w * w).sum(),
                };
                lambda * sum
            })
            .sum()
    }

    pub fn gradient<F: Scalar>(&self, net: &Network<F>) -> ParamBuffer<F> {
        let mut grad = ParamBuffer::zeros_like(net);
        let n_layers = net.n_layers();
        for (l, (g, layer)) in grad.layers.iter_mut().zip(net.layers()).enumerate() {
            let lambda = F::of(self.layer_lambda(l, n_layers));
            for (gw, &w) in g.weights.iter_mut().zip(&layer.weights) {
                *gw = match self {
                    Penalty::None => F::zero(),
                    Penalty::Rational { .. } => {
                        let d = F::one() + w * w;
                        lambda * (w + w) / (d * d)
                    }
                    _ => lambda * (w + w),
                };
            }
        }
        grad
    }
}

/// Partials of one observation's loss, congruent with the network, plus the
/// backpropagated deltas of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet<F> {
    pub partials: ParamBuffer<F>,
    /// `deltas[l][j]` for node `j` of layer `l`, in the `f'·(target − output)`
    /// sign convention.
    pub deltas: Vec<Vec<F>>,
}

/// Exact analytic gradient of `loss(y_target, net(x))` by backpropagation.
pub fn backprop_gradients<F: Scalar>(
    net: &Network<F>,
    x: &[F],
    y_target: F,
    loss: Loss,
) -> Result<GradientSet<F>, TrainError> {
    loss.validate()?;
    let (output, cache) = net.forward(x)?;
    let n_layers = net.n_layers();
    let (_, slope) = loss.value_and_slope(y_target, output);

    let mut deltas: Vec<Vec<F>> = vec![Vec::new(); n_layers];
    let out_act = net.activation_of(n_layers - 1);
    deltas[n_layers - 1] = vec![out_act.derivative(output) * (-slope)];

    let mut partials = ParamBuffer::zeros_like(net);
    for l in (0..n_layers).rev() {
        let layer = &net.layers()[l];
        let input = cache.layer_input(l);
        let grad = &mut partials.layers[l];
        for (j, &delta) in deltas[l].iter().enumerate() {
            let row = &mut grad.weights[j * layer.fan_in..(j + 1) * layer.fan_in];
            for (g, &xi) in row.iter_mut().zip(input) {
                *g = -delta * xi;
            }
            grad.biases[j] = -delta;
        }
        if l > 0 {
            let act = net.activation_of(l - 1);
            let below: Vec<F> = (0..layer.fan_in)
                .map(|i| {
                    let back: F = deltas[l].iter().enumerate().map(|(j, &d)| layer.weight(j, i) * d).sum();
                    act.derivative(cache.post[l - 1][i]) * back
                })
                .collect();
            deltas[l - 1] = below;
        }
    }
    if !partials.all_finite() {
        return Err(TrainError::NonFinite("gradient"));
    }
    Ok(GradientSet { partials, deltas })
}

/// The full per-observation objective of a regime: loss plus penalty.
pub fn observation_objective<F: Scalar>(
    net: &Network<F>,
    x: &[F],
    y: F,
    regime: &Regime,
    eps: f64,
) -> Result<F, TrainError> {
    let yhat = net.predict(x)?;
    Ok(regime.loss(eps).value(y, yhat) + regime.penalty().value(net))
}

/// Gradient of [`observation_objective`].
pub fn observation_gradient<F: Scalar>(
    net: &Network<F>,
    x: &[F],
    y: F,
    regime: &Regime,
    eps: f64,
) -> Result<ParamBuffer<F>, TrainError> {
    let mut grad = backprop_gradients(net, x, y, regime.loss(eps))?.partials;
    grad.add_scaled(&regime.penalty().gradient(net), F::one());
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue<F> {
    /// Mean per-observation loss over the rows.
    pub data_term: F,
    pub penalty: F,
    pub total: F,
}

/// Objective over a row set: mean loss plus penalty.
pub fn dataset_objective<F: Scalar>(
    net: &Network<F>,
    data: &Dataset<F>,
    rows: &[usize],
    loss: Loss,
    penalty: Penalty,
) -> Result<ObjectiveValue<F>, TrainError> {
    let mut sum = F::zero();
    for &r in rows {
        sum = sum + loss.value(data.target()[r], net.predict(data.row(r))?);
    }
    let data_term = sum / F::of(rows.len() as f64);
    let penalty = penalty.value(net);
    Ok(ObjectiveValue {
        data_term,
        penalty,
        total: data_term + penalty,
    })
}

/// Exact regularized pinball objective (reporting form, summed over points):
/// `Σ θ|y − f| [y ≥ f] + Σ (1 − θ)|y − f| [y < f] + λ₁Σw² + λ₂Σv²`.
pub fn pinball_objective<F: Scalar>(
    predictions: &[F],
    targets: &[F],
    theta: f64,
    net: &Network<F>,
    lambda1: f64,
    lambda2: f64,
) -> Result<F, TrainError> {
    if predictions.len() != targets.len() {
        return Err(TrainError::LengthMismatch(predictions.len(), targets.len()));
    }
    let loss = Loss::Pinball { theta, eps: 0.0 };
    loss.validate()?;
    let data: F = predictions.iter().zip(targets).map(|(&f, &y)| loss.value(y, f)).sum();
    Ok(data + Penalty::Split { lambda1, lambda2 }.value(net))
}
