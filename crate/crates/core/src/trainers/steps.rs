//! Parameter updates for each regime. Every function takes true partials
//! `∂E_i/∂w` and mutates the network in place.

use crate::netcore::{Network, ParamBuffer};
use crate::Scalar;

use super::{Penalty, TrainError};

fn check_shape<F: Scalar>(net: &Network<F>, buf: &ParamBuffer<F>) -> Result<(), TrainError> {
    if buf.is_congruent(net) {
        Ok(())
    } else {
        Err(TrainError::ShapeMismatch)
    }
}

fn check_finite<F: Scalar>(net: &Network<F>) -> Result<(), TrainError> {
    if net.params.all_finite() {
        Ok(())
    } else {
        Err(TrainError::NonFinite("parameter after update"))
    }
}

/// `w ← w − η ∂E/∂w`, i.e. `w ← w + η δ x`.
pub fn step_plain_gd<F: Scalar>(net: &mut Network<F>, grads: &ParamBuffer<F>, eta: F) -> Result<(), TrainError> {
    check_shape(net, grads)?;
    for (w, &g) in net.params.values_mut().zip(grads.values()) {
        *w = *w - eta * g;
    }
    check_finite(net)
}

/// `Δw(I+1) = η δ x + μ Δw(I)`; the applied update replaces `prev_update`.
pub fn step_momentum<F: Scalar>(
    net: &mut Network<F>,
    grads: &ParamBuffer<F>,
    prev_update: &mut ParamBuffer<F>,
    eta: F,
    mu: F,
) -> Result<(), TrainError> {
    check_shape(net, grads)?;
    check_shape(net, prev_update)?;
    for ((w, &g), dw) in net
        .params
        .values_mut()
        .zip(grads.values())
        .zip(prev_update.values_mut())
    {
        let update = -(eta * g) + mu * *dw;
        *w = *w + update;
        *dw = update;
    }
    check_finite(net)
}

/// `w(I+1) = (1 − 2λη) w(I) − η ∂E_i/∂w` on connection weights; biases take
/// the plain step.
pub fn step_weight_decay_l2<F: Scalar>(
    net: &mut Network<F>,
    grads_data: &ParamBuffer<F>,
    eta: F,
    lambda: F,
) -> Result<(), TrainError> {
    check_shape(net, grads_data)?;
    let factor = F::one() - F::of(2.0) * lambda * eta;
    for (layer, grad) in net.params.layers.iter_mut().zip(&grads_data.layers) {
        for (w, &g) in layer.weights.iter_mut().zip(&grad.weights) {
            *w = factor * *w - eta * g;
        }
        for (b, &g) in layer.biases.iter_mut().zip(&grad.biases) {
            *b = *b - eta * g;
        }
    }
    check_finite(net)
}

/// Descent on `E_i + λ Σ w²/(1 + w²)`:
/// `w ← w − η ∂E_i/∂w − η λ 2w/(1 + w²)²`. Biases take the plain step.
pub fn step_weight_decay_rational<F: Scalar>(
    net: &mut Network<F>,
    grads_data: &ParamBuffer<F>,
    eta: F,
    lambda: F,
) -> Result<(), TrainError> {
    check_shape(net, grads_data)?;
    for (layer, grad) in net.params.layers.iter_mut().zip(&grads_data.layers) {
        for (w, &g) in layer.weights.iter_mut().zip(&grad.weights) {
            let d = F::one() + *w * *w;
            let decay = eta * lambda * (*w + *w) / (d * d);
            *w = *w - eta * g - decay;
        }
        for (b, &g) in layer.biases.iter_mut().zip(&grad.biases) {
            *b = *b - eta * g;
        }
    }
    check_finite(net)
}

/// Plain step on the data gradient plus the penalty gradient.
pub fn step_penalized<F: Scalar>(
    net: &mut Network<F>,
    grads_data: &ParamBuffer<F>,
    eta: F,
    penalty: Penalty,
) -> Result<(), TrainError> {
    check_shape(net, grads_data)?;
    let mut total = grads_data.clone();
    total.add_scaled(&penalty.gradient(net), F::one());
    step_plain_gd(net, &total, eta)
}
