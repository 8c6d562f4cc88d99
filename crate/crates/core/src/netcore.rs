//! Zero- and one-hidden-layer feed-forward networks with a single output.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataprep::Dataset;
use crate::seed::rng_from_seed;
use crate::Scalar;

pub const NETWORK_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("expected {expected} inputs, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("at most one hidden layer is supported, got {0}")]
    UnsupportedDepth(usize),
    #[error("layer sizes must be positive")]
    EmptyLayer,
    #[error("init half-width must be finite and >= 0, got {0}")]
    InvalidInit(f64),
    #[error("row index {index} out of range for {n} rows")]
    RowOutOfRange { index: usize, n: usize },
    #[error("malformed network document: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Sigmoid,
}

impl Activation {
    pub fn apply<F: Scalar>(self, z: F) -> F {
        match self {
            Activation::Linear => z,
            Activation::Sigmoid => {
                let y = if z >= F::zero() {
                    F::one() / (F::one() + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (F::one() + e)
                };
                // Saturated values stay strictly inside (0, 1).
                y.max(F::min_positive_value()).min(F::one() - F::epsilon() / F::of(2.0))
            }
        }
    }

    /// Derivative with respect to the pre-activation, written in terms of
    /// the post-activation `y` (sigmoid: `y(1 - y)`).
    pub fn derivative<F: Scalar>(self, y: F) -> F {
        match self {
            Activation::Linear => F::one(),
            Activation::Sigmoid => y * (F::one() - y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    UniformSymmetric,
}

/// Parameters drawn i.i.d. uniform in `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub scheme: InitScheme,
    pub half_width: f64,
    pub seed: u64,
}

impl InitSpec {
    pub const DEFAULT_HALF_WIDTH: f64 = 0.5;

    pub fn uniform(half_width: f64, seed: u64) -> Self {
        Self {
            scheme: InitScheme::UniformSymmetric,
            half_width,
            seed,
        }
    }
}

/// One fully connected layer. `weights` is row-major `fan_out × fan_in`,
/// so `weights[j * fan_in + i]` connects input `i` to node `j`.
///
/// The same type doubles as a parameter-shaped buffer (gradients, momentum).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Scalar"))]
pub struct DenseLayer<F> {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<F>,
    pub biases: Vec<F>,
}

impl<F: Scalar> DenseLayer<F> {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            fan_in,
            fan_out,
            weights: vec![F::zero(); fan_in * fan_out],
            biases: vec![F::zero(); fan_out],
        }
    }

    pub fn weight(&self, node: usize, input: usize) -> F {
        self.weights[node * self.fan_in + input]
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.fan_in == other.fan_in
            && self.fan_out == other.fan_out
            && self.weights.len() == other.weights.len()
            && self.biases.len() == other.biases.len()
    }
}

/// Parameter-shaped buffer: one [`DenseLayer`] per network layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Scalar"))]
pub struct ParamBuffer<F> {
    pub layers: Vec<DenseLayer<F>>,
}

impl<F: Scalar> ParamBuffer<F> {
    pub fn zeros_like(net: &Network<F>) -> Self {
        Self {
            layers: net
                .layers()
                .iter()
                .map(|l| DenseLayer::zeros(l.fan_in, l.fan_out))
                .collect(),
        }
    }

    pub fn is_congruent(&self, net: &Network<F>) -> bool {
        self.layers.len() == net.n_layers() && self.layers.iter().zip(net.layers()).all(|(a, b)| a.same_shape(b))
    }

    pub fn values(&self) -> impl Iterator<Item = &F> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut F> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    /// `self += scale * other`, elementwise.
    pub fn add_scaled(&mut self, other: &Self, scale: F) {
        for (a, &b) in self.values_mut().zip(other.values()) {
            *a = *a + scale * b;
        }
    }

    pub fn scale(&mut self, factor: F) {
        self.values_mut().for_each(|v| *v = *v * factor);
    }

    pub fn norm(&self) -> F {
        self.values().map(|&v| v * v).sum::<F>().sqrt()
    }
}

/// Feed-forward network: `n_inputs → [hidden] → 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Scalar"))]
pub struct Network<F> {
    pub n_inputs: usize,
    pub hidden_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub init: InitSpec,
    pub params: ParamBuffer<F>,
}

/// Per-layer pre-activations (`nnet_j`) and post-activations (`y_j`).
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache<F> {
    pub input: Vec<F>,
    pub pre: Vec<Vec<F>>,
    pub post: Vec<Vec<F>>,
}

impl<F> ForwardCache<F> {
    /// Inputs seen by `layer`: the raw input for layer 0, else the previous
    /// layer's post-activations.
    pub fn layer_input(&self, layer: usize) -> &[F] {
        if layer == 0 {
            &self.input
        } else {
            &self.post[layer - 1]
        }
    }
}

pub fn init_network<F: Scalar>(
    n_inputs: usize,
    hidden_sizes: &[usize],
    hidden_activation: Activation,
    output_activation: Activation,
    init: InitSpec,
) -> Result<Network<F>, NetError> {
    if hidden_sizes.len() > 1 {
        return Err(NetError::UnsupportedDepth(hidden_sizes.len()));
    }
    if n_inputs == 0 || hidden_sizes.contains(&0) {
        return Err(NetError::EmptyLayer);
    }
    if !(init.half_width >= 0.0 && init.half_width.is_finite()) {
        return Err(NetError::InvalidInit(init.half_width));
    }
    let mut rng = rng_from_seed(init.seed);
    let h = init.half_width;
    let mut draw = || -> F {
        if h == 0.0 {
            F::zero()
        } else {
            F::of(rng.random_range(-h..=h))
        }
    };
    let mut sizes = vec![n_inputs];
    sizes.extend_from_slice(hidden_sizes);
    sizes.push(1);
    let layers = sizes
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let weights = (0..fan_in * fan_out).map(|_| draw()).collect();
            let biases = (0..fan_out).map(|_| draw()).collect();
            DenseLayer {
                fan_in,
                fan_out,
                weights,
                biases,
            }
        })
        .collect();
    Ok(Network {
        n_inputs,
        hidden_sizes: hidden_sizes.to_vec(),
        hidden_activation,
        output_activation,
        init,
        params: ParamBuffer { layers },
    })
}

impl<F: Scalar> Network<F> {
    pub fn layers(&self) -> &[DenseLayer<F>] {
        &self.params.layers
    }

    pub fn n_layers(&self) -> usize {
        self.params.layers.len()
    }

    pub fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.n_layers() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    /// Evaluates the network, keeping every intermediate for backprop.
    pub fn forward(&self, x: &[F]) -> Result<(F, ForwardCache<F>), NetError> {
        if x.len() != self.n_inputs {
            return Err(NetError::DimensionMismatch {
                expected: self.n_inputs,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(NetError::NonFinite("input"));
        }
        let mut pre = Vec::with_capacity(self.n_layers());
        let mut post: Vec<Vec<F>> = Vec::with_capacity(self.n_layers());
        for (l, layer) in self.params.layers.iter().enumerate() {
            let act = self.activation_of(l);
            let input = if l == 0 { x } else { &post[l - 1] };
            let z: Vec<F> = (0..layer.fan_out)
                .map(|j| {
                    let row = &layer.weights[j * layer.fan_in..(j + 1) * layer.fan_in];
                    row.iter()
                        .zip(input)
                        .fold(layer.biases[j], |acc, (&w, &xi)| acc + w * xi)
                })
                .collect();
            let y = z.iter().map(|&v| act.apply(v)).collect();
            pre.push(z);
            post.push(y);
        }
        let output = post.last().expect("network has an output layer")[0];
        Ok((
            output,
            ForwardCache {
                input: x.to_vec(),
                pre,
                post,
            },
        ))
    }

    pub fn predict(&self, x: &[F]) -> Result<F, NetError> {
        self.forward(x).map(|(y, _)| y)
    }

    /// Structural and finiteness checks, used after deserialization.
    pub fn validate(&self) -> Result<(), NetError> {
        if self.hidden_sizes.len() > 1 {
            return Err(NetError::UnsupportedDepth(self.hidden_sizes.len()));
        }
        let mut sizes = vec![self.n_inputs];
        sizes.extend_from_slice(&self.hidden_sizes);
        sizes.push(1);
        if self.params.layers.len() != sizes.len() - 1 {
            return Err(NetError::Malformed("layer count does not match hidden_sizes".into()));
        }
        for (layer, w) in self.params.layers.iter().zip(sizes.windows(2)) {
            if layer.fan_in != w[0]
                || layer.fan_out != w[1]
                || layer.weights.len() != w[0] * w[1]
                || layer.biases.len() != w[1]
            {
                return Err(NetError::Malformed("layer shapes do not chain".into()));
            }
        }
        if !self.params.all_finite() {
            return Err(NetError::NonFinite("parameter"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkDocument {
            schema_version: NETWORK_SCHEMA_VERSION,
            network: self.clone(),
        })
        .expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NetError> {
        let doc: NetworkDocument<F> = serde_json::from_str(text).map_err(|e| NetError::Malformed(e.to_string()))?;
        if doc.schema_version != NETWORK_SCHEMA_VERSION {
            return Err(NetError::Malformed(format!(
                "unsupported schema_version {}",
                doc.schema_version
            )));
        }
        doc.network.validate()?;
        Ok(doc.network)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Scalar"))]
struct NetworkDocument<F> {
    schema_version: u32,
    network: Network<F>,
}

/// Forward pass over `rows` of `data`, in order.
pub fn predict_batch<F: Scalar>(net: &Network<F>, data: &Dataset<F>, rows: &[usize]) -> Result<Vec<F>, NetError> {
    if data.n_features() != net.n_inputs {
        return Err(NetError::DimensionMismatch {
            expected: net.n_inputs,
            found: data.n_features(),
        });
    }
    rows.iter()
        .map(|&r| {
            if r >= data.n_rows() {
                return Err(NetError::RowOutOfRange {
                    index: r,
                    n: data.n_rows(),
                });
            }
            net.predict(data.row(r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn linear_net(weights: Vec<f64>, bias: f64) -> Network<f64> {
        let mut net = init_network(
            weights.len(),
            &[],
            Activation::Linear,
            Activation::Linear,
            InitSpec::uniform(0.0, 0),
        )
        .unwrap();
        net.params.layers[0].weights = weights;
        net.params.layers[0].biases = vec![bias];
        net
    }

    #[test]
    fn affine_no_hidden_layer() {
        let net = linear_net(vec![1.0, 2.0], 0.5);
        assert_eq!(net.predict(&[1.0, 1.0]).unwrap(), 3.5);
    }

    #[test]
    fn single_sigmoid_hidden_node() {
        let mut net: Network<f64> = init_network(
            1,
            &[1],
            Activation::Sigmoid,
            Activation::Linear,
            InitSpec::uniform(0.0, 0),
        )
        .unwrap();
        net.params.layers[0].weights = vec![1.0];
        net.params.layers[1].weights = vec![1.0];
        assert_eq!(net.predict(&[0.0]).unwrap(), 0.5);
    }

    #[test]
    fn zero_init_gives_half_hidden_outputs() {
        let net: Network<f64> = init_network(
            4,
            &[3],
            Activation::Sigmoid,
            Activation::Linear,
            InitSpec::uniform(0.0, 5),
        )
        .unwrap();
        assert!(net.params.values().all(|&v| v == 0.0));
        let (_, cache) = net.forward(&[0.3, -2.0, 7.0, 1.0]).unwrap();
        assert_eq!(cache.post[0], vec![0.5; 3]);
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let spec = InitSpec::uniform(0.25, 42);
        let a: Network<f64> = init_network(6, &[4], Activation::Sigmoid, Activation::Linear, spec).unwrap();
        let b: Network<f64> = init_network(6, &[4], Activation::Sigmoid, Activation::Linear, spec).unwrap();
        assert_eq!(a, b);
        assert!(a.params.values().all(|v| v.abs() <= 0.25));
        assert_eq!(a.params.len(), 6 * 4 + 4 + 4 + 1);
        let c: Network<f64> = init_network(
            6,
            &[4],
            Activation::Sigmoid,
            Activation::Linear,
            InitSpec::uniform(0.25, 43),
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_two_hidden_layers() {
        let err = init_network::<f64>(
            3,
            &[2, 2],
            Activation::Sigmoid,
            Activation::Linear,
            InitSpec::uniform(0.5, 0),
        )
        .unwrap_err();
        assert!(matches!(err, NetError::UnsupportedDepth(2)));
    }

    #[test]
    fn forward_rejects_bad_input() {
        let net = linear_net(vec![1.0, 1.0], 0.0);
        assert!(matches!(net.forward(&[1.0]), Err(NetError::DimensionMismatch { .. })));
        assert!(matches!(
            net.forward(&[1.0, f64::INFINITY]),
            Err(NetError::NonFinite(_))
        ));
    }

    #[test]
    fn batch_matches_per_row() {
        let data = Dataset::from_rows(
            vec![vec![0.1, 0.2], vec![0.3, 0.4], vec![0.5, 0.6]],
            vec![0.0; 3],
            vec!["a".into(), "b".into()],
            "y",
        )
        .unwrap();
        let net: Network<f64> = init_network(
            2,
            &[3],
            Activation::Sigmoid,
            Activation::Linear,
            InitSpec::uniform(0.5, 1),
        )
        .unwrap();
        assert!(predict_batch(&net, &data, &[]).unwrap().is_empty());
        let rows = [2, 0, 1];
        let batch = predict_batch(&net, &data, &rows).unwrap();
        let looped: Vec<f64> = rows.iter().map(|&r| net.predict(data.row(r)).unwrap()).collect();
        assert_eq!(batch, looped);
        assert_eq!(
            predict_batch(&net, &data, &[1]).unwrap(),
            vec![net.predict(data.row(1)).unwrap()]
        );
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let net: Network<f64> = init_network(
            5,
            &[3],
            Activation::Sigmoid,
            Activation::Linear,
            InitSpec::uniform(0.5, 9),
        )
        .unwrap();
        let back = Network::<f64>::from_json(&net.to_json()).unwrap();
        let bits = |n: &Network<f64>| n.params.values().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&net));
        assert_eq!(back, net);
    }

    #[test]
    fn json_rejects_broken_shapes() {
        let net = linear_net(vec![1.0, 2.0], 0.0);
        let text = net.to_json().replace("\"n_inputs\": 2", "\"n_inputs\": 3");
        assert!(Network::<f64>::from_json(&text).is_err());
    }

    #[test]
    fn f32_network_runs() {
        let net: Network<f32> = init_network(
            2,
            &[2],
            Activation::Sigmoid,
            Activation::Sigmoid,
            InitSpec::uniform(0.5, 3),
        )
        .unwrap();
        let y = net.predict(&[0.2, 0.9]).unwrap();
        assert!(y > 0.0 && y < 1.0);
    }

    proptest! {
        #[test]
        fn zero_hidden_matches_affine_and_logistic(
            w in prop::collection::vec(-3.0f64..3.0, 1..8),
            b in -3.0f64..3.0,
            x in prop::collection::vec(-2.0f64..2.0, 8),
        ) {
            let x = &x[..w.len()];
            let affine = w.iter().zip(x).fold(b, |acc, (wi, xi)| acc + wi * xi);
            let lin = linear_net(w.clone(), b);
            prop_assert!((lin.predict(x).unwrap() - affine).abs() <= 1e-12);
            let mut logit = lin.clone();
            logit.output_activation = Activation::Sigmoid;
            let expected = 1.0 / (1.0 + (-affine).exp());
            prop_assert!((logit.predict(x).unwrap() - expected).abs() <= 1e-12);
        }

        #[test]
        fn sigmoid_range_and_cache_consistency(
            seed: u64,
            x in prop::collection::vec(-50.0f64..50.0, 4),
        ) {
            let net: Network<f64> =
                init_network(4, &[5], Activation::Sigmoid, Activation::Sigmoid, InitSpec::uniform(2.0, seed)).unwrap();
            let (out, cache) = net.forward(&x).unwrap();
            let (out2, _) = net.forward(&x).unwrap();
            prop_assert_eq!(out.to_bits(), out2.to_bits());
            for (l, (pre, post)) in cache.pre.iter().zip(&cache.post).enumerate() {
                let act = net.activation_of(l);
                for (&z, &y) in pre.iter().zip(post) {
                    prop_assert!(y > 0.0 && y < 1.0);
                    prop_assert_eq!(act.apply(z).to_bits(), y.to_bits());
                }
            }
        }
    }
}
