//! Feed-forward neural network training regimes for descriptor regression
//! and the statistics used to compare them across resampled benchmarks.
//!
//! The numeric core (datasets, networks, trainers, metrics) is generic over
//! [`Scalar`] (`f32` or `f64`); the `*64` aliases below name the usual
//! double-precision instantiations. Benchmark statistics are computed in
//! `f64` regardless of the training precision.

pub mod bench;
pub mod dataprep;
pub mod metrics;
pub mod models;
pub mod netcore;
mod scalar;
pub mod seed;
pub mod trainers;

pub use scalar::Scalar;

pub type Dataset64 = dataprep::Dataset<f64>;
pub type Dataset32 = dataprep::Dataset<f32>;
pub type Network64 = netcore::Network<f64>;
pub type Network32 = netcore::Network<f32>;
pub type ParamBuffer64 = netcore::ParamBuffer<f64>;
pub type GradientSet64 = trainers::GradientSet<f64>;
pub type MetricsReport64 = metrics::MetricsReport<f64>;
pub type ScalingParams64 = dataprep::ScalingParams<f64>;
