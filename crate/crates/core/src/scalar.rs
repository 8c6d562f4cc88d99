use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point element type accepted by networks, datasets and metrics.
///
/// Implemented for `f32` and `f64`. Hyperparameters and statistics stay in
/// `f64`; they are converted into the working precision at the boundary.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal or hyperparameter into this type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
