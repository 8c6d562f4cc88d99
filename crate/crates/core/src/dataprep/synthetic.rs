use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::seed::rng_from_seed;
use crate::Scalar;

/// Constant offset added to every synthetic target so activities stay
/// positive (percentage errors are undefined at zero).
pub const SYNTHETIC_INTERCEPT: f64 = 1.0;

/// Generator arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub informative: usize,
    pub noise_sd: f64,
    pub nonlinearity: f64,
    pub seed: u64,
}

/// Everything needed to recompute the noiseless target from the features.
///
/// `target = intercept + Σ_j coefficients[j]·x[informative_columns[j]]
///         + nonlinearity · Σ_j sin(π·x[a_j])·cos(π·x[a_{j+1 mod k}])
///         + noise_sd · z`, with `z` standard normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRecipe {
    pub spec: SyntheticSpec,
    pub intercept: f64,
    pub informative_columns: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub nonlinear_term: String,
}

impl SyntheticRecipe {
    pub fn linear_part(&self, x: &[f64]) -> f64 {
        self.informative_columns
            .iter()
            .zip(&self.coefficients)
            .fold(self.intercept, |acc, (&c, &w)| acc + w * x[c])
    }

    pub fn nonlinear_part(&self, x: &[f64]) -> f64 {
        let cols = &self.informative_columns;
        let k = cols.len();
        (0..k)
            .map(|j| (PI * x[cols[j]]).sin() * (PI * x[cols[(j + 1) % k]]).cos())
            .sum()
    }
}

/// Seeded stand-in for a descriptor dataset: uniform `[0, 1]` features and a
/// target built from `informative` randomly chosen columns.
pub fn gen_synthetic<F: Scalar>(spec: &SyntheticSpec) -> Result<Dataset<F>, DataError> {
    if spec.p == 0 || spec.informative == 0 || spec.informative > spec.p {
        return Err(DataError::InvalidSpec(format!(
            "need 1 <= informative ({}) <= p ({})",
            spec.informative, spec.p
        )));
    }
    if spec.n < 2 {
        return Err(DataError::InvalidSpec(format!("n = {} < 2", spec.n)));
    }
    if !(spec.noise_sd >= 0.0 && spec.noise_sd.is_finite()) || !spec.nonlinearity.is_finite() {
        return Err(DataError::InvalidSpec("noise_sd must be finite and >= 0".into()));
    }

    let mut rng = rng_from_seed(spec.seed);
    let mut informative_columns = sample(&mut rng, spec.p, spec.informative).into_vec();
    informative_columns.sort_unstable();
    let coefficients: Vec<f64> = (0..spec.informative).map(|_| rng.random_range(0.5..1.5)).collect();
    let recipe = SyntheticRecipe {
        spec: *spec,
        intercept: SYNTHETIC_INTERCEPT,
        informative_columns,
        coefficients,
        nonlinear_term: "sum_j sin(pi*x[a_j])*cos(pi*x[a_(j+1) mod k])".into(),
    };

    let mut features = Vec::with_capacity(spec.n * spec.p);
    let mut target = Vec::with_capacity(spec.n);
    let mut row = vec![0.0f64; spec.p];
    for _ in 0..spec.n {
        row.iter_mut().for_each(|v| *v = rng.random::<f64>());
        let z: f64 = rng.sample(StandardNormal);
        let mut y = recipe.linear_part(&row);
        if spec.nonlinearity != 0.0 {
            y += spec.nonlinearity * recipe.nonlinear_part(&row);
        }
        if spec.noise_sd != 0.0 {
            y += spec.noise_sd * z;
        }
        features.extend(row.iter().map(|&v| F::of(v)));
        target.push(F::of(y));
    }
    let names = (1..=spec.p).map(|j| format!("d{j}")).collect();
    let mut data = Dataset::from_flat(features, target, names, "activity".into())?;
    data.set_recipe(recipe);
    Ok(data)
}
