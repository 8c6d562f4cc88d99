//! Student t tail probabilities and the studentized range distribution.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2};
use std::sync::{Mutex, OnceLock};

use statrs::function::{beta::beta_reg, erf::erfc, gamma::ln_gamma};

use super::quadrature::integrate;
use super::BenchError;

/// Absolute accuracy promised for [`ptukey`].
pub const PTUKEY_TOLERANCE: f64 = 1e-6;
const INNER_TOL: f64 = 1e-11;
const OUTER_TOL: f64 = 1e-9;
const MAX_PIECES: usize = 400;
const QUANTILE_TOL: f64 = 1e-8;

/// Two-sided p-value `P(|T| ≥ |t|)` for Student's t with `df` degrees of
/// freedom, via the regularized incomplete beta function.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    assert!(df > 0.0, "degrees of freedom must be positive");
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    beta_reg(0.5 * df, 0.5, x.clamp(0.0, 1.0)).clamp(0.0, 1.0)
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() * 0.398_942_280_401_432_7
}

/// `Φ(b) − Φ(a)` for `a < b`, using the upper tail when both are positive.
fn normal_mass(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        normal_sf(a) - normal_sf(b)
    } else {
        normal_cdf(b) - normal_cdf(a)
    }
}

/// CDF of the range of `k` independent standard normals.
fn range_cdf(w: f64, k: usize) -> Result<f64, BenchError> {
    if w <= 0.0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    let r = integrate(
        |z| normal_pdf(z) * normal_mass(z - w, z).powi(k as i32 - 1),
        -8.5,
        8.5,
        INNER_TOL,
        MAX_PIECES,
    );
    if !(r.error <= INNER_TOL * 10.0) || !r.value.is_finite() {
        return Err(BenchError::Quadrature(format!(
            "range-of-normals integral at w = {w}, k = {k}: error estimate {:e}",
            r.error
        )));
    }
    Ok((kf * r.value).clamp(0.0, 1.0))
}

/// Density of `s = sqrt(χ²_ν / ν)`.
fn scaled_chi_pdf(s: f64, nu: f64, log_norm: f64) -> f64 {
    if s <= 0.0 {
        return if nu == 1.0 { log_norm.exp() } else { 0.0 };
    }
    (log_norm + (nu - 1.0) * s.ln() - 0.5 * nu * s * s).exp()
}

/// CDF of the studentized range `q` for `k` means and `df` error degrees of
/// freedom. Infinite `df` gives the range-of-normals CDF directly.
pub fn ptukey(q: f64, k: usize, df: f64) -> Result<f64, BenchError> {
    if k < 2 {
        return Err(BenchError::InvalidArgument(format!(
            "studentized range needs k >= 2, got {k}"
        )));
    }
    if df.is_nan() || df <= 0.0 {
        return Err(BenchError::InvalidArgument(format!(
            "degrees of freedom must be positive, got {df}"
        )));
    }
    if q.is_nan() {
        return Err(BenchError::InvalidArgument("q is NaN".into()));
    }
    if q <= 0.0 {
        return Ok(0.0);
    }
    if df.is_infinite() {
        return range_cdf(q, k);
    }
    let nu = df;
    let log_norm = LN_2 + 0.5 * nu * (0.5 * nu).ln() - ln_gamma(0.5 * nu);
    let spread = 12.0 / (2.0 * nu).sqrt();
    let lo = (1.0 - spread).max(0.0);
    let hi = 1.0 + spread.max(8.0 / nu.sqrt());
    let mut inner_err: Option<BenchError> = None;
    let mut integrand = |s: f64| {
        let density = scaled_chi_pdf(s, nu, log_norm);
        if density == 0.0 || inner_err.is_some() {
            return 0.0;
        }
        match range_cdf(q * s, k) {
            Ok(w) => density * w,
            Err(e) => {
                inner_err = Some(e);
                0.0
            }
        }
    };
    let mode = ((nu - 1.0).max(0.0) / nu).sqrt().clamp(lo, hi);
    let mut total = 0.0;
    let mut error = 0.0;
    for (a, b) in [(lo, mode), (mode, hi)] {
        if b > a {
            let r = integrate(&mut integrand, a, b, 0.5 * OUTER_TOL, MAX_PIECES);
            total += r.value;
            error += r.error;
        }
    }
    if let Some(e) = inner_err {
        return Err(e);
    }
    if !(error <= PTUKEY_TOLERANCE * 0.1) || !total.is_finite() {
        return Err(BenchError::Quadrature(format!(
            "studentized range CDF at q = {q}, k = {k}, df = {df}: error estimate {error:e}"
        )));
    }
    Ok(total.clamp(0.0, 1.0))
}

type QuantileKey = (u64, usize, u64);

fn quantile_cache() -> &'static Mutex<HashMap<QuantileKey, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<QuantileKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Upper critical value `q` with `ptukey(q, k, df) = p`, found by bisection.
pub fn qtukey(p: f64, k: usize, df: f64) -> Result<f64, BenchError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(BenchError::InvalidArgument(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    let key = (p.to_bits(), k, df.to_bits());
    if let Some(&q) = quantile_cache().lock().expect("cache poisoned").get(&key) {
        return Ok(q);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while ptukey(hi, k, df)? < p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(BenchError::Quadrature(format!(
                "studentized range quantile for p = {p}, k = {k}, df = {df} not bracketed"
            )));
        }
    }
    while hi - lo > QUANTILE_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if ptukey(mid, k, df)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    quantile_cache().lock().expect("cache poisoned").insert(key, q);
    Ok(q)
}
