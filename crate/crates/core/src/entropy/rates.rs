//! Theoretical envelopes, decay-rate fits and the two-sided bounds for
//! symmetric spaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::Exponent;

/// Caller-supplied constants of the three envelope regimes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeConstants {
    pub c_small: f64,
    pub c_mid: f64,
    pub c_large: f64,
}

impl Default for RegimeConstants {
    fn default() -> Self {
        RegimeConstants { c_small: 1.0, c_mid: 1.0, c_large: 1.0 }
    }
}

/// Which exponent the large-`k` regime uses: `2^{-k/D}` with `D = d` for
/// balls, `D = d - 1` for spheres and `D = d - min(1, p)` for the weaker
/// sphere bound obtained from volume arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    Ball,
    Sphere,
    SphereVolume,
}

impl Envelope {
    pub fn decay_dimension(self, p: f64, d: usize) -> f64 {
        let d = d as f64;
        match self {
            Envelope::Ball => d,
            Envelope::Sphere => d - 1.0,
            Envelope::SphereVolume => d - p.min(1.0),
        }
    }
}

/// Envelope of `e_k(B_p^d, l_q^d)` (or of the sphere), up to constants.
///
/// * `k <= log2 d`: `c_small`
/// * `log2 d < k < d`: `c_mid (log2(1 + d/k) / k)^{1/p - 1/q}`
/// * `k >= d`: `c_large 2^{-k/D} d^{1/q - 1/p}`
///
/// `k` may be fractional.
pub fn theoretical_rate(
    p: Exponent,
    q: Exponent,
    d: usize,
    k: f64,
    constants: &RegimeConstants,
    envelope: Envelope,
) -> Result<f64> {
    if !(p.value() > 0.0) || !(q.value() > 0.0) {
        return Err(Error::Precondition(format!("exponents must be positive, got p={p}, q={q}")));
    }
    if p.value() > q.value() {
        return Err(Error::Precondition(format!("the envelope needs p <= q, got p={p}, q={q}")));
    }
    if d < 2 {
        return Err(Error::Precondition(format!("the envelope needs d >= 2, got {d}")));
    }
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::Precondition(format!("k must be at least 1, got {k}")));
    }
    let df = d as f64;
    let gap = p.reciprocal() - q.reciprocal();
    Ok(if k <= df.log2() {
        constants.c_small
    } else if k < df {
        constants.c_mid * ((1.0 + df / k).log2() / k).powf(gap)
    } else {
        let dd = envelope.decay_dimension(p.value(), d);
        constants.c_large * (-k / dd).exp2() * df.powf(-gap)
    })
}

/// Least-squares line through `(k, log2 value)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub k_range: [f64; 2],
    /// Root mean square of the fit residuals.
    pub residual: f64,
}

pub fn fit_decay_rate(series: &[(f64, f64)]) -> Result<RateFit> {
    if series.len() < 4 {
        return Err(Error::Precondition(format!("a fit needs at least 4 points, got {}", series.len())));
    }
    if let Some((k, v)) = series.iter().find(|(k, v)| !(*v > 0.0 && v.is_finite() && k.is_finite())) {
        return Err(Error::Precondition(format!("fit values must be positive and finite, got {v} at k={k}")));
    }
    let n = series.len() as f64;
    let k_min = series.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let k_max = series.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    if k_min >= k_max {
        return Err(Error::Precondition("fit points need at least two distinct k".into()));
    }
    let mk = series.iter().map(|s| s.0).sum::<f64>() / n;
    let my = series.iter().map(|s| s.1.log2()).sum::<f64>() / n;
    let sxx: f64 = series.iter().map(|s| (s.0 - mk).powi(2)).sum();
    let sxy: f64 = series.iter().map(|s| (s.0 - mk) * (s.1.log2() - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mk;
    let sse: f64 = series.iter().map(|s| (s.1.log2() - intercept - slope * s.0).powi(2)).sum();
    Ok(RateFit { slope, intercept, k_range: [k_min, k_max], residual: (sse / n).sqrt() })
}

/// Label for the unnamed constant of the two-sided bound.
pub const COROLLARY_CONSTANT_LABEL: &str = "c (Schütt, unspecified)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryBounds {
    pub lower: f64,
    /// `inf` when only the lower bound applies.
    pub upper: f64,
    pub two_sided: bool,
    pub constant: f64,
    pub constant_label: String,
}

/// Bounds on `e_k(S_X, Y)` for symmetric `X`, `Y` from their fundamental
/// functions. `lambda_x[l - 1]` holds `lambda_X(l)`.
///
/// * `k <= d - 1`: lower `max_{l=k..d-1} lambda_Y(l)/lambda_X(l) / (2e)`,
///   no upper bound.
/// * `k >= 2d + ceil(log2 d) - 1`: lower `2^{-k/(d-1)} r / e` and upper
///   `32 c 2^{-k/(d-1)} r` with `r = lambda_Y(d-1)/lambda_X(d-1)`.
/// * otherwise [`Error::NoClaim`].
pub fn symmetric_corollary_bounds(
    lambda_x: &[f64],
    lambda_y: &[f64],
    d: usize,
    k: usize,
    c: f64,
) -> Result<CorollaryBounds> {
    if d < 2 || k < 1 {
        return Err(Error::Precondition(format!("need d >= 2 and k >= 1, got d={d}, k={k}")));
    }
    if lambda_x.len() < d - 1 || lambda_y.len() < d - 1 {
        return Err(Error::Precondition(format!("fundamental-function tables need {} entries", d - 1)));
    }
    if lambda_x[..d - 1].iter().chain(&lambda_y[..d - 1]).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Precondition("fundamental-function values must be positive".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Precondition(format!("the constant must be positive, got {c}")));
    }
    let e = std::f64::consts::E;
    let ratio = |l: usize| lambda_y[l - 1] / lambda_x[l - 1];
    let label = COROLLARY_CONSTANT_LABEL.to_string();
    if k < d {
        let best = (k..d).map(ratio).fold(f64::NEG_INFINITY, f64::max);
        return Ok(CorollaryBounds {
            lower: best / (2.0 * e),
            upper: f64::INFINITY,
            two_sided: false,
            constant: c,
            constant_label: label,
        });
    }
    let start = 2 * d + (d as f64).log2().ceil() as usize - 1;
    if k < start {
        return Err(Error::NoClaim(format!("k={k} lies in the gap {d}..{start} for d={d}")));
    }
    let decay = (-(k as f64) / (d - 1) as f64).exp2() * ratio(d - 1);
    let lower = decay / e;
    let upper = 32.0 * c * decay;
    if lower > upper {
        return Err(Error::Inconsistent(format!(
            "lower bound {lower} exceeds upper bound {upper} with {label} = {c}"
        )));
    }
    Ok(CorollaryBounds { lower, upper, two_sided: true, constant: c, constant_label: label })
}
