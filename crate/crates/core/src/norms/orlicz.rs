//! Orlicz functions.
//!
//! The non-power families are only given near zero. Past the end of their
//! stated domain they are continued linearly with the one-sided slope at the
//! endpoint, which keeps them convex and strictly increasing on `[0, inf)`.
//! The continued function is then rescaled in its argument so that
//! `M(1) = 1`, i.e. every canonical basis vector has norm one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The Orlicz function families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrliczSpec {
    /// `M(t) = t^p`, `p >= 1`.
    Power { p: f64 },
    /// `M(t) = exp(-1/t^2)` on `[0, 1/2)`.
    ExpInvSquare,
    /// `M(t) = t^p ln(1/t)^alpha` on `[0, t0)`, `p > 1`, `alpha > 0`.
    PowerLog { p: f64, alpha: f64 },
}

impl OrliczSpec {
    /// `(beta, gamma, t0)` of the power-log family.
    pub fn power_log_parameters(p: f64, alpha: f64) -> Result<(f64, f64, f64)> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidSpec(format!("power_log needs p > 1, got {p}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidSpec(format!("power_log needs alpha > 0, got {alpha}")));
        }
        let beta = alpha * (2.0 * p - 1.0) / (p * p - p);
        let gamma = (alpha * alpha - alpha) / (p * p - p);
        let disc = beta * beta - gamma;
        if disc < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "power_log needs beta^2 >= gamma (beta = {beta}, gamma = {gamma})"
            )));
        }
        let t0 = (-(beta + disc.sqrt())).exp();
        Ok((beta, gamma, t0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Shape {
    Power { p: f64 },
    ExpInvSquare,
    PowerLog { p: f64, alpha: f64 },
}

/// A validated, normalized Orlicz function ready for evaluation.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct OrliczFn {
    shape: Shape,
    /// End of the stated domain (`inf` for powers).
    edge: f64,
    m_edge: f64,
    slope: f64,
    /// Argument scale making the normalized function hit one at one.
    tau: f64,
}

impl OrliczFn {
    pub(crate) fn new(spec: &OrliczSpec) -> Result<Self> {
        let (shape, edge, m_edge, slope) = match *spec {
            OrliczSpec::Power { p } => {
                if !(p >= 1.0 && p.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "Orlicz power function needs finite p >= 1, got {p}"
                    )));
                }
                (Shape::Power { p }, f64::INFINITY, f64::INFINITY, f64::INFINITY)
            }
            OrliczSpec::ExpInvSquare => {
                let edge = 0.5_f64;
                let m_edge = (-1.0 / (edge * edge)).exp();
                let slope = 2.0 / edge.powi(3) * m_edge;
                (Shape::ExpInvSquare, edge, m_edge, slope)
            }
            OrliczSpec::PowerLog { p, alpha } => {
                let (_, _, t0) = OrliczSpec::power_log_parameters(p, alpha)?;
                let l0 = -t0.ln();
                let m_edge = t0.powf(p) * l0.powf(alpha);
                let slope = t0.powf(p - 1.0) * l0.powf(alpha - 1.0) * (p * l0 - alpha);
                if !(slope > 0.0) {
                    return Err(Error::InvalidSpec("power_log is not increasing at t0".into()));
                }
                (Shape::PowerLog { p, alpha }, t0, m_edge, slope)
            }
        };
        let mut f = OrliczFn { shape, edge, m_edge, slope, tau: 1.0 };
        f.tau = match f.raw_inverse_closed(1.0) {
            Some(t) => t,
            None => f.raw_inverse_numeric(1.0),
        };
        Ok(f)
    }

    /// The continued but unnormalized function.
    fn raw(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.edge {
            return self.m_edge + self.slope * (t - self.edge);
        }
        match self.shape {
            Shape::Power { p } => power(t, p),
            Shape::ExpInvSquare => (-1.0 / (t * t)).exp(),
            Shape::PowerLog { p, alpha } => {
                let l = -t.ln();
                power(t, p) * if alpha == 1.0 { l } else { l.powf(alpha) }
            }
        }
    }

    fn raw_inverse_closed(&self, y: f64) -> Option<f64> {
        if y <= 0.0 {
            return Some(0.0);
        }
        if let Shape::Power { p } = self.shape {
            return Some(y.powf(1.0 / p));
        }
        if y >= self.m_edge {
            return Some(self.edge + (y - self.m_edge) / self.slope);
        }
        match self.shape {
            Shape::ExpInvSquare => Some(1.0 / (-y.ln()).sqrt()),
            _ => None,
        }
    }

    fn raw_inverse_numeric(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, if self.edge.is_finite() { self.edge } else { 1.0 });
        while self.raw(hi) < y {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.raw(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Normalized Orlicz function, `M(1) = 1`.
    #[inline]
    pub(crate) fn eval(&self, t: f64) -> f64 {
        self.raw(self.tau * t)
    }

    /// Closed-form inverse of the normalized function where one exists.
    pub(crate) fn inverse(&self, y: f64) -> Option<f64> {
        self.raw_inverse_closed(y).map(|t| t / self.tau)
    }

    /// Inverse by bisection, available for every family.
    pub(crate) fn inverse_numeric(&self, y: f64) -> f64 {
        self.raw_inverse_numeric(y) / self.tau
    }

    /// Argument scale applied to the continued function.
    pub(crate) fn scale(&self) -> f64 {
        self.tau
    }
}

#[inline]
fn power(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t * t
    } else if p == 1.0 {
        t
    } else if p.fract() == 0.0 && p.abs() < 64.0 {
        t.powi(p as i32)
    } else {
        t.powf(p)
    }
}
