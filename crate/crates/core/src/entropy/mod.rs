//! Certified entropy-number bounds.
//!
//! `e_k(K, Y)` is the least `eps` such that `2^{k-1}` balls of radius `eps`
//! in `Y` cover `K`. Upper bounds come from grid coverings that are checked
//! by sampling, lower bounds from separated sets found by the packing
//! oracle. Reference norms are `l_q^d`; finite `q` is reached from `l_∞`
//! through `||x||_q <= d^{1/q} ||x||_∞`.

mod rates;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use rates::{
    fit_decay_rate, symmetric_corollary_bounds, theoretical_rate, CorollaryBounds, Envelope, RateFit,
    RegimeConstants, COROLLARY_CONSTANT_LABEL,
};

use crate::covering::{
    ball_cell_count, face_cell_count, packing_set, verify_covering, Covering, Provenance, Target, MAX_CENTERS,
};
use crate::covering::{ball_with_cells, lift_with_cells};
use crate::error::{Error, Result};
use crate::norms::{Exponent, NormSpec};
use crate::point::Point;

/// Largest number of grid cells per axis the upper-bound search tries.
pub const MAX_CELLS_PER_AXIS: usize = 1 << 40;

/// Packings with at most this many points get their exact minimum
/// separation computed.
const EXACT_SEPARATION_LIMIT: usize = 4096;
const LOWER_BISECTIONS: usize = 30;
const PACKING_REL_TOL: f64 = 1e-9;

/// The unit sphere or the unit ball of a norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Body {
    Sphere,
    Ball,
}

impl Body {
    pub fn target(self, spec: &NormSpec) -> Target {
        match self {
            Body::Sphere => Target::Sphere(spec.clone()),
            Body::Ball => Target::Ball(spec.clone()),
        }
    }

    pub fn envelope(self) -> Envelope {
        match self {
            Body::Sphere => Envelope::Sphere,
            Body::Ball => Envelope::Ball,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyOptions {
    /// Samples used to verify each constructed covering.
    pub samples: usize,
    pub seed: u64,
    /// Largest covering the upper-bound search may build.
    pub max_centers: usize,
    /// Skip the packing search for lower bounds.
    pub skip_lower: bool,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        EntropyOptions { samples: 100_000, seed: 0, max_centers: MAX_CENTERS, skip_lower: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperFlag {
    /// Even one cell per axis needs too many centers; the bound comes from
    /// the single ball of radius 1 around the origin.
    Trivial,
    /// `2^{k-1}` exceeds the construction limit, so a smaller covering
    /// was certified.
    Capped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    /// Certified bound on `e_k` in `l_q`.
    pub value: f64,
    /// Radius of the verified covering in `l_∞`.
    pub linf_radius: f64,
    pub centers: usize,
    /// Grid cells per axis; 0 for the trivial covering.
    pub cells_per_axis: usize,
    pub flag: Option<UpperFlag>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerRoute {
    /// Packing of the ball of one dimension less.
    Projection,
    /// Packing of the target itself.
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    /// Certified bound on `e_k` in `l_q`, or 0 without a certificate.
    pub value: f64,
    pub route: Option<LowerRoute>,
    /// Points in the certifying packing.
    pub points: usize,
}

impl LowerBound {
    pub fn certified(&self) -> bool {
        self.route.is_some()
    }
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    Ok(())
}

fn check_q(q: Exponent) -> Result<()> {
    if !(q.value() > 0.0) {
        return Err(Error::InvalidSpec(format!("reference exponent must be positive, got {q}")));
    }
    Ok(())
}

/// `2^{k-1}`, saturating.
pub fn ball_budget(k: u32) -> usize {
    if k - 1 >= usize::BITS - 1 {
        usize::MAX
    } else {
        1usize << (k - 1)
    }
}

/// `d^{1/q}`, the norm of the identity from `l_∞^d` to `l_q^d`.
pub fn factorization_factor(d: usize, q: Exponent) -> f64 {
    (d as f64).powf(q.reciprocal())
}

/// Centers of the grid covering with `n` cells per axis, or `None` above
/// `cap`.
fn grid_count(spec: &NormSpec, body: Body, n: usize, cap: usize) -> Option<usize> {
    let d = spec.dim();
    match body {
        Body::Sphere => {
            let charts = (1usize << d).checked_mul(d)?;
            let per = face_cell_count(spec, n, cap / charts)?;
            per.checked_mul(charts).filter(|c| *c <= cap)
        }
        Body::Ball => ball_cell_count(spec, n, cap).filter(|c| *c <= cap),
    }
}

/// Upper bound on `e_k(body, l_q^d)` from the finest grid covering with at
/// most `2^{k-1}` centers.
///
/// Sphere coverings are face grids with pitch `1/n` lifted to the sphere
/// (radius `1/n`), ball coverings are cell midpoints (radius `1/(2n)`).
/// Center counts grow with `n`, so the largest admissible `n` is found by
/// doubling and bisection. The covering is verified by sampling before its
/// radius is reported.
pub fn entropy_upper(spec: &NormSpec, body: Body, q: Exponent, k: u32, opts: &EntropyOptions) -> Result<UpperBound> {
    check_k(k)?;
    check_q(q)?;
    if !spec.is_monotone() {
        return Err(Error::Precondition("grid coverings need a monotone quasi-norm".into()));
    }
    let d = spec.dim();
    let budget = ball_budget(k);
    let limit = budget.min(opts.max_centers);
    let capped = budget > opts.max_centers;
    let factor = factorization_factor(d, q);

    let Some(_) = grid_count(spec, body, 1, limit) else {
        let cover = Covering::new(1.0, NormSpec::linf(d), vec![Point::zeros(d)], Provenance::External)?;
        certify(&cover, spec, body, opts)?;
        return Ok(UpperBound {
            value: factor,
            linf_radius: 1.0,
            centers: 1,
            cells_per_axis: 0,
            flag: Some(UpperFlag::Trivial),
        });
    };
    let fits = |n: usize| grid_count(spec, body, n, limit).is_some();
    let mut lo = 1usize;
    let mut hi = None;
    while lo < MAX_CELLS_PER_AXIS {
        if fits(2 * lo) {
            lo *= 2;
        } else {
            hi = Some(2 * lo);
            break;
        }
    }
    let mut flag = capped.then_some(UpperFlag::Capped);
    match hi {
        Some(mut hi) => {
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if fits(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        None => flag = Some(UpperFlag::Capped),
    }
    let n = lo;
    let h = 1.0 / n as f64;
    let cover = match body {
        Body::Sphere => lift_with_cells(spec, n, h)?,
        Body::Ball => ball_with_cells(spec, n, h)?,
    };
    if cover.len() > budget {
        return Err(Error::Inconsistent(format!(
            "covering has {} centers, the count predicted at most {budget}",
            cover.len()
        )));
    }
    certify(&cover, spec, body, opts)?;
    let r = cover.radius();
    Ok(UpperBound { value: r * factor, linf_radius: r, centers: cover.len(), cells_per_axis: n, flag })
}

fn certify(cover: &Covering, spec: &NormSpec, body: Body, opts: &EntropyOptions) -> Result<()> {
    let report = verify_covering(cover, &body.target(spec), opts.samples, opts.seed)?;
    if !report.passed {
        return Err(Error::Certification(format!(
            "{} covering of radius {} left a gap of {:?} at {:?}",
            spec.label(),
            report.radius,
            report.max_gap,
            report.worst_point.map(Point::into_vec),
        )));
    }
    Ok(())
}

fn packing_resolution(dim: usize) -> Option<usize> {
    match dim {
        1 | 2 => Some(256),
        3 => Some(48),
        _ => None,
    }
}

fn min_separation(points: &[Point], metric: &NormSpec) -> f64 {
    let d = metric.dim();
    let mut diff = vec![0.0; d];
    let mut best = f64::INFINITY;
    for (a, x) in points.iter().enumerate() {
        for y in &points[a + 1..] {
            for j in 0..d {
                diff[j] = x.coords()[j] - y.coords()[j];
            }
            best = best.min(metric.eval(&diff));
        }
    }
    best
}

/// Largest `eps` certified by a packing of `target` with more than `budget`
/// points, together with the packing size.
///
/// A set whose points are pairwise more than `2 eps` apart cannot be
/// covered by fewer balls of radius `eps` than it has points.
fn packing_lower(target: &Target, metric: &NormSpec, budget: usize) -> Result<Option<(f64, usize)>> {
    let Some(res) = packing_resolution(target.dim()) else {
        return Ok(None);
    };
    let certify = |eps: f64| -> Result<Option<(f64, usize)>> {
        let pts = packing_set(target, metric, eps, res)?;
        if pts.len() <= budget {
            return Ok(None);
        }
        let mut value = eps * (1.0 + PACKING_REL_TOL);
        if pts.len() <= EXACT_SEPARATION_LIMIT {
            value = value.max(min_separation(&pts, metric) / 2.0);
        }
        Ok(Some((value, pts.len())))
    };
    let mut lo = 1e-6;
    let Some(mut best) = certify(lo)? else {
        return Ok(None);
    };
    // Every pair is within 2 d^{1/q} of each other.
    let r = metric.lp_exponent().map(|p| p.reciprocal()).unwrap_or(1.0);
    let mut hi = 2.0 * (metric.dim() as f64).powf(r);
    for _ in 0..LOWER_BISECTIONS {
        let mid = (lo * hi).sqrt();
        match certify(mid)? {
            Some(found) => {
                lo = mid;
                if found.0 > best.0 {
                    best = found;
                }
            }
            None => hi = mid,
        }
    }
    Ok(Some(best))
}

fn reference(q: Exponent, dim: usize) -> Result<NormSpec> {
    if q.is_infinite() {
        Ok(NormSpec::linf(dim))
    } else {
        NormSpec::lp(q.value(), dim)
    }
}

/// Lower bound on `e_k(body, l_q^d)` from packings.
///
/// Two routes are tried and the larger certificate wins: the ball of the
/// same family in dimension `d - 1`, whose entropy numbers bound those of
/// both the sphere and the ball from below, and the target itself. Each
/// needs the packed body to have dimension at most 3, and `q >= 1` so that
/// separation implies distinct covering balls. Without a certificate the
/// value is 0.
pub fn entropy_lower(spec: &NormSpec, body: Body, q: Exponent, k: u32) -> Result<LowerBound> {
    check_k(k)?;
    check_q(q)?;
    let none = LowerBound { value: 0.0, route: None, points: 0 };
    if q.value() < 1.0 {
        return Ok(none);
    }
    let d = spec.dim();
    let budget = ball_budget(k);
    let mut best = none;
    if d >= 2 {
        let sub = spec.with_dim(d - 1)?;
        if let Some((v, n)) = packing_lower(&Target::Ball(sub), &reference(q, d - 1)?, budget)? {
            best = LowerBound { value: v, route: Some(LowerRoute::Projection), points: n };
        }
    }
    if let Some((v, n)) = packing_lower(&body.target(spec), &reference(q, d)?, budget)? {
        if v > best.value {
            best = LowerBound { value: v, route: Some(LowerRoute::Direct), points: n };
        }
    }
    Ok(best)
}

/// Bounds and envelope for one `(norm, body, q, k)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub norm: NormSpec,
    pub body: Body,
    pub q: Exponent,
    pub k: u32,
    pub upper: UpperBound,
    pub lower: LowerBound,
    /// Theoretical rate with the given constants, for `l_p` norms with
    /// `p <= q`.
    pub envelope: Option<f64>,
}

impl EntropyEstimate {
    pub fn dim(&self) -> usize {
        self.norm.dim()
    }
}

/// Computes both bounds and the envelope; fails if the lower bound exceeds
/// the upper one.
pub fn entropy_estimate(
    spec: &NormSpec,
    body: Body,
    q: Exponent,
    k: u32,
    constants: &RegimeConstants,
    opts: &EntropyOptions,
) -> Result<EntropyEstimate> {
    let upper = entropy_upper(spec, body, q, k, opts)?;
    let lower = if opts.skip_lower {
        LowerBound { value: 0.0, route: None, points: 0 }
    } else {
        entropy_lower(spec, body, q, k)?
    };
    if lower.value > upper.value {
        return Err(Error::Inconsistent(format!(
            "{} {body:?} q={q} k={k}: lower bound {} exceeds upper bound {}",
            spec.label(),
            lower.value,
            upper.value
        )));
    }
    let d = spec.dim();
    let envelope = match spec.lp_exponent() {
        Some(p) if p.value() <= q.value() && d >= 2 => {
            Some(theoretical_rate(p, q, d, k as f64, constants, body.envelope())?)
        }
        _ => None,
    };
    Ok(EntropyEstimate { norm: spec.clone(), body, q, k, upper, lower, envelope })
}

/// Estimates for each `k`, computed in parallel and returned in the order
/// given.
pub fn entropy_series(
    spec: &NormSpec,
    body: Body,
    q: Exponent,
    ks: &[u32],
    constants: &RegimeConstants,
    opts: &EntropyOptions,
) -> Result<Vec<EntropyEstimate>> {
    ks.par_iter().map(|k| entropy_estimate(spec, body, q, *k, constants, opts)).collect()
}

/// Fit of `log2(upper)` against `k`.
pub fn fit_upper(series: &[EntropyEstimate]) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = series.iter().map(|e| (e.k as f64, e.upper.value)).collect();
    fit_decay_rate(&pts)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV with columns `d,p,q,k,lower,upper,envelope,slope_fit`. `p` is the
/// exponent of an `l_p` norm and the norm label otherwise; `lower` is empty
/// without a certificate, and `slope_fit` repeats the series fit on every
/// row.
pub fn estimates_to_csv(series: &[EntropyEstimate], fit: Option<&RateFit>) -> String {
    let mut s = String::from("d,p,q,k,lower,upper,envelope,slope_fit\n");
    let slope = fit.map(|f| f.slope.to_string()).unwrap_or_default();
    for e in series {
        let p = match e.norm.lp_exponent() {
            Some(p) => p.to_string(),
            None => csv_field(&e.norm.label()),
        };
        let lower = if e.lower.certified() { e.lower.value.to_string() } else { String::new() };
        let env = e.envelope.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{p},{},{},{lower},{},{env},{slope}", e.dim(), e.q, e.k, e.upper.value);
    }
    s
}
