//! Quasi-norm families and their fundamental functions.
//!
//! Every built-in family is symmetric (invariant under coordinate
//! permutations and sign flips), monotone in each orthant, and normalized so
//! that the canonical basis vectors have norm one. The covering construction
//! and the shift solver rely on all three properties.

mod exponent;
mod orlicz;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

pub use exponent::Exponent;
pub use orlicz::OrliczSpec;
use orlicz::OrliczFn;

use crate::error::{Error, Result};
use crate::point::Point;

/// Smallest exponent accepted for `l_p` and Lorentz norms.
pub const MIN_EXPONENT: f64 = 0.1;

const ORLICZ_REL_WIDTH: f64 = 1e-12;
const ORLICZ_MAX_ITER: usize = 200;
const GOLDEN_WIDTH: f64 = 1e-10;

/// Weight sequence of a Lorentz norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSpec {
    /// `w(t) = t^exponent`, `exponent <= 0`.
    Power(f64),
    /// Explicit `w(1), w(2), ...`.
    Table(Vec<f64>),
}

impl WeightSpec {
    fn values(&self, dim: usize) -> Result<Vec<f64>> {
        match self {
            WeightSpec::Power(e) => {
                if !(e.is_finite() && *e <= 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "power weight exponent must be finite and <= 0, got {e}"
                    )));
                }
                Ok((1..=dim).map(|i| (i as f64).powf(*e)).collect())
            }
            WeightSpec::Table(w) => {
                if w.len() < dim {
                    return Err(Error::InvalidSpec(format!(
                        "weight table has {} entries, dimension is {dim}",
                        w.len()
                    )));
                }
                if w[0] != 1.0 {
                    return Err(Error::InvalidSpec(format!("w(1) must be 1, got {}", w[0])));
                }
                if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::InvalidSpec("weights must be positive and finite".into()));
                }
                if w.windows(2).any(|p| p[1] > p[0]) {
                    return Err(Error::InvalidSpec("weights must be non-increasing".into()));
                }
                Ok(w[..dim].to_vec())
            }
        }
    }
}

/// The quasi-norm families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Lp {
        p: Exponent,
    },
    /// `(sum_i (w(i) x*_i)^q)^{1/q}` over the non-increasing rearrangement.
    Lorentz {
        q: Exponent,
        weight: WeightSpec,
    },
    /// Luxemburg norm `inf { rho > 0 : sum_i M(|x_i|/rho) <= 1 }`.
    Orlicz {
        #[serde(rename = "M")]
        m: OrliczSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RawNormSpec {
    #[serde(flatten)]
    family: Family,
    dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum LpKind {
    One,
    Two,
    Half,
    Inf,
    General(f64),
}

#[derive(Clone, Debug, PartialEq)]
enum Kernel {
    Lp(LpKind),
    Lorentz { q: f64, w: Vec<f64>, wq: Vec<f64> },
    Orlicz(OrliczFn),
}

/// A validated quasi-norm on `R^dim`.
///
/// JSON form: `{"family":"lp","p":0.5,"dim":4}`,
/// `{"family":"lorentz","q":1,"weight":{"power":-0.5},"dim":4}`, or
/// `{"family":"orlicz","M":{"kind":"power_log","p":2,"alpha":1},"dim":4}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNormSpec", into = "RawNormSpec")]
pub struct NormSpec {
    raw: RawNormSpec,
    kernel: Kernel,
}

impl TryFrom<RawNormSpec> for NormSpec {
    type Error = Error;

    fn try_from(raw: RawNormSpec) -> Result<Self> {
        NormSpec::new(raw.family, raw.dim)
    }
}

impl From<NormSpec> for RawNormSpec {
    fn from(spec: NormSpec) -> Self {
        spec.raw
    }
}

fn check_exponent(name: &str, e: Exponent) -> Result<f64> {
    let v = e.value();
    if e.is_infinite() {
        return Ok(v);
    }
    if !v.is_finite() || v < MIN_EXPONENT {
        return Err(Error::InvalidSpec(format!(
            "{name} must be >= {MIN_EXPONENT} or inf, got {v}"
        )));
    }
    Ok(v)
}

impl NormSpec {
    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        let kernel = match &family {
            Family::Lp { p } => {
                let v = check_exponent("p", *p)?;
                Kernel::Lp(if p.is_infinite() {
                    LpKind::Inf
                } else if v == 1.0 {
                    LpKind::One
                } else if v == 2.0 {
                    LpKind::Two
                } else if v == 0.5 {
                    LpKind::Half
                } else {
                    LpKind::General(v)
                })
            }
            Family::Lorentz { q, weight } => {
                let qv = check_exponent("q", *q)?;
                let w = weight.values(dim)?;
                let wq = if q.is_infinite() {
                    w.clone()
                } else {
                    w.iter().map(|x| x.powf(qv)).collect()
                };
                Kernel::Lorentz { q: qv, w, wq }
            }
            Family::Orlicz { m } => Kernel::Orlicz(OrliczFn::new(m)?),
        };
        Ok(NormSpec { raw: RawNormSpec { family, dim }, kernel })
    }

    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Lp { p: Exponent::new(p) }, dim)
    }

    pub fn linf(dim: usize) -> Self {
        Self::new(Family::Lp { p: Exponent::INFINITY }, dim).expect("l_inf is always valid")
    }

    pub fn lorentz(q: f64, weight: WeightSpec, dim: usize) -> Result<Self> {
        Self::new(Family::Lorentz { q: Exponent::new(q), weight }, dim)
    }

    pub fn orlicz(m: OrliczSpec, dim: usize) -> Result<Self> {
        Self::new(Family::Orlicz { m }, dim)
    }

    pub fn family(&self) -> &Family {
        &self.raw.family
    }

    pub fn dim(&self) -> usize {
        self.raw.dim
    }

    /// The same family in another dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.raw.family.clone(), dim)
    }

    /// The `p` of an `l_p` spec.
    pub fn lp_exponent(&self) -> Option<Exponent> {
        match self.raw.family {
            Family::Lp { p } => Some(p),
            _ => None,
        }
    }

    /// Whether the triangle inequality holds (not merely a quasi-triangle one).
    pub fn is_norm(&self) -> bool {
        match &self.kernel {
            Kernel::Lp(LpKind::Half) => false,
            Kernel::Lp(LpKind::General(p)) => *p >= 1.0,
            Kernel::Lp(_) => true,
            Kernel::Lorentz { q, .. } => *q >= 1.0,
            Kernel::Orlicz(_) => true,
        }
    }

    /// All built-in families are monotone in each orthant.
    pub fn is_monotone(&self) -> bool {
        true
    }

    /// All built-in families are invariant under permutations and sign flips.
    pub fn is_symmetric(&self) -> bool {
        true
    }

    /// Short human-readable label, e.g. `lp(p=0.5)`.
    pub fn label(&self) -> String {
        match &self.raw.family {
            Family::Lp { p } => format!("lp(p={p})"),
            Family::Lorentz { q, weight } => match weight {
                WeightSpec::Power(e) => format!("lorentz(q={q},w=t^{e})"),
                WeightSpec::Table(_) => format!("lorentz(q={q},w=table)"),
            },
            Family::Orlicz { m } => match m {
                OrliczSpec::Power { p } => format!("orlicz(t^{p})"),
                OrliczSpec::ExpInvSquare => "orlicz(exp(-1/t^2))".to_string(),
                OrliczSpec::PowerLog { p, alpha } => format!("orlicz(t^{p}*ln(1/t)^{alpha})"),
            },
        }
    }

    /// Argument scale applied to an Orlicz function so that `M(1) = 1`.
    pub fn orlicz_scale(&self) -> Option<f64> {
        match &self.kernel {
            Kernel::Orlicz(f) => Some(f.scale()),
            _ => None,
        }
    }

    /// Value of the normalized Orlicz function at `t`.
    pub fn orlicz_function(&self, t: f64) -> Option<f64> {
        match &self.kernel {
            Kernel::Orlicz(f) => Some(f.eval(t)),
            _ => None,
        }
    }

    /// A monotone stand-in for the norm with `level(x) <= 1` exactly when
    /// `||x|| <= 1`, equality included. Cheaper than [`NormSpec::eval`]:
    /// for Orlicz norms it avoids the bisection on `rho`.
    #[inline]
    pub fn level(&self, x: &[f64]) -> f64 {
        match &self.kernel {
            Kernel::Lp(kind) => match *kind {
                LpKind::One => x.iter().map(|v| v.abs()).sum(),
                LpKind::Two => x.iter().map(|v| v * v).sum(),
                LpKind::Half => x.iter().map(|v| v.abs().sqrt()).sum(),
                LpKind::Inf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
                LpKind::General(p) => x.iter().map(|v| v.abs().powf(p)).sum(),
            },
            Kernel::Lorentz { q, w, wq } => {
                let mut s: SmallVec<[f64; 16]> = x.iter().map(|v| v.abs()).collect();
                s.sort_unstable_by(|a, b| b.total_cmp(a));
                if q.is_infinite() {
                    s.iter().zip(w).fold(0.0, |m, (v, wi)| m.max(v * wi))
                } else if *q == 1.0 {
                    s.iter().zip(w).map(|(v, wi)| v * wi).sum()
                } else {
                    s.iter().zip(wq).map(|(v, wi)| wi * v.powf(*q)).sum()
                }
            }
            Kernel::Orlicz(f) => x.iter().map(|v| f.eval(v.abs())).sum(),
        }
    }

    /// Evaluates the quasi-norm of a slice of length `dim`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match &self.kernel {
            Kernel::Lp(kind) => {
                let l = self.level(x);
                match *kind {
                    LpKind::One | LpKind::Inf => l,
                    LpKind::Two => l.sqrt(),
                    LpKind::Half => l * l,
                    LpKind::General(p) => l.powf(1.0 / p),
                }
            }
            Kernel::Lorentz { q, .. } => {
                let l = self.level(x);
                if q.is_infinite() || *q == 1.0 {
                    l
                } else {
                    l.powf(1.0 / q)
                }
            }
            Kernel::Orlicz(f) => orlicz_norm(f, x),
        }
    }

    fn check_dim(&self, actual: usize) -> Result<()> {
        if actual != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual });
        }
        Ok(())
    }
}

/// Luxemburg norm by bisection on `rho`.
///
/// With `M` convex, `M(0) = 0` and `M(1) = 1`, the root lies in
/// `[max|x_i|, d max|x_i|]`; the bracket is still checked and widened.
fn orlicz_norm(f: &OrliczFn, x: &[f64]) -> f64 {
    let m = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let load = |rho: f64| x.iter().map(|v| f.eval(v.abs() / rho)).sum::<f64>();
    let (mut lo, mut hi) = (m, m * x.len() as f64);
    while load(lo) <= 1.0 && lo > f64::MIN_POSITIVE {
        lo *= 0.5;
    }
    while load(hi) > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..ORLICZ_MAX_ITER {
        if hi - lo <= ORLICZ_REL_WIDTH * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if load(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `||x||` for the given spec.
pub fn eval_norm(spec: &NormSpec, x: &Point) -> Result<f64> {
    spec.check_dim(x.dim())?;
    Ok(spec.eval(x.coords()))
}

/// Absolute values sorted non-increasingly.
pub fn rearrange_decreasing(x: &Point) -> Point {
    let mut v: Vec<f64> = x.coords().iter().map(|c| c.abs()).collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    Point::from_slice_unchecked(&v)
}

fn indicator(dim: usize, k: usize) -> Vec<f64> {
    (0..dim).map(|i| if i < k { 1.0 } else { 0.0 }).collect()
}

/// `lambda(k) = ||e_1 + ... + e_k||`.
///
/// For Orlicz norms with a closed-form inverse, the value is cross-checked
/// against `1/M^{-1}(1/k)` and an error is returned on disagreement.
pub fn fundamental_function(spec: &NormSpec, k: usize) -> Result<f64> {
    if k == 0 || k > spec.dim() {
        return Err(Error::Precondition(format!(
            "k must lie in 1..={}, got {k}",
            spec.dim()
        )));
    }
    let direct = spec.eval(&indicator(spec.dim(), k));
    if let Kernel::Orlicz(_) = spec.kernel {
        if let Some(formula) = fundamental_function_closed_form(spec, k) {
            if (direct - formula).abs() > 1e-8 * formula {
                return Err(Error::Inconsistent(format!(
                    "lambda({k}) by bisection is {direct}, by the inverse formula {formula}"
                )));
            }
        }
    }
    Ok(direct)
}

/// Closed-form fundamental function where the family provides one:
/// `k^{1/p}` for `l_p`, `(sum_{i<=k} w(i)^q)^{1/q}` for Lorentz and
/// `1/M^{-1}(1/k)` for Orlicz functions with an explicit inverse.
pub fn fundamental_function_closed_form(spec: &NormSpec, k: usize) -> Option<f64> {
    if k == 0 || k > spec.dim() {
        return None;
    }
    let kf = k as f64;
    match &spec.kernel {
        Kernel::Lp(LpKind::Inf) => Some(1.0),
        Kernel::Lp(_) => {
            let p = spec.lp_exponent()?.value();
            Some(kf.powf(1.0 / p))
        }
        Kernel::Lorentz { q, w, wq } => {
            if q.is_infinite() {
                Some(w[..k].iter().cloned().fold(0.0, f64::max))
            } else {
                Some(wq[..k].iter().sum::<f64>().powf(1.0 / q))
            }
        }
        Kernel::Orlicz(f) => f.inverse(1.0 / kf).map(|t| 1.0 / t),
    }
}

/// `1/M^{-1}(1/k)` with the inverse computed numerically; `None` for
/// non-Orlicz specs.
pub fn fundamental_function_via_inverse(spec: &NormSpec, k: usize) -> Option<f64> {
    match &spec.kernel {
        Kernel::Orlicz(f) if k >= 1 => Some(1.0 / f.inverse_numeric(1.0 / k as f64)),
        _ => None,
    }
}

/// Quasi-norm of `y` in the projected space `X^i`, whose unit ball is the
/// orthogonal projection of `B_X` onto the hyperplane `x_i = 0`. Computed as
/// `min_t ||y + t e_i||` by golden-section search.
pub fn shadow_norm(spec: &NormSpec, i: usize, y: &Point) -> Result<f64> {
    spec.check_dim(y.dim())?;
    if i >= spec.dim() {
        return Err(Error::Precondition(format!("coordinate index {i} out of range")));
    }
    if y.coords()[i] != 0.0 {
        return Err(Error::Precondition(format!(
            "coordinate {i} of y must be zero, got {}",
            y.coords()[i]
        )));
    }
    let base = spec.eval(y.coords());
    if base == 0.0 {
        return Ok(0.0);
    }
    let mut buf = y.coords().to_vec();
    let mut f = |t: f64| {
        buf[i] = t;
        spec.eval(&buf)
    };
    let (lo, hi) = if spec.is_symmetric() { (0.0, 2.0 * base) } else { (-2.0 * base, 2.0 * base) };
    let (t, ft, width) = golden_section(&mut f, lo, hi, GOLDEN_WIDTH, 300);
    if width > GOLDEN_WIDTH {
        return Err(Error::NoConvergence { what: "shadow norm minimization", width });
    }
    Ok(ft.min(f(lo)).min(f(hi)).min(f(t)).min(base))
}

/// Returns `(argmin, min, final bracket width)`.
fn golden_section(
    f: &mut impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    width: f64,
    max_iter: usize,
) -> (f64, f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..max_iter {
        if b - a <= width {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc, b - a)
    } else {
        (d, fd, b - a)
    }
}

/// Outcome of [`check_monotone`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest observed `||x|| - ||y||` over dominated pairs `|x| <= |y|`.
    pub worst_gap: f64,
}

/// Sampled test of `|x| <= |y|` (same orthant) implying `||x|| <= ||y||`.
pub fn check_monotone(spec: &NormSpec, trials: usize, rng_seed: u64) -> Result<MonotoneReport> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let d = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut violations = 0;
    let mut worst_gap = f64::NEG_INFINITY;
    for _ in 0..trials {
        let scale = rng.gen_range(0.01..2.0);
        for j in 0..d {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            y[j] = sign * scale * rng.gen::<f64>();
            x[j] = y[j] * rng.gen::<f64>();
        }
        // Sometimes shrink a single coordinate only, where the gap is smallest.
        if rng.gen_bool(0.5) {
            let j = rng.gen_range(0..d);
            x.copy_from_slice(&y);
            x[j] *= rng.gen::<f64>();
        }
        let (nx, ny) = (spec.eval(&x), spec.eval(&y));
        let gap = nx - ny;
        worst_gap = worst_gap.max(gap);
        if gap > 1e-10 * ny.max(f64::MIN_POSITIVE) {
            violations += 1;
        }
    }
    Ok(MonotoneReport { trials, violations, worst_gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn lp_half_of_ones() {
        let s = NormSpec::lp(0.5, 2).unwrap();
        assert!(close(eval_norm(&s, &pt(&[1.0, 1.0])).unwrap(), 4.0, 1e-15));
    }

    #[test]
    fn orlicz_square_is_euclidean() {
        let s = NormSpec::orlicz(OrliczSpec::Power { p: 2.0 }, 2).unwrap();
        assert!(close(eval_norm(&s, &pt(&[3.0, 4.0])).unwrap(), 5.0, 1e-11));
    }

    #[test]
    fn lorentz_power_weight_on_ones() {
        // Independent: sum_{i=1}^4 i^{-1/2}.
        let expected: f64 = 1.0 + 2f64.powf(-0.5) + 3f64.powf(-0.5) + 0.5;
        let s = NormSpec::lorentz(1.0, WeightSpec::Power(-0.5), 4).unwrap();
        let v = eval_norm(&s, &pt(&[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert!(close(v, expected, 1e-14));
        assert!(close(v, 2.784457050376173, 1e-12));
    }

    #[test]
    fn lp_inf_and_general() {
        let s = NormSpec::linf(3);
        assert_eq!(s.eval(&[0.2, -0.7, 0.1]), 0.7);
        let s = NormSpec::lp(3.0, 2).unwrap();
        assert!(close(s.eval(&[1.0, 2.0]), 9f64.cbrt(), 1e-14));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = NormSpec::lp(1.0, 3).unwrap();
        assert_eq!(
            eval_norm(&s, &pt(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        );
    }

    #[test]
    fn spec_validation() {
        assert!(NormSpec::lp(0.05, 2).is_err());
        assert!(NormSpec::lp(0.0, 2).is_err());
        assert!(NormSpec::lp(-1.0, 2).is_err());
        assert!(NormSpec::lp(1.0, 0).is_err());
        assert!(NormSpec::lorentz(1.0, WeightSpec::Power(0.5), 3).is_err());
        assert!(NormSpec::lorentz(1.0, WeightSpec::Table(vec![1.0, 0.5]), 3).is_err());
        assert!(NormSpec::lorentz(1.0, WeightSpec::Table(vec![1.0, 0.5, 0.7]), 3).is_err());
        assert!(NormSpec::lorentz(1.0, WeightSpec::Table(vec![0.9, 0.5, 0.1]), 3).is_err());
        assert!(NormSpec::lorentz(1.0, WeightSpec::Table(vec![1.0, 0.5, 0.5]), 3).is_ok());
        assert!(NormSpec::orlicz(OrliczSpec::Power { p: 0.5 }, 3).is_err());
        assert!(NormSpec::orlicz(OrliczSpec::PowerLog { p: 1.0, alpha: 1.0 }, 3).is_err());
    }

    #[test]
    fn rearrangement() {
        assert_eq!(rearrange_decreasing(&pt(&[-3.0, 1.0, 2.0])).coords(), &[3.0, 2.0, 1.0]);
        assert_eq!(rearrange_decreasing(&pt(&[0.0, 0.0])).coords(), &[0.0, 0.0]);
        assert_eq!(rearrange_decreasing(&pt(&[1.0, -1.0, 1.0])).coords(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn fundamental_function_examples() {
        assert!(close(fundamental_function(&NormSpec::lp(2.0, 4).unwrap(), 4).unwrap(), 2.0, 1e-15));
        for k in 1..=5 {
            assert_eq!(fundamental_function(&NormSpec::linf(5), k).unwrap(), 1.0);
        }
        assert!(fundamental_function(&NormSpec::linf(5), 0).is_err());
        assert!(fundamental_function(&NormSpec::linf(5), 6).is_err());
    }

    #[test]
    fn exp_inv_square_lambda_two() {
        // Independent hand solution. With the continuation past t = 1/2,
        // M(t) = e^{-4} (1 + 16 (t - 1/2)) for t >= 1/2, so M(tau) = 1 gives
        // tau = 1/2 + (e^4 - 1)/16 and M(t) = 1/2 gives
        // t = 1/2 + (e^4/2 - 1)/16. Then lambda(2) = tau / t.
        let e4 = 4f64.exp();
        let tau = 0.5 + (e4 - 1.0) / 16.0;
        let t_half = 0.5 + (e4 / 2.0 - 1.0) / 16.0;
        let expected = tau / t_half;
        let s = NormSpec::orlicz(OrliczSpec::ExpInvSquare, 2).unwrap();
        let v = fundamental_function(&s, 2).unwrap();
        assert!(close(v, expected, 1e-10), "{v} vs {expected}");
        assert!(close(v, 1.7959128636379307, 1e-10));
        let formula = fundamental_function_closed_form(&s, 2).unwrap();
        assert!(close(v, formula, 1e-8));
    }

    #[test]
    fn shadow_norm_examples() {
        let s = NormSpec::lp(1.0, 3).unwrap();
        assert!(close(shadow_norm(&s, 0, &pt(&[0.0, 0.5, 0.5])).unwrap(), 1.0, 1e-12));
        let s = NormSpec::linf(2);
        assert!(close(shadow_norm(&s, 1, &pt(&[0.3, 0.0])).unwrap(), 0.3, 1e-12));
        assert!(shadow_norm(&s, 1, &pt(&[0.3, 0.1])).is_err());
    }

    #[test]
    fn shadow_norm_lorentz_by_grid_scan() {
        // Independent oracle: scan t on a fine grid and take the minimum.
        let s = NormSpec::lorentz(1.0, WeightSpec::Power(-0.5), 3).unwrap();
        let y = pt(&[0.0, 1.0, 1.0]);
        let mut best = f64::INFINITY;
        let mut best_t = f64::NAN;
        for step in -4000..=4000 {
            let t = step as f64 * 1e-3;
            let v = s.eval(&[t, 1.0, 1.0]);
            if v < best {
                best = v;
                best_t = t;
            }
        }
        assert_eq!(best_t, 0.0);
        assert!(close(best, 1.0 + 0.5f64.sqrt(), 1e-14));
        let v = shadow_norm(&s, 0, &y).unwrap();
        assert!(close(v, 1.7071067811865475, 1e-12));
    }

    #[test]
    fn monotone_examples() {
        let r = check_monotone(&NormSpec::lp(0.5, 4).unwrap(), 1000, 7).unwrap();
        assert_eq!(r.violations, 0);
        let r = check_monotone(&NormSpec::lorentz(1.0, WeightSpec::Power(-0.5), 4).unwrap(), 1000, 3)
            .unwrap();
        assert_eq!(r.violations, 0);
        let s = NormSpec::orlicz(OrliczSpec::PowerLog { p: 2.0, alpha: 1.0 }, 4).unwrap();
        let r = check_monotone(&s, 1000, 11).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.worst_gap <= 1e-10, "worst gap {}", r.worst_gap);
        assert!(check_monotone(&s, 0, 1).is_err());
    }

    #[test]
    fn json_forms() {
        let s: NormSpec = serde_json::from_str(r#"{"family":"lp","p":0.5,"dim":4}"#).unwrap();
        assert_eq!(s, NormSpec::lp(0.5, 4).unwrap());
        let s: NormSpec = serde_json::from_str(r#"{"family":"lp","p":"inf","dim":2}"#).unwrap();
        assert_eq!(s, NormSpec::linf(2));
        let s: NormSpec =
            serde_json::from_str(r#"{"family":"lorentz","q":1,"weight":{"power":-0.5},"dim":4}"#)
                .unwrap();
        assert_eq!(s, NormSpec::lorentz(1.0, WeightSpec::Power(-0.5), 4).unwrap());
        let s: NormSpec = serde_json::from_str(
            r#"{"family":"orlicz","M":{"kind":"power_log","p":2,"alpha":1},"dim":4}"#,
        )
        .unwrap();
        assert_eq!(s, NormSpec::orlicz(OrliczSpec::PowerLog { p: 2.0, alpha: 1.0 }, 4).unwrap());
        let out = serde_json::to_string(&NormSpec::linf(3)).unwrap();
        assert_eq!(out, r#"{"family":"lp","p":"inf","dim":3}"#);
        assert!(serde_json::from_str::<NormSpec>(r#"{"family":"lp","p":0.01,"dim":4}"#).is_err());
    }
}
