//! Orthants, faces and cones, the diagonal shift onto the unit sphere, and
//! the Mazur map.
//!
//! Coordinate indices are 0-based throughout the API.

mod mazur;
mod suites;

use serde::{Deserialize, Serialize};

pub use mazur::{mazur_inverse, mazur_lipschitz_scan, mazur_map, MazurScan};
pub use suites::{run_suite, sample_face_point, SuiteKind, SuiteReport};

use crate::error::{Error, Result};
use crate::norms::{eval_norm, NormSpec};
use crate::point::Point;
use crate::solve::illinois;

/// Tolerance on `||x|| - 1` below which a face point counts as already on
/// the sphere.
pub const ON_SPHERE_TOL: f64 = 1e-12;
/// Largest accepted `| ||x + s e|| - 1 |` after solving.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Slack on the orthant and cone inequalities after shifting.
pub const RANGE_TOL: f64 = 1e-9;

const SHIFT_LEVEL_TOL: f64 = 1e-14;
// No width cap: for p < 1 the level function is steep near small shifts, so
// only the level residual is a meaningful stopping rule.
const SHIFT_WIDTH: f64 = 0.0;
const SHIFT_MAX_ITER: usize = 200;

/// A sign vector `e` together with a coordinate index `i`, naming the face
/// `B_X ∩ Q_e ∩ H_i` and the cone `C_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawChart", into = "RawChart")]
pub struct FaceChart {
    signs: Vec<i8>,
    index: usize,
}

#[derive(Serialize, Deserialize)]
struct RawChart {
    signs: Vec<i8>,
    index: usize,
}

impl TryFrom<RawChart> for FaceChart {
    type Error = Error;

    fn try_from(raw: RawChart) -> Result<Self> {
        FaceChart::new(raw.signs, raw.index)
    }
}

impl From<FaceChart> for RawChart {
    fn from(c: FaceChart) -> Self {
        RawChart { signs: c.signs, index: c.index }
    }
}

impl FaceChart {
    pub fn new(signs: Vec<i8>, index: usize) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidSpec("a chart needs at least one sign".into()));
        }
        if let Some(bad) = signs.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::InvalidSpec(format!("signs must be +1 or -1, got {bad}")));
        }
        if index >= signs.len() {
            return Err(Error::InvalidSpec(format!(
                "index {index} out of range for dimension {}",
                signs.len()
            )));
        }
        Ok(FaceChart { signs, index })
    }

    /// The all-positive chart with the given zero coordinate.
    pub fn positive(dim: usize, index: usize) -> Result<Self> {
        Self::new(vec![1; dim], index)
    }

    /// Chart number `ordinal` in [`FaceChart::all`] order: bit `j` of
    /// `ordinal / dim` set means `e_j = -1`, and `ordinal % dim` is `i`.
    pub fn from_ordinal(dim: usize, ordinal: usize) -> Self {
        let mask = ordinal / dim;
        let signs = (0..dim).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect();
        FaceChart { signs, index: ordinal % dim }
    }

    /// All `2^d d` charts, sign mask outer, index inner.
    pub fn all(dim: usize) -> Vec<FaceChart> {
        assert!(dim > 0 && dim < usize::BITS as usize, "unsupported dimension {dim}");
        (0..(dim << dim)).map(|o| Self::from_ordinal(dim, o)).collect()
    }

    pub fn ordinal(&self) -> usize {
        let mask = self
            .signs
            .iter()
            .enumerate()
            .fold(0usize, |m, (j, s)| if *s < 0 { m | 1 << j } else { m });
        mask * self.dim() + self.index
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    #[inline]
    pub fn sign(&self, j: usize) -> f64 {
        f64::from(self.signs[j])
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// The diagonal direction `e` as floats.
    pub fn direction(&self) -> Vec<f64> {
        self.signs.iter().map(|s| f64::from(*s)).collect()
    }

    /// Places `face` (the `d - 1` magnitudes off coordinate `i`) into `out`,
    /// signed by `e`, with `out[i] = 0`.
    pub fn embed(&self, face: &[f64], out: &mut [f64]) {
        debug_assert_eq!(face.len() + 1, out.len());
        let mut it = face.iter();
        for (j, o) in out.iter_mut().enumerate() {
            *o = if j == self.index { 0.0 } else { self.sign(j) * it.next().unwrap() };
        }
    }
}

impl std::fmt::Display for FaceChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("e=(")?;
        for (j, s) in self.signs.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        write!(f, "),i={}", self.index)
    }
}

/// Membership of a point in `Q_e`, `H_i` and `C_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub in_orthant: bool,
    pub in_face: bool,
    pub in_cone: bool,
}

/// Exact membership flags; entries are compared as stored.
pub fn classify_point(x: &Point, chart: &FaceChart) -> Result<Membership> {
    classify_with_tolerance(x.coords(), chart, 0.0)
}

/// Membership with slack `tol` on every inequality.
pub fn classify_with_tolerance(x: &[f64], chart: &FaceChart, tol: f64) -> Result<Membership> {
    if x.len() != chart.dim() {
        return Err(Error::DimensionMismatch { expected: chart.dim(), actual: x.len() });
    }
    let in_orthant = x.iter().enumerate().all(|(j, v)| {
        let t = chart.sign(j) * v;
        t >= -tol && t <= 1.0 + tol
    });
    let i = chart.index();
    let in_face = x[i].abs() <= tol;
    let xi = x[i].abs();
    let in_cone = x.iter().all(|v| xi <= v.abs() + tol);
    Ok(Membership { in_orthant, in_face, in_cone })
}

/// `x` with coordinate `i` set to zero.
pub fn project_hyperplane(x: &Point, i: usize) -> Result<Point> {
    if i >= x.dim() {
        return Err(Error::InvalidSpec(format!(
            "index {i} out of range for dimension {}",
            x.dim()
        )));
    }
    let mut v = x.coords().to_vec();
    v[i] = 0.0;
    Ok(Point::from_slice_unchecked(&v))
}

/// Shift amount, shifted point and final residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftResult {
    pub s: f64,
    pub y: Point,
    pub residual: f64,
}

/// Unchecked shift solver for one chart, reusing a scratch buffer.
///
/// Works on `level` rather than the norm itself: both cross one at the same
/// point, and `level` avoids the Orlicz bisection. Along the diagonal every
/// built-in family is strictly increasing, so the root is unique.
pub(crate) struct Shifter<'a> {
    spec: &'a NormSpec,
    dir: Vec<f64>,
    buf: Vec<f64>,
}

impl<'a> Shifter<'a> {
    pub(crate) fn new(spec: &'a NormSpec, chart: &FaceChart) -> Self {
        Shifter { spec, dir: chart.direction(), buf: vec![0.0; chart.dim()] }
    }

    fn g(&mut self, x: &[f64], s: f64) -> f64 {
        for ((b, xv), e) in self.buf.iter_mut().zip(x).zip(&self.dir) {
            *b = xv + s * e;
        }
        self.spec.level(&self.buf) - 1.0
    }

    /// Root of `level(x + s e) = 1` in `[0, 1]`, or `0` if `x` is already
    /// on or outside the sphere.
    pub(crate) fn solve(&mut self, x: &[f64]) -> Result<f64> {
        let g0 = self.g(x, 0.0);
        if g0 >= 0.0 {
            return Ok(0.0);
        }
        let g1 = self.g(x, 1.0);
        if g1 < 0.0 {
            return Err(Error::SpecDefect(format!(
                "{} is below one at x + e; the diagonal never reaches the sphere",
                self.spec.label()
            )));
        }
        if g1 == 0.0 {
            return Ok(1.0);
        }
        let mut buf = std::mem::take(&mut self.buf);
        let (spec, dir) = (self.spec, &self.dir);
        let r = illinois(
            |s| {
                for ((b, xv), e) in buf.iter_mut().zip(x).zip(dir) {
                    *b = xv + s * e;
                }
                spec.level(&buf) - 1.0
            },
            0.0,
            1.0,
            g0,
            g1,
            SHIFT_LEVEL_TOL,
            SHIFT_WIDTH,
            SHIFT_MAX_ITER,
        );
        self.buf = buf;
        r.map_err(|width| Error::NoConvergence { what: "shift solver", width })
    }

    /// `Δ(x)` written into `out`.
    pub(crate) fn shift_into(&mut self, x: &[f64], out: &mut [f64]) -> Result<f64> {
        let s = self.solve(x)?;
        for ((o, xv), e) in out.iter_mut().zip(x).zip(&self.dir) {
            *o = xv + s * e;
        }
        Ok(s)
    }
}

fn check_face_point(spec: &NormSpec, chart: &FaceChart, x: &Point) -> Result<f64> {
    if chart.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), actual: chart.dim() });
    }
    let m = classify_point(x, chart)?;
    if !m.in_orthant || !m.in_face {
        return Err(Error::Precondition(format!(
            "point is not in the face of chart {chart} (orthant: {}, face: {})",
            m.in_orthant, m.in_face
        )));
    }
    let n = eval_norm(spec, x)?;
    if n > 1.0 + ON_SPHERE_TOL {
        return Err(Error::Precondition(format!("point has norm {n} > 1")));
    }
    Ok(n)
}

/// Solves `||x + s e|| = 1` for a face point `x`.
pub fn shift_amount(spec: &NormSpec, chart: &FaceChart, x: &Point) -> Result<ShiftResult> {
    if !spec.is_monotone() {
        return Err(Error::Precondition("the shift needs a monotone quasi-norm".into()));
    }
    let n = check_face_point(spec, chart, x)?;
    let mut sh = Shifter::new(spec, chart);
    let s = if (n - 1.0).abs() <= ON_SPHERE_TOL { 0.0 } else { sh.solve(x.coords())? };
    let y: Vec<f64> = x.coords().iter().zip(&sh.dir).map(|(v, e)| v + s * e).collect();
    let residual = (spec.eval(&y) - 1.0).abs();
    if residual > RESIDUAL_TOL {
        return Err(Error::NoConvergence { what: "shift residual", width: residual });
    }
    Ok(ShiftResult { s, y: Point::from_slice_unchecked(&y), residual })
}

/// `Δ_e(x) = x + s(x) e`, checked to land in `Q_e ∩ C_i`.
pub fn shift_to_sphere(spec: &NormSpec, chart: &FaceChart, x: &Point) -> Result<Point> {
    let r = shift_amount(spec, chart, x)?;
    let m = classify_with_tolerance(r.y.coords(), chart, RANGE_TOL)?;
    if !m.in_orthant || !m.in_cone {
        return Err(Error::Inconsistent(format!(
            "shifted point {:?} left Q_e ∩ C_i of chart {chart}",
            r.y.coords()
        )));
    }
    Ok(r.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn chart_enumeration() {
        let all = FaceChart::all(3);
        assert_eq!(all.len(), 24);
        for (o, c) in all.iter().enumerate() {
            assert_eq!(c.ordinal(), o);
        }
        assert_eq!(all[0], FaceChart::positive(3, 0).unwrap());
        assert_eq!(all[4].signs(), &[-1, 1, 1]);
        assert!(FaceChart::new(vec![1, 0], 0).is_err());
        assert!(FaceChart::new(vec![1, 1], 2).is_err());
        let json = serde_json::to_string(&all[5]).unwrap();
        assert_eq!(json, r#"{"signs":[-1,1,1],"index":2}"#);
        assert!(serde_json::from_str::<FaceChart>(r#"{"signs":[2],"index":0}"#).is_err());
    }

    #[test]
    fn classify_examples() {
        let c = FaceChart::positive(2, 1).unwrap();
        let m = classify_point(&pt(&[0.5, 0.0]), &c).unwrap();
        assert_eq!(m, Membership { in_orthant: true, in_face: true, in_cone: true });
        let c0 = FaceChart::positive(2, 0).unwrap();
        let m = classify_point(&pt(&[0.5, 0.6]), &c0).unwrap();
        assert!(m.in_orthant && !m.in_face && m.in_cone);
        let m = classify_point(&pt(&[-0.5, 0.0]), &c).unwrap();
        assert!(!m.in_orthant);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_hyperplane(&pt(&[1.0, 2.0, 3.0]), 0).unwrap(), pt(&[0.0, 2.0, 3.0]));
        assert_eq!(project_hyperplane(&pt(&[1.0, 2.0]), 1).unwrap(), pt(&[1.0, 0.0]));
        let z = pt(&[0.0, 5.0]);
        assert_eq!(project_hyperplane(&z, 0).unwrap(), z);
        assert!(project_hyperplane(&z, 2).is_err());
    }

    #[test]
    fn shift_examples() {
        let l1 = NormSpec::lp(1.0, 3).unwrap();
        let c = FaceChart::positive(3, 2).unwrap();
        let r = shift_amount(&l1, &c, &Point::zeros(3)).unwrap();
        assert!((r.s - 1.0 / 3.0).abs() < 1e-12);
        let y = shift_to_sphere(&l1, &c, &Point::zeros(3)).unwrap();
        for v in y.coords() {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }

        let l2 = NormSpec::lp(2.0, 2).unwrap();
        let c = FaceChart::positive(2, 1).unwrap();
        assert_eq!(shift_amount(&l2, &c, &pt(&[1.0, 0.0])).unwrap().s, 0.0);
        // (0.5 + s)^2 + s^2 = 1  =>  s = (sqrt(7) - 1) / 4.
        let oracle = (7f64.sqrt() - 1.0) / 4.0;
        let r = shift_amount(&l2, &c, &pt(&[0.5, 0.0])).unwrap();
        assert!((r.s - oracle).abs() < 1e-9);
        assert!(r.residual <= RESIDUAL_TOL);
        assert!((r.y.coords()[0] - (0.5 + oracle)).abs() < 1e-9);

        let li = NormSpec::linf(2);
        let y = shift_to_sphere(&li, &c, &pt(&[0.2, 0.0])).unwrap();
        assert!((y.coords()[0] - 1.0).abs() < 1e-12 && (y.coords()[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn shift_respects_signs() {
        let l2 = NormSpec::lp(2.0, 2).unwrap();
        let c = FaceChart::new(vec![-1, 1], 1).unwrap();
        let r = shift_amount(&l2, &c, &pt(&[-0.5, 0.0])).unwrap();
        let oracle = (7f64.sqrt() - 1.0) / 4.0;
        assert!((r.y.coords()[0] + 0.5 + oracle).abs() < 1e-9);
        assert!((r.y.coords()[1] - oracle).abs() < 1e-9);
    }

    #[test]
    fn shift_preconditions() {
        let l2 = NormSpec::lp(2.0, 2).unwrap();
        let c = FaceChart::positive(2, 1).unwrap();
        assert!(matches!(
            shift_amount(&l2, &c, &pt(&[0.5, 0.1])),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            shift_amount(&l2, &c, &pt(&[-0.5, 0.0])),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            shift_amount(&l2, &c, &pt(&[1.5, 0.0])),
            Err(Error::Precondition(_))
        ));
        assert!(shift_amount(&l2, &c, &pt(&[0.5, 0.0, 0.0])).is_err());
    }

    #[test]
    fn quasi_norm_shift() {
        // l_{1/2}, d = 2, x = 0: 2 sqrt(s) = 1.
        let lh = NormSpec::lp(0.5, 2).unwrap();
        let c = FaceChart::positive(2, 0).unwrap();
        let r = shift_amount(&lh, &c, &Point::zeros(2)).unwrap();
        assert!((r.s - 0.25).abs() < 1e-12);
    }
}
