//! Grid coverings of the canonical face and their lift to the sphere.
//!
//! All built-in norms are symmetric, so one face suffices: the grid is built
//! on `B_X ∩ Q_+ ∩ H_{d-1}` and copied into every chart by permuting and
//! signing coordinates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Covering, Provenance};
use crate::error::{Error, Result};
use crate::geometry::{FaceChart, Shifter};
use crate::norms::NormSpec;
use crate::solve::bisect_last_inside;

/// Upper limit on the number of centers any grid construction may produce.
pub const MAX_CENTERS: usize = 10_000_000;

const EXTENT_HALVINGS: usize = 60;

/// Grid pitch and whether kept centers are pulled into the ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub step: f64,
    pub clamp_into_ball: bool,
}

impl GridParams {
    pub fn for_eps(eps: f64) -> Self {
        GridParams { step: 2.0 * eps, clamp_into_ball: true }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidSpec(format!("eps must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// `ceil(1 / step)`, forgiving rounding noise in `step`.
pub(crate) fn cells_per_axis(step: f64) -> usize {
    ((1.0 / step) - 1e-9).ceil().max(1.0) as usize
}

/// Visits the lower corners `a = h m`, `m ∈ {0..n-1}^free`, with
/// `level(a) <= 1`, in lexicographic order of `m`. Coordinates past `free`
/// stay zero. Returns `None` as soon as more than `cap` cells qualify.
///
/// By monotonicity a cell meets the ball exactly when its lower corner is in
/// it, and a corner outside the ball rules out every later index on that
/// axis.
fn visit_cells(
    spec: &NormSpec,
    free: usize,
    n: usize,
    h: f64,
    cap: usize,
    visit: &mut dyn FnMut(&[f64]),
) -> Option<usize> {
    let mut x = vec![0.0; spec.dim()];
    let mut count = 0usize;
    if free == 0 {
        if cap == 0 {
            return None;
        }
        visit(&x);
        return Some(1);
    }
    if rec(spec, &mut x, 0, free, n, h, cap, &mut count, visit) {
        Some(count)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn rec(
    spec: &NormSpec,
    x: &mut [f64],
    j: usize,
    free: usize,
    n: usize,
    h: f64,
    cap: usize,
    count: &mut usize,
    visit: &mut dyn FnMut(&[f64]),
) -> bool {
    for v in 0..n {
        x[j] = v as f64 * h;
        if spec.level(x) > 1.0 {
            break;
        }
        if j + 1 == free {
            *count += 1;
            if *count > cap {
                x[j] = 0.0;
                return false;
            }
            visit(x);
        } else if !rec(spec, x, j + 1, free, n, h, cap, count, visit) {
            x[j] = 0.0;
            return false;
        }
    }
    x[j] = 0.0;
    true
}

/// Number of face cells for `n` cells per axis, or `None` above `cap`.
pub fn face_cell_count(spec: &NormSpec, cells_per_axis: usize, cap: usize) -> Option<usize> {
    let n = cells_per_axis.max(1);
    visit_cells(spec, spec.dim() - 1, n, 1.0 / n as f64, cap, &mut |_| {})
}

/// Number of ball cells over all `2^d` orthants for `n` cells per axis, or
/// `None` above `cap`.
pub fn ball_cell_count(spec: &NormSpec, cells_per_axis: usize, cap: usize) -> Option<usize> {
    let d = spec.dim();
    let n = cells_per_axis.max(1);
    let per = visit_cells(spec, d, n, 1.0 / n as f64, cap >> d.min(63), &mut |_| {})?;
    Some(per << d)
}

/// Center for the cell with lower corner `a`, and the ℓ∞ radius it needs to
/// cover the part of the cell inside the ball.
///
/// 1. The midpoint, if it is in the ball (radius `eps`).
/// 2. Otherwise, with `u` the per-axis extents of the ball inside the cell
///    and `l = max(a, u - eps)`: if `l` is in the ball, the point of the
///    segment from `l` to the midpoint closest to the midpoint (radius `eps`).
/// 3. Otherwise the furthest point `a + t eps 1` of the diagonal inside the
///    ball (radius measured, at most `2 eps`).
///
/// Radial rescaling toward the origin is not used: for `p < 1` it can move a
/// center more than `eps` away from parts of its cell.
fn cell_center(spec: &NormSpec, a: &[f64], free: usize, eps: f64, c: &mut [f64], buf: &mut [f64]) -> f64 {
    let d = a.len();
    c.copy_from_slice(a);
    for v in &mut c[..free] {
        *v += eps;
    }
    if spec.level(c) <= 1.0 {
        return eps;
    }
    let h = 2.0 * eps;
    let mut u = vec![0.0; free];
    for j in 0..free {
        buf.copy_from_slice(a);
        let (_, hi) = bisect_last_inside(
            |t| {
                buf[j] = a[j] + t;
                spec.level(buf) <= 1.0
            },
            0.0,
            h,
            EXTENT_HALVINGS,
        );
        u[j] = a[j] + hi;
    }
    let mut l = a.to_vec();
    for j in 0..free {
        l[j] = a[j].max(u[j] - eps);
    }
    if spec.level(&l) <= 1.0 {
        let (t, _) = bisect_last_inside(
            |t| {
                for j in 0..d {
                    buf[j] = l[j] + t * (a[j] + if j < free { eps } else { 0.0 } - l[j]);
                }
                spec.level(buf) <= 1.0
            },
            0.0,
            1.0,
            EXTENT_HALVINGS,
        );
        for j in 0..free {
            c[j] = l[j] + t * (a[j] + eps - l[j]);
        }
        return eps;
    }
    let (t, _) = bisect_last_inside(
        |t| {
            for j in 0..d {
                buf[j] = a[j] + if j < free { t * eps } else { 0.0 };
            }
            spec.level(buf) <= 1.0
        },
        0.0,
        1.0,
        EXTENT_HALVINGS,
    );
    let mut r = eps;
    for j in 0..free {
        c[j] = a[j] + t * eps;
        r = r.max(u[j] - c[j]).max(c[j] - a[j]);
    }
    r
}

/// Face centers (the `d - 1` free magnitudes, flattened) and the face radius.
fn canonical_face(spec: &NormSpec, n: usize, h: f64, clamp: bool) -> Result<(Vec<f64>, f64)> {
    let d = spec.dim();
    let free = d - 1;
    let eps = h / 2.0;
    let mut out = Vec::new();
    let mut radius = eps;
    let mut c = vec![0.0; d];
    let mut buf = vec![0.0; d];
    let visited = visit_cells(spec, free, n, h, MAX_CENTERS, &mut |a| {
        if clamp {
            radius = radius.max(cell_center(spec, a, free, eps, &mut c, &mut buf));
            out.extend_from_slice(&c[..free]);
        } else {
            out.extend(a[..free].iter().map(|v| v + eps));
        }
    });
    if visited.is_none() {
        return Err(Error::Guard(format!("face grid exceeds {MAX_CENTERS} centers")));
    }
    Ok((out, radius))
}

/// Grid covering of the face `B_X ∩ Q_e ∩ H_i` in ℓ∞ with pitch `2 eps`.
pub fn cover_face_grid(spec: &NormSpec, chart: &FaceChart, eps: f64) -> Result<Covering> {
    check_eps(eps)?;
    cover_face_grid_with(spec, chart, &GridParams::for_eps(eps))
}

/// [`cover_face_grid`] with explicit grid parameters. Without clamping the
/// centers are the raw cell midpoints and may leave the ball.
pub fn cover_face_grid_with(spec: &NormSpec, chart: &FaceChart, params: &GridParams) -> Result<Covering> {
    if !(params.step > 0.0 && params.step <= 2.0) {
        return Err(Error::InvalidSpec(format!("grid step must lie in (0, 2], got {}", params.step)));
    }
    if chart.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), actual: chart.dim() });
    }
    let d = spec.dim();
    let n = cells_per_axis(params.step);
    let (face, radius) = canonical_face(spec, n, params.step, params.clamp_into_ball)?;
    let free = d - 1;
    let count = if free == 0 { 1 } else { face.len() / free };
    let mut coords = vec![0.0; count * d];
    for (k, out) in coords.chunks_exact_mut(d).enumerate() {
        chart.embed(&face[k * free..(k + 1) * free], out);
    }
    Covering::from_flat(radius, NormSpec::linf(d), coords, Provenance::GridFace(chart.clone()))
}

fn tag_chart(e: Error, chart: &FaceChart) -> Error {
    match e {
        Error::SpecDefect(s) => Error::SpecDefect(format!("chart {chart}: {s}")),
        Error::Precondition(s) => Error::Precondition(format!("chart {chart}: {s}")),
        Error::Inconsistent(s) => Error::Inconsistent(format!("chart {chart}: {s}")),
        other => other,
    }
}

/// Sphere covering of radius `2 eps` in ℓ∞: the face grid shifted onto the
/// sphere in every chart.
pub fn lift_sphere_cover(spec: &NormSpec, eps: f64) -> Result<Covering> {
    check_eps(eps)?;
    lift_with_cells(spec, cells_per_axis(2.0 * eps), 2.0 * eps)
}

/// The lift for `n` cells per axis of pitch `h` (`n h >= 1`).
pub(crate) fn lift_with_cells(spec: &NormSpec, n: usize, h: f64) -> Result<Covering> {
    if !spec.is_monotone() {
        return Err(Error::Precondition("the lift needs a monotone quasi-norm".into()));
    }
    let d = spec.dim();
    let (face, _) = canonical_face(spec, n, h, true)?;
    let free = d - 1;
    let per_face = if free == 0 { 1 } else { face.len() / free };
    let charts = FaceChart::all(d);
    if per_face.saturating_mul(charts.len()) > MAX_CENTERS {
        return Err(Error::Guard(format!(
            "lift would have {} x {per_face} centers, above {MAX_CENTERS}",
            charts.len()
        )));
    }
    let blocks: Vec<Vec<f64>> = charts
        .par_iter()
        .map(|chart| {
            let mut sh = Shifter::new(spec, chart);
            let mut x = vec![0.0; d];
            let mut block = vec![0.0; per_face * d];
            for (k, out) in block.chunks_exact_mut(d).enumerate() {
                chart.embed(&face[k * free..(k + 1) * free], &mut x);
                sh.shift_into(&x, out).map_err(|e| tag_chart(e, chart))?;
            }
            Ok(block)
        })
        .collect::<Result<_>>()?;
    Covering::from_flat(h, NormSpec::linf(d), blocks.concat(), Provenance::SphereLift)
}

/// Ball covering of radius `eps` in ℓ∞: midpoints of the grid cells meeting
/// the ball, in every orthant.
pub fn cover_ball_grid(spec: &NormSpec, eps: f64) -> Result<Covering> {
    check_eps(eps)?;
    ball_with_cells(spec, cells_per_axis(2.0 * eps), 2.0 * eps)
}

pub(crate) fn ball_with_cells(spec: &NormSpec, n: usize, h: f64) -> Result<Covering> {
    let d = spec.dim();
    let eps = h / 2.0;
    let mut mids = Vec::new();
    let cap = MAX_CENTERS >> d.min(63);
    let visited = visit_cells(spec, d, n, h, cap, &mut |a| {
        mids.extend(a.iter().map(|v| v + eps));
    });
    if visited.is_none() {
        return Err(Error::Guard(format!("ball grid exceeds {MAX_CENTERS} centers")));
    }
    let per = mids.len() / d;
    let mut coords = Vec::with_capacity(mids.len() << d);
    for mask in 0..1usize << d {
        for k in 0..per {
            for j in 0..d {
                let s = if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
                coords.push(s * mids[k * d + j]);
            }
        }
    }
    Covering::from_flat(eps, NormSpec::linf(d), coords, Provenance::BallGrid)
}
