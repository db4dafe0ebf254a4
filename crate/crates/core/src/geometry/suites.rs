//! Sampled checks of the two shift lemmas, chart by chart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_with_tolerance, FaceChart, Shifter, RANGE_TOL};
use crate::error::{Error, Result};
use crate::norms::NormSpec;
use crate::point::linf_distance;
use crate::solve::illinois;

/// Slack allowed on every sampled inequality.
pub const SUITE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    /// `||Δx - Δy||_inf <= 2 ||x - y||_inf` on arbitrary face pairs.
    Lipschitz,
    /// `s(y) <= s(x) <= s(y) + ||x - y||_inf` on dominated pairs `|x| <= |y|`.
    Monotonicity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub kind: SuiteKind,
    pub norm: String,
    pub dim: usize,
    pub charts: usize,
    pub pairs: usize,
    pub violations: usize,
    /// Largest `lhs - rhs` seen; negative when every pair had room to spare.
    pub worst_excess: f64,
    /// Shifted points that missed `S_X ∩ Q_e ∩ C_i` by more than the slack.
    pub range_violations: usize,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.range_violations == 0
    }
}

/// Runs a suite over every chart of `spec`'s dimension.
///
/// Chart `c` draws from stream `c` of a ChaCha generator seeded with `seed`,
/// so the report does not depend on the thread count.
pub fn run_suite(
    kind: SuiteKind,
    spec: &NormSpec,
    pairs_per_chart: usize,
    seed: u64,
) -> Result<SuiteReport> {
    if pairs_per_chart == 0 {
        return Err(Error::Precondition("pairs_per_chart must be positive".into()));
    }
    if spec.dim() < 2 {
        return Err(Error::Precondition("suites need dimension at least 2".into()));
    }
    let charts = FaceChart::all(spec.dim());
    let per_chart: Vec<(usize, f64, usize)> = charts
        .par_iter()
        .map(|chart| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chart.ordinal() as u64);
            chart_suite(kind, spec, chart, pairs_per_chart, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut report = SuiteReport {
        kind,
        norm: spec.label(),
        dim: spec.dim(),
        charts: charts.len(),
        pairs: charts.len() * pairs_per_chart,
        violations: 0,
        worst_excess: f64::MIN,
        range_violations: 0,
    };
    for (v, w, r) in per_chart {
        report.violations += v;
        report.worst_excess = report.worst_excess.max(w);
        report.range_violations += r;
    }
    Ok(report)
}

fn chart_suite(
    kind: SuiteKind,
    spec: &NormSpec,
    chart: &FaceChart,
    pairs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, f64, usize)> {
    let d = chart.dim();
    let mut sh = Shifter::new(spec, chart);
    let (mut x, mut y) = (vec![0.0; d], vec![0.0; d]);
    let (mut dx, mut dy) = (vec![0.0; d], vec![0.0; d]);
    let mut violations = 0;
    let mut worst = f64::MIN;
    let mut range = 0;
    for n in 0..pairs {
        let excess = match kind {
            SuiteKind::Lipschitz => {
                sample_face_point(spec, chart, rng, &mut x);
                if n % 2 == 0 {
                    sample_face_point(spec, chart, rng, &mut y);
                } else {
                    perturb(spec, chart, rng, &x, &mut y);
                }
                sh.shift_into(&x, &mut dx)?;
                sh.shift_into(&y, &mut dy)?;
                if !on_range(spec, chart, &dx)? || !on_range(spec, chart, &dy)? {
                    range += 1;
                }
                linf_distance(&dx, &dy) - 2.0 * linf_distance(&x, &y)
            }
            SuiteKind::Monotonicity => {
                sample_face_point(spec, chart, rng, &mut y);
                dominated(chart, rng, &y, &mut x);
                let sx = sh.shift_into(&x, &mut dx)?;
                let sy = sh.shift_into(&y, &mut dy)?;
                if !on_range(spec, chart, &dx)? {
                    range += 1;
                }
                (sy - sx).max(sx - sy - linf_distance(&x, &y))
            }
        };
        if excess > SUITE_TOL {
            violations += 1;
        }
        worst = worst.max(excess);
    }
    Ok((violations, worst, range))
}

fn on_range(spec: &NormSpec, chart: &FaceChart, z: &[f64]) -> Result<bool> {
    let m = classify_with_tolerance(z, chart, RANGE_TOL)?;
    Ok(m.in_orthant && m.in_cone && (spec.level(z) - 1.0).abs() <= RANGE_TOL)
}

/// Scale `t` in `(0, 1]` with `level(t z) = 1`, for `level(z) > 1`.
fn boundary_scale(spec: &NormSpec, z: &[f64], buf: &mut [f64]) -> f64 {
    let l1 = spec.level(z) - 1.0;
    let mut f = |t: f64| {
        for (b, v) in buf.iter_mut().zip(z) {
            *b = t * v;
        }
        spec.level(buf) - 1.0
    };
    // The bracket [0, 1] always holds a root, so the best iterate is kept
    // even when the iteration cap is hit.
    let t = illinois(&mut f, 0.0, 1.0, -1.0, l1, 1e-15, 1e-15, 200).unwrap_or(0.5);
    if f(t) > 0.0 {
        // Step just inside the ball.
        let mut t = t;
        while f(t) > 0.0 {
            t *= 1.0 - 1e-15;
        }
        t
    } else {
        t
    }
}

/// A random point of the face `B_X ∩ Q_e ∩ H_i`, written into `out`.
///
/// Magnitudes are uniform on the unit cube off coordinate `i`. Points outside
/// the ball are pulled back radially: half of them onto the sphere, half to a
/// uniform-volume interior radius.
pub fn sample_face_point<R: Rng>(spec: &NormSpec, chart: &FaceChart, rng: &mut R, out: &mut [f64]) {
    let d = chart.dim();
    debug_assert_eq!(out.len(), d);
    for (j, o) in out.iter_mut().enumerate() {
        *o = if j == chart.index() { 0.0 } else { chart.sign(j) * rng.gen::<f64>() };
    }
    if spec.level(out) > 1.0 {
        let mut buf = vec![0.0; d];
        let mut t = boundary_scale(spec, out, &mut buf);
        if rng.gen_bool(0.5) {
            t *= rng.gen::<f64>().powf(1.0 / (d - 1).max(1) as f64);
        }
        out.iter_mut().for_each(|v| *v *= t);
    }
}

/// A face point near `x`: every free magnitude moves by up to `delta`, with
/// `delta` log-uniform in `[1e-6, 1e-1]`.
fn perturb<R: Rng>(spec: &NormSpec, chart: &FaceChart, rng: &mut R, x: &[f64], out: &mut [f64]) {
    let delta = 10f64.powf(rng.gen_range(-6.0..-1.0));
    for (j, o) in out.iter_mut().enumerate() {
        *o = if j == chart.index() {
            0.0
        } else {
            let m = (x[j].abs() + delta * rng.gen_range(-1.0..1.0)).abs().min(1.0);
            chart.sign(j) * m
        };
    }
    if spec.level(out) > 1.0 {
        let mut buf = vec![0.0; out.len()];
        let t = boundary_scale(spec, out, &mut buf);
        out.iter_mut().for_each(|v| *v *= t);
    }
}

/// `x = u ⊙ y` with `u` in `[0,1]^d`; half the time only one coordinate
/// shrinks.
fn dominated<R: Rng>(chart: &FaceChart, rng: &mut R, y: &[f64], x: &mut [f64]) {
    let d = y.len();
    if rng.gen_bool(0.5) {
        for (a, b) in x.iter_mut().zip(y) {
            *a = rng.gen::<f64>() * b;
        }
    } else {
        x.copy_from_slice(y);
        let mut j = rng.gen_range(0..d - 1);
        if j >= chart.index() {
            j += 1;
        }
        x[j] *= rng.gen::<f64>();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{OrliczSpec, WeightSpec};

    #[test]
    fn face_samples_stay_in_the_face() {
        let spec = NormSpec::lp(0.5, 3).unwrap();
        let chart = FaceChart::new(vec![1, -1, 1], 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x = vec![0.0; 3];
        for _ in 0..2000 {
            sample_face_point(&spec, &chart, &mut rng, &mut x);
            assert_eq!(x[1], 0.0);
            assert!(x[0] >= 0.0 && x[2] >= 0.0);
            assert!(spec.level(&x) <= 1.0);
        }
    }

    #[test]
    fn small_suites_pass() {
        let specs = [
            NormSpec::lp(0.5, 3).unwrap(),
            NormSpec::linf(3),
            NormSpec::lorentz(1.0, WeightSpec::Power(-0.5), 3).unwrap(),
            NormSpec::orlicz(OrliczSpec::PowerLog { p: 2.0, alpha: 1.0 }, 3).unwrap(),
        ];
        for spec in &specs {
            for kind in [SuiteKind::Lipschitz, SuiteKind::Monotonicity] {
                let r = run_suite(kind, spec, 200, 5).unwrap();
                assert!(r.passed(), "{r:?}");
                assert_eq!(r.pairs, 24 * 200);
            }
        }
    }

    #[test]
    fn suites_are_deterministic() {
        let spec = NormSpec::lp(1.0, 3).unwrap();
        let a = run_suite(SuiteKind::Lipschitz, &spec, 50, 11).unwrap();
        let b = run_suite(SuiteKind::Lipschitz, &spec, 50, 11).unwrap();
        assert_eq!(a, b);
    }
}
