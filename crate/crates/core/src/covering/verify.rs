//! Sampled certificates for coverings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::index::CenterIndex;
use super::Covering;
use crate::error::{Error, Result};
use crate::geometry::FaceChart;
use crate::norms::NormSpec;
use crate::point::Point;
use crate::solve::illinois;

/// Slack allowed on `max_gap <= radius`.
pub const VERIFY_TOL: f64 = 1e-9;

const BATCH: usize = 4096;

/// A set to be covered.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Sphere(NormSpec),
    Ball(NormSpec),
    Face(NormSpec, FaceChart),
}

impl Target {
    pub fn spec(&self) -> &NormSpec {
        match self {
            Target::Sphere(s) | Target::Ball(s) | Target::Face(s, _) => s,
        }
    }

    pub fn dim(&self) -> usize {
        self.spec().dim()
    }

    fn check(&self) -> Result<()> {
        if let Target::Face(s, c) = self {
            if s.dim() != c.dim() {
                return Err(Error::DimensionMismatch { expected: s.dim(), actual: c.dim() });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub samples: usize,
    /// Largest distance from a sample to its nearest center; `None` for a
    /// covering without centers.
    pub max_gap: Option<f64>,
    pub worst_point: Option<Point>,
    pub covered_fraction: f64,
    pub radius: f64,
    pub passed: bool,
}

/// Draws `n` points of `target`, deterministically in `seed`.
///
/// Sample `t` belongs to batch `t / 4096`, which uses stream `t / 4096` of a
/// ChaCha generator seeded with `seed`.
pub fn sample_set(target: &Target, n: usize, seed: u64) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::Precondition("at least one sample is needed".into()));
    }
    target.check()?;
    let d = target.dim();
    let batches: Vec<Vec<f64>> = (0..n.div_ceil(BATCH))
        .into_par_iter()
        .map(|b| sample_batch(target, n, b, seed))
        .collect();
    Ok(batches.concat().chunks_exact(d).map(Point::from_slice_unchecked).collect())
}

fn sample_batch(target: &Target, n: usize, b: usize, seed: u64) -> Vec<f64> {
    let d = target.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b as u64);
    let start = b * BATCH;
    let end = (start + BATCH).min(n);
    let mut out = vec![0.0; (end - start) * d];
    for (t, x) in (start..end).zip(out.chunks_exact_mut(d)) {
        match target {
            Target::Sphere(spec) => sphere_point(spec, &mut rng, x),
            Target::Ball(spec) => {
                sphere_point(spec, &mut rng, x);
                let r = rng.gen::<f64>().powf(1.0 / d as f64);
                x.iter_mut().for_each(|v| *v *= r);
            }
            Target::Face(spec, chart) => face_point(spec, chart, n, t, &mut rng, x),
        }
    }
    out
}

fn sphere_point(spec: &NormSpec, rng: &mut ChaCha8Rng, x: &mut [f64]) {
    loop {
        x.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        let n = spec.eval(x);
        if n > 0.0 && n.is_finite() {
            x.iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}

/// Stratified face sample: sample `t` of `n` is jittered uniformly inside
/// cell `t mod g^{d-1}` of a `g`-per-axis grid on the unit cube of face
/// magnitudes, then pulled radially onto the sphere if it left the ball.
fn face_point(spec: &NormSpec, chart: &FaceChart, n: usize, t: usize, rng: &mut ChaCha8Rng, x: &mut [f64]) {
    let d = x.len();
    let free = d - 1;
    if free == 0 {
        x[0] = 0.0;
        return;
    }
    let g = ((n as f64).powf(1.0 / free as f64).floor() as usize).max(1);
    let mut cell = t % g.saturating_pow(free as u32).max(1);
    let mut mags = vec![0.0; free];
    for m in mags.iter_mut() {
        let k = cell % g;
        cell /= g;
        *m = (k as f64 + rng.gen::<f64>()) / g as f64;
    }
    chart.embed(&mags, x);
    let l = spec.level(x);
    if l > 1.0 {
        let z = x.to_vec();
        let mut buf = vec![0.0; d];
        let mut f = |s: f64| {
            for (b, v) in buf.iter_mut().zip(&z) {
                *b = s * v;
            }
            spec.level(&buf) - 1.0
        };
        let mut s = illinois(&mut f, 0.0, 1.0, -1.0, l - 1.0, 1e-15, 0.0, 200).unwrap_or(0.5);
        while f(s) > 0.0 {
            s *= 1.0 - 1e-15;
        }
        for (o, v) in x.iter_mut().zip(&z) {
            *o = s * v;
        }
    }
}

/// Distance from each sampled target point to the nearest center.
///
/// Passes when every sample lies within `radius + 1e-9` of some center.
pub fn verify_covering(cover: &Covering, target: &Target, samples: usize, seed: u64) -> Result<VerifyReport> {
    if samples == 0 {
        return Err(Error::Precondition("at least one sample is needed".into()));
    }
    target.check()?;
    if target.dim() != cover.dim() {
        return Err(Error::DimensionMismatch { expected: cover.dim(), actual: target.dim() });
    }
    let limit = cover.radius() + VERIFY_TOL;
    if cover.is_empty() {
        return Ok(VerifyReport {
            samples,
            max_gap: None,
            worst_point: None,
            covered_fraction: 0.0,
            radius: cover.radius(),
            passed: false,
        });
    }
    let index = CenterIndex::new(cover);
    let d = cover.dim();
    let per_batch: Vec<(f64, Vec<f64>, usize)> = (0..samples.div_ceil(BATCH))
        .into_par_iter()
        .map(|b| {
            let pts = sample_batch(target, samples, b, seed);
            let mut worst = (f64::NEG_INFINITY, Vec::new(), 0usize);
            for z in pts.chunks_exact(d) {
                let g = index.nearest(z);
                if g <= limit {
                    worst.2 += 1;
                }
                if g > worst.0 {
                    worst.0 = g;
                    worst.1 = z.to_vec();
                }
            }
            worst
        })
        .collect();
    let mut max_gap = f64::NEG_INFINITY;
    let mut worst_point = Vec::new();
    let mut covered = 0;
    for (g, z, c) in per_batch {
        covered += c;
        if g > max_gap {
            max_gap = g;
            worst_point = z;
        }
    }
    Ok(VerifyReport {
        samples,
        max_gap: Some(max_gap),
        worst_point: Some(Point::from_slice_unchecked(&worst_point)),
        covered_fraction: covered as f64 / samples as f64,
        radius: cover.radius(),
        passed: max_gap <= limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{lift_sphere_cover, Provenance};

    #[test]
    fn sample_examples() {
        let l1 = NormSpec::lp(1.0, 3).unwrap();
        for p in sample_set(&Target::Sphere(l1.clone()), 10, 1).unwrap() {
            assert!((l1.eval(p.coords()) - 1.0).abs() < 1e-12);
        }
        for p in sample_set(&Target::Ball(l1.clone()), 100, 1).unwrap() {
            assert!(l1.eval(p.coords()) <= 1.0 + 1e-12);
        }
        let l2 = NormSpec::lp(2.0, 2).unwrap();
        let face = Target::Face(l2.clone(), FaceChart::positive(2, 1).unwrap());
        for p in sample_set(&face, 5, 1).unwrap() {
            assert_eq!(p.coords()[1], 0.0);
            assert!(p.coords()[0] >= 0.0);
        }
        assert_eq!(sample_set(&face, 5000, 9).unwrap(), sample_set(&face, 5000, 9).unwrap());
    }

    #[test]
    fn single_center_covers_ball() {
        let c = Covering::new(2.0, NormSpec::lp(2.0, 2).unwrap(), vec![Point::zeros(2)], Provenance::External)
            .unwrap();
        let r = verify_covering(&c, &Target::Ball(NormSpec::lp(2.0, 2).unwrap()), 1000, 3).unwrap();
        assert!(r.passed && r.max_gap.unwrap() <= 1.0 && r.covered_fraction == 1.0);
    }

    #[test]
    fn empty_cover_fails() {
        let c = Covering::new(1.0, NormSpec::linf(2), vec![], Provenance::External).unwrap();
        let r = verify_covering(&c, &Target::Sphere(NormSpec::linf(2)), 10, 3).unwrap();
        assert!(!r.passed && r.covered_fraction == 0.0 && r.max_gap.is_none());
    }

    #[test]
    fn lifted_square_cover_passes() {
        let c = lift_sphere_cover(&NormSpec::linf(2), 0.25).unwrap();
        let r = verify_covering(&c, &Target::Sphere(NormSpec::linf(2)), 100_000, 1).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.max_gap.unwrap() <= 0.5);
    }

    #[test]
    fn too_small_radius_fails() {
        let c = lift_sphere_cover(&NormSpec::lp(2.0, 2).unwrap(), 0.25).unwrap();
        let shrunk = Covering::from_flat(0.05, NormSpec::linf(2), c.coords.clone(), Provenance::External).unwrap();
        let r = verify_covering(&shrunk, &Target::Sphere(NormSpec::lp(2.0, 2).unwrap()), 2000, 1).unwrap();
        assert!(!r.passed && r.covered_fraction < 1.0 && r.max_gap.unwrap() > 0.05);
    }
}
