use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::NormSpec;
use crate::point::Point;

const SPHERE_TOL: f64 = 1e-9;

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidSpec(format!("Mazur exponent must be positive, got {p}")));
    }
    Ok(())
}

fn signed_power(x: &[f64], r: f64) -> Vec<f64> {
    x.iter().map(|v| v.signum() * v.abs().powf(r)).collect()
}

/// `x -> (sign x_j |x_j|^{2/p})`, from the Euclidean sphere to the `l_p`
/// sphere.
pub fn mazur_map(p: f64, x: &Point) -> Result<Point> {
    check_p(p)?;
    let n = NormSpec::lp(2.0, x.dim())?.eval(x.coords());
    if (n - 1.0).abs() > SPHERE_TOL {
        return Err(Error::Precondition(format!("Mazur map needs a Euclidean unit vector, norm is {n}")));
    }
    Ok(Point::from_slice_unchecked(&signed_power(x.coords(), 2.0 / p)))
}

/// Inverse of [`mazur_map`]: `y -> (sign y_j |y_j|^{p/2})` on the `l_p`
/// sphere.
pub fn mazur_inverse(p: f64, y: &Point) -> Result<Point> {
    check_p(p)?;
    let n = NormSpec::lp(p, y.dim())?.eval(y.coords());
    if (n - 1.0).abs() > SPHERE_TOL {
        return Err(Error::Precondition(format!("Mazur inverse needs an l_p unit vector, norm is {n}")));
    }
    Ok(Point::from_slice_unchecked(&signed_power(y.coords(), p / 2.0)))
}

/// Largest observed `||M x - M y||_p / ||x - y||_2` over sampled pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MazurScan {
    pub p: f64,
    pub dim: usize,
    pub pairs: usize,
    pub sup_ratio: f64,
    pub worst: (Point, Point),
}

/// Samples pairs of Euclidean unit vectors and records the largest ratio.
///
/// Pairs come in three kinds, in rotation: independent dense vectors,
/// vectors supported on one to three random coordinates, and a vector with
/// a nearby perturbation (log-uniform scale in `[1e-6, 1e-1]`).
pub fn mazur_lipschitz_scan(p: f64, dim: usize, pairs: usize, seed: u64) -> Result<MazurScan> {
    check_p(p)?;
    if pairs == 0 {
        return Err(Error::Precondition("at least one pair is needed".into()));
    }
    let lp = NormSpec::lp(p, dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::NEG_INFINITY, vec![0.0; dim], vec![0.0; dim]);
    let mut diff = vec![0.0; dim];
    let mut n = 0;
    while n < pairs {
        let (x, y) = match n % 3 {
            0 => (dense_unit(&mut rng, dim), dense_unit(&mut rng, dim)),
            1 => {
                let k = rng.gen_range(1..=dim.min(3));
                let support = sample(&mut rng, dim, k).into_vec();
                (sparse_unit(&mut rng, dim, &support), sparse_unit(&mut rng, dim, &support))
            }
            _ => {
                let x = if rng.gen_bool(0.5) {
                    dense_unit(&mut rng, dim)
                } else {
                    let k = rng.gen_range(1..=dim.min(3));
                    let support = sample(&mut rng, dim, k).into_vec();
                    sparse_unit(&mut rng, dim, &support)
                };
                let delta = 10f64.powf(rng.gen_range(-6.0..-1.0));
                let mut y: Vec<f64> = x
                    .iter()
                    .map(|v| v + delta * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                normalize(&mut y);
                (x, y)
            }
        };
        let d2 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if d2 < 1e-12 {
            continue;
        }
        let mx = signed_power(&x, 2.0 / p);
        let my = signed_power(&y, 2.0 / p);
        for ((d, a), b) in diff.iter_mut().zip(&mx).zip(&my) {
            *d = a - b;
        }
        let ratio = lp.eval(&diff) / d2;
        if ratio > best.0 {
            best = (ratio, x, y);
        }
        n += 1;
    }
    Ok(MazurScan {
        p,
        dim,
        pairs,
        sup_ratio: best.0,
        worst: (Point::from_slice_unchecked(&best.1), Point::from_slice_unchecked(&best.2)),
    })
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= n);
}

fn dense_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if v.iter().any(|a: &f64| *a != 0.0) {
            normalize(&mut v);
            return v;
        }
    }
}

fn sparse_unit(rng: &mut ChaCha8Rng, dim: usize, support: &[usize]) -> Vec<f64> {
    loop {
        let mut v = vec![0.0; dim];
        for &j in support {
            v[j] = rng.sample(StandardNormal);
        }
        if v.iter().any(|a| *a != 0.0) {
            normalize(&mut v);
            return v;
        }
    }
}
