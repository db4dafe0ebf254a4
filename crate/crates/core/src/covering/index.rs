//! Nearest-center queries on a uniform ℓ∞ cell grid.

use super::Covering;

/// Centers bucketed into cubic cells of side `2r`, keyed by packed cell
/// coordinates. Centers whose cell does not fit the key width go to an
/// overflow list that every query scans.
pub(crate) struct CenterIndex<'a> {
    cover: &'a Covering,
    side: f64,
    bits: u32,
    keys: Vec<(u64, u32)>,
    overflow: Vec<u32>,
}

impl<'a> CenterIndex<'a> {
    pub(crate) fn new(cover: &'a Covering) -> Self {
        let d = cover.dim();
        let bits = (64 / d as u32).min(21);
        let side = 2.0 * cover.radius();
        let mut idx = CenterIndex { cover, side, bits, keys: Vec::with_capacity(cover.len()), overflow: Vec::new() };
        let mut cell = vec![0i64; d];
        for (k, c) in cover.centers().enumerate() {
            idx.cell_of(c, &mut cell);
            match idx.pack(&cell) {
                Some(key) => idx.keys.push((key, k as u32)),
                None => idx.overflow.push(k as u32),
            }
        }
        idx.keys.sort_unstable();
        idx
    }

    fn cell_of(&self, x: &[f64], cell: &mut [i64]) {
        for (c, v) in cell.iter_mut().zip(x) {
            let f = (v / self.side).floor();
            *c = if f.abs() < 1e15 { f as i64 } else { i64::MAX };
        }
    }

    fn pack(&self, cell: &[i64]) -> Option<u64> {
        let half = 1i64 << (self.bits - 1);
        let mut key = 0u64;
        for c in cell {
            if *c < -half || *c >= half {
                return None;
            }
            key = (key << self.bits) | (c + half) as u64;
        }
        Some(key)
    }

    fn bucket(&self, key: u64) -> &[(u64, u32)] {
        let lo = self.keys.partition_point(|e| e.0 < key);
        let hi = lo + self.keys[lo..].partition_point(|e| e.0 == key);
        &self.keys[lo..hi]
    }

    fn distance(&self, z: &[f64], k: u32, diff: &mut [f64]) -> f64 {
        let c = self.cover.center(k as usize);
        for ((o, a), b) in diff.iter_mut().zip(z).zip(c) {
            *o = a - b;
        }
        self.cover.reference_norm().eval(diff)
    }

    /// Distance from `z` to the nearest center, `inf` if there are none.
    ///
    /// The reference norm dominates ℓ∞ for every built-in family, so a
    /// center within `r` lies in one of the `2^d` cells nearest to `z`.
    /// When none of those is within `r`, the search widens shell by shell,
    /// and falls back to a full scan once a shell gets too large.
    pub(crate) fn nearest(&self, z: &[f64]) -> f64 {
        let d = z.len();
        let r = self.cover.radius();
        let mut diff = vec![0.0; d];
        let mut best = f64::INFINITY;
        for &k in &self.overflow {
            best = best.min(self.distance(z, k, &mut diff));
        }
        let mut cell = vec![0i64; d];
        self.cell_of(z, &mut cell);
        if cell.iter().any(|c| *c == i64::MAX) {
            return self.scan_all(z, &mut diff);
        }
        let mut near = vec![0i64; d];
        for mask in 0..1usize << d {
            for j in 0..d {
                let upper = z[j] - cell[j] as f64 * self.side >= 0.5 * self.side;
                let step = if mask >> j & 1 == 1 { if upper { 1 } else { -1 } } else { 0 };
                near[j] = cell[j] + step;
            }
            if let Some(key) = self.pack(&near) {
                for &(_, k) in self.bucket(key) {
                    best = best.min(self.distance(z, k, &mut diff));
                }
            }
        }
        if best <= r {
            return best;
        }
        // Every center outside Chebyshev shell `rho` around `cell` is at
        // ℓ∞ distance at least `rho * side` from `z`.
        let budget = 4 * self.cover.len() + 64;
        let mut rho = 1i64;
        loop {
            let width = (2 * rho + 1) as usize;
            let cells = width.checked_pow(d as u32).unwrap_or(usize::MAX);
            if cells > budget {
                return self.scan_all(z, &mut diff);
            }
            let mut offs = vec![-rho; d];
            loop {
                if offs.iter().any(|o| o.abs() == rho) {
                    for j in 0..d {
                        near[j] = cell[j] + offs[j];
                    }
                    if let Some(key) = self.pack(&near) {
                        for &(_, k) in self.bucket(key) {
                            best = best.min(self.distance(z, k, &mut diff));
                        }
                    }
                }
                let mut j = 0;
                while j < d {
                    offs[j] += 1;
                    if offs[j] <= rho {
                        break;
                    }
                    offs[j] = -rho;
                    j += 1;
                }
                if j == d {
                    break;
                }
            }
            if best <= rho as f64 * self.side {
                return best;
            }
            rho += 1;
        }
    }

    fn scan_all(&self, z: &[f64], diff: &mut [f64]) -> f64 {
        (0..self.cover.len() as u32).fold(f64::INFINITY, |m, k| m.min(self.distance(z, k, diff)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::Provenance;
    use crate::norms::NormSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (d, r) in [(1, 0.05), (2, 0.1), (3, 0.02), (5, 0.3)] {
            let coords: Vec<f64> = (0..200 * d).map(|_| rng.gen_range(-1.2..1.2)).collect();
            let cover = Covering::from_flat(r, NormSpec::linf(d), coords, Provenance::External).unwrap();
            let idx = CenterIndex::new(&cover);
            let mut diff = vec![0.0; d];
            for _ in 0..500 {
                let z: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
                assert_eq!(idx.nearest(&z), idx.scan_all(&z, &mut diff));
            }
        }
    }
}
