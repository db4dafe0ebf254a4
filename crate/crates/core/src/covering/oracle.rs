//! Covering and packing numbers of discretized targets.
//!
//! The target is replaced by its points on a grid of `res` nodes per axis
//! over `[-1, 1]^d` (balls) or by the radial projection of the grid's cube
//! surface (spheres). Candidate centers sit on the grid of `2 res - 1` nodes.
//! A candidate covers a point at distance at most `eps (1 + 1e-9)`; packing
//! points must be more than `2 eps (1 + 1e-9)` apart.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::{Covering, Provenance, Target};
use crate::error::{Error, Result};
use crate::norms::NormSpec;
use crate::point::Point;

pub const MAX_RESOLUTION: usize = 256;

const MAX_POINTS: usize = 1 << 24;
const MAX_INCIDENCES: usize = 60_000_000;
const NODE_BUDGET: usize = 2_000_000;
const DOMINANCE_BUDGET: usize = 200_000_000;
const REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// Largest marginal coverage first, ties to the lexicographically first
    /// center.
    Greedy,
    /// Branch and bound, warm-started with the greedy solution.
    Exact,
}

fn check(target: &Target, metric: &NormSpec, eps: f64, res: usize) -> Result<()> {
    if matches!(target, Target::Face(..)) {
        return Err(Error::Precondition("oracles take a ball or a sphere".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidSpec(format!("eps must be positive, got {eps}")));
    }
    if !(2..=MAX_RESOLUTION).contains(&res) {
        return Err(Error::Guard(format!("grid resolution must lie in 2..={MAX_RESOLUTION}, got {res}")));
    }
    if metric.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), actual: metric.dim() });
    }
    if !metric.is_norm() {
        return Err(Error::Precondition(format!("metric {} is not a norm", metric.label())));
    }
    Ok(())
}

fn node(m: usize, res: usize) -> f64 {
    -1.0 + 2.0 * m as f64 / (res - 1) as f64
}

/// Target points in lexicographic grid order, flattened.
fn discretize(target: &Target, res: usize) -> Result<Vec<f64>> {
    let spec = target.spec();
    let d = spec.dim();
    let total = res.checked_pow(d as u32).filter(|t| *t <= MAX_POINTS);
    if total.is_none() {
        return Err(Error::Guard(format!("{res}^{d} grid points exceed {MAX_POINTS}")));
    }
    let mut out = Vec::new();
    let mut m = vec![0usize; d];
    let mut x = vec![0.0; d];
    loop {
        for j in 0..d {
            x[j] = node(m[j], res);
        }
        match target {
            Target::Ball(_) => {
                if spec.level(&x) <= 1.0 + 1e-12 {
                    out.extend_from_slice(&x);
                }
            }
            _ => {
                if m.iter().any(|v| *v == 0 || *v == res - 1) {
                    let n = spec.eval(&x);
                    out.extend(x.iter().map(|v| v / n));
                }
            }
        }
        if !odometer(&mut m, res) {
            break;
        }
    }
    if matches!(target, Target::Sphere(_)) {
        let mut pts: Vec<&[f64]> = out.chunks_exact(d).collect();
        pts.sort_by(|a, b| a.iter().zip(*b).map(|(u, v)| u.total_cmp(v)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        pts.dedup();
        out = pts.concat();
    }
    Ok(out)
}

/// Advances a little-endian-last counter: the last coordinate moves fastest.
fn odometer(m: &mut [usize], res: usize) -> bool {
    for j in (0..m.len()).rev() {
        m[j] += 1;
        if m[j] < res {
            return true;
        }
        m[j] = 0;
    }
    false
}

struct Buckets {
    side: f64,
    map: HashMap<Vec<i64>, Vec<u32>>,
}

impl Buckets {
    fn new(points: &[f64], d: usize, side: f64) -> Self {
        let mut map: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
        for (k, p) in points.chunks_exact(d).enumerate() {
            map.entry(Self::cell(p, side)).or_default().push(k as u32);
        }
        Buckets { side, map }
    }

    fn cell(p: &[f64], side: f64) -> Vec<i64> {
        p.iter().map(|v| (v / side).floor() as i64).collect()
    }

    /// Indices in the `3^d` cells around `p`.
    fn around(&self, p: &[f64], mut f: impl FnMut(u32)) {
        let c = Self::cell(p, self.side);
        let d = c.len();
        let mut off = vec![-1i64; d];
        let mut key = c.clone();
        loop {
            for j in 0..d {
                key[j] = c[j] + off[j];
            }
            if let Some(v) = self.map.get(&key) {
                v.iter().for_each(|k| f(*k));
            }
            let mut j = 0;
            while j < d {
                off[j] += 1;
                if off[j] <= 1 {
                    break;
                }
                off[j] = -1;
                j += 1;
            }
            if j == d {
                break;
            }
        }
    }
}

struct Instance {
    d: usize,
    cands: Vec<f64>,
    sets: Vec<Vec<u32>>,
    n_elems: usize,
}

fn build(target: &Target, metric: &NormSpec, eps: f64, res: usize) -> Result<Instance> {
    let d = target.dim();
    let elems = discretize(target, res)?;
    let n_elems = elems.len() / d;
    let reach = eps * (1.0 + REL_TOL);
    let buckets = Buckets::new(&elems, d, reach.min(4.0));
    let cres = 2 * res - 1;
    let mut cands = Vec::new();
    let mut sets = Vec::new();
    let mut incidences = 0usize;
    let mut m = vec![0usize; d];
    let mut c = vec![0.0; d];
    let mut diff = vec![0.0; d];
    loop {
        for j in 0..d {
            c[j] = node(m[j], cres);
        }
        let mut set = Vec::new();
        let mut check = |k: u32| {
            let e = &elems[k as usize * d..(k as usize + 1) * d];
            for j in 0..d {
                diff[j] = e[j] - c[j];
            }
            if metric.eval(&diff) <= reach {
                set.push(k);
            }
        };
        if reach < 4.0 {
            buckets.around(&c, &mut check);
        } else {
            (0..n_elems as u32).for_each(&mut check);
        }
        if !set.is_empty() {
            set.sort_unstable();
            incidences += set.len();
            if incidences > MAX_INCIDENCES {
                return Err(Error::Guard(format!(
                    "set-cover instance exceeds {MAX_INCIDENCES} incidences; lower the resolution"
                )));
            }
            cands.extend_from_slice(&c);
            sets.push(set);
        }
        if !odometer(&mut m, cres) {
            break;
        }
    }
    let mut inst = Instance { d, cands, sets, n_elems };
    inst.drop_duplicates();
    Ok(inst)
}

impl Instance {
    /// Keeps the first of every group of candidates with identical sets.
    fn drop_duplicates(&mut self) {
        let mut keyed: Vec<(u64, usize)> = self
            .sets
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let mut h = std::collections::hash_map::DefaultHasher::new();
                s.hash(&mut h);
                (h.finish(), k)
            })
            .collect();
        keyed.sort_unstable();
        let mut dead = vec![false; self.sets.len()];
        let mut i = 0;
        while i < keyed.len() {
            let mut j = i + 1;
            while j < keyed.len() && keyed[j].0 == keyed[i].0 {
                j += 1;
            }
            for a in i..j {
                if dead[keyed[a].1] {
                    continue;
                }
                for b in a + 1..j {
                    if !dead[keyed[b].1] && self.sets[keyed[a].1] == self.sets[keyed[b].1] {
                        dead[keyed[b].1] = true;
                    }
                }
            }
            i = j;
        }
        self.retain(&dead);
    }

    fn retain(&mut self, dead: &[bool]) {
        let d = self.d;
        let mut cands = Vec::new();
        let mut sets = Vec::new();
        for (k, s) in std::mem::take(&mut self.sets).into_iter().enumerate() {
            if !dead[k] {
                cands.extend_from_slice(&self.cands[k * d..(k + 1) * d]);
                sets.push(s);
            }
        }
        self.cands = cands;
        self.sets = sets;
    }

    fn by_elem(&self) -> Vec<Vec<u32>> {
        let mut by = vec![Vec::new(); self.n_elems];
        for (k, s) in self.sets.iter().enumerate() {
            for e in s {
                by[*e as usize].push(k as u32);
            }
        }
        by
    }

    /// Drops candidates whose set is contained in another candidate's set,
    /// within a work budget (pruning is only an optimization).
    fn drop_dominated(&mut self) {
        let by = self.by_elem();
        let mut order: Vec<usize> = (0..self.sets.len()).collect();
        order.sort_by_key(|k| self.sets[*k].len());
        let mut dead = vec![false; self.sets.len()];
        let mut work = 0usize;
        for &a in &order {
            let sa = &self.sets[a];
            let rare = sa.iter().min_by_key(|e| by[**e as usize].len()).unwrap();
            for &b in &by[*rare as usize] {
                let b = b as usize;
                if b == a || dead[b] || self.sets[b].len() < sa.len() {
                    continue;
                }
                work += sa.len() + self.sets[b].len();
                if work > DOMINANCE_BUDGET {
                    self.retain(&dead);
                    return;
                }
                if is_subset(sa, &self.sets[b]) && (self.sets[b].len() > sa.len() || b < a) {
                    dead[a] = true;
                    break;
                }
            }
        }
        self.retain(&dead);
    }

    fn greedy(&self) -> Vec<usize> {
        let mut covered = vec![false; self.n_elems];
        let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
            self.sets.iter().enumerate().map(|(k, s)| (s.len(), Reverse(k))).collect();
        let mut left = self.n_elems;
        let mut chosen = Vec::new();
        while left > 0 {
            let Some((_, Reverse(k))) = heap.pop() else { break };
            let gain = self.sets[k].iter().filter(|e| !covered[**e as usize]).count();
            if gain == 0 {
                continue;
            }
            let stale = heap.peek().is_some_and(|&(g, Reverse(k2))| (g, Reverse(k2)) > (gain, Reverse(k)));
            if stale {
                heap.push((gain, Reverse(k)));
                continue;
            }
            for e in &self.sets[k] {
                if !covered[*e as usize] {
                    covered[*e as usize] = true;
                    left -= 1;
                }
            }
            chosen.push(k);
        }
        chosen
    }
}

fn is_subset(a: &[u32], b: &[u32]) -> bool {
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
    }
    true
}

struct Search<'a> {
    sets: &'a [Vec<u32>],
    by: Vec<Vec<u32>>,
    /// Elements by increasing candidate count, for the disjointness bound.
    order: Vec<u32>,
    cover_count: Vec<u32>,
    /// Uncovered elements in each candidate's set.
    gain: Vec<u32>,
    excluded: Vec<bool>,
    uncovered: usize,
    best: Vec<usize>,
    path: Vec<usize>,
    nodes: usize,
}

impl<'a> Search<'a> {
    fn new(sets: &'a [Vec<u32>], n_elems: usize, incumbent: Vec<usize>) -> Self {
        let mut by = vec![Vec::new(); n_elems];
        for (k, s) in sets.iter().enumerate() {
            for e in s {
                by[*e as usize].push(k as u32);
            }
        }
        let mut order: Vec<u32> = (0..n_elems as u32).collect();
        order.sort_by_key(|e| by[*e as usize].len());
        Search {
            sets,
            by,
            order,
            cover_count: vec![0; n_elems],
            gain: sets.iter().map(|s| s.len() as u32).collect(),
            excluded: vec![false; sets.len()],
            uncovered: n_elems,
            best: incumbent,
            path: Vec::new(),
            nodes: 0,
        }
    }

    fn lower_bound(&self, marked: &mut [bool]) -> usize {
        let max_gain = self
            .gain
            .iter()
            .zip(&self.excluded)
            .filter(|(_, x)| !**x)
            .map(|(g, _)| *g as usize)
            .max()
            .unwrap_or(0);
        if max_gain == 0 {
            return usize::MAX;
        }
        let size_bound = self.uncovered.div_ceil(max_gain);
        // Uncovered elements no two of which share a live candidate each
        // need their own center.
        marked.iter_mut().for_each(|m| *m = false);
        let mut disjoint = 0;
        for &e in &self.order {
            let e = e as usize;
            if self.cover_count[e] != 0 {
                continue;
            }
            if self.by[e].iter().all(|k| !marked[*k as usize] || self.excluded[*k as usize]) {
                disjoint += 1;
                for k in &self.by[e] {
                    marked[*k as usize] = true;
                }
            }
        }
        size_bound.max(disjoint)
    }

    fn take(&mut self, k: usize) {
        for e in &self.sets[k] {
            let e = *e as usize;
            if self.cover_count[e] == 0 {
                self.uncovered -= 1;
                for c in &self.by[e] {
                    self.gain[*c as usize] -= 1;
                }
            }
            self.cover_count[e] += 1;
        }
    }

    fn untake(&mut self, k: usize) {
        for e in &self.sets[k] {
            let e = *e as usize;
            self.cover_count[e] -= 1;
            if self.cover_count[e] == 0 {
                self.uncovered += 1;
                for c in &self.by[e] {
                    self.gain[*c as usize] += 1;
                }
            }
        }
    }

    fn run(&mut self, marked: &mut Vec<bool>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return Err(Error::Guard(format!("branch and bound exceeded {NODE_BUDGET} nodes")));
        }
        if self.uncovered == 0 {
            if self.path.len() < self.best.len() {
                self.best = self.path.clone();
            }
            return Ok(());
        }
        let lb = self.lower_bound(marked);
        if lb == usize::MAX || self.path.len() + lb >= self.best.len() {
            return Ok(());
        }
        // Branch on the uncovered element with the fewest live candidates.
        let mut pick = 0;
        let mut fewest = usize::MAX;
        for e in 0..self.by.len() {
            if self.cover_count[e] == 0 {
                let live = self.by[e].iter().filter(|k| !self.excluded[**k as usize]).count();
                if live < fewest {
                    fewest = live;
                    pick = e;
                }
            }
        }
        if fewest == 0 {
            return Ok(());
        }
        let mut branch: Vec<(u32, usize)> = self.by[pick]
            .iter()
            .map(|k| *k as usize)
            .filter(|k| !self.excluded[*k])
            .map(|k| (self.gain[k], k))
            .collect();
        branch.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut newly_excluded = Vec::new();
        let mut outcome = Ok(());
        for (_, k) in branch {
            self.take(k);
            self.path.push(k);
            outcome = self.run(marked);
            self.path.pop();
            self.untake(k);
            if outcome.is_err() {
                break;
            }
            // Later siblings need not use `k`.
            self.excluded[k] = true;
            newly_excluded.push(k);
        }
        for k in newly_excluded {
            self.excluded[k] = false;
        }
        outcome
    }
}

fn solve(target: &Target, metric: &NormSpec, eps: f64, res: usize, mode: OracleMode) -> Result<(Instance, Vec<usize>)> {
    check(target, metric, eps, res)?;
    if mode == OracleMode::Exact && target.dim() > 3 {
        return Err(Error::Guard("the exact oracle is limited to dimension 3".into()));
    }
    let mut inst = build(target, metric, eps, res)?;
    if mode == OracleMode::Greedy {
        let g = inst.greedy();
        return Ok((inst, g));
    }
    inst.drop_dominated();
    let greedy = inst.greedy();
    let mut search = Search::new(&inst.sets, inst.n_elems, greedy);
    let mut marked = vec![false; inst.sets.len()];
    search.run(&mut marked)?;
    let best = search.best;
    Ok((inst, best))
}

/// Number of points in the discretized target, the universe of the
/// set-cover instance.
pub fn oracle_instance_size(target: &Target, resolution: usize) -> Result<usize> {
    check(target, &NormSpec::linf(target.dim()), 1.0, resolution)?;
    Ok(discretize(target, resolution)?.len() / target.dim())
}

/// Size of a (greedy or exact) minimal covering of the discretized target.
pub fn covering_number_oracle(
    target: &Target,
    metric: &NormSpec,
    eps: f64,
    resolution: usize,
    mode: OracleMode,
) -> Result<usize> {
    Ok(solve(target, metric, eps, resolution, mode)?.1.len())
}

/// The oracle's chosen centers as a covering of radius `eps`.
pub fn oracle_covering(
    target: &Target,
    metric: &NormSpec,
    eps: f64,
    resolution: usize,
    mode: OracleMode,
) -> Result<Covering> {
    let (inst, chosen) = solve(target, metric, eps, resolution, mode)?;
    let d = inst.d;
    let mut order = chosen;
    order.sort_unstable();
    let coords = order.iter().flat_map(|k| inst.cands[k * d..(k + 1) * d].iter().copied()).collect();
    Covering::from_flat(eps, metric.clone(), coords, Provenance::Oracle)
}

/// Greedy maximal set of target grid points that are pairwise more than
/// `2 eps` apart, scanned in lexicographic order.
pub fn packing_set(target: &Target, metric: &NormSpec, eps: f64, resolution: usize) -> Result<Vec<Point>> {
    check(target, metric, eps, resolution)?;
    let d = target.dim();
    if d > 3 {
        return Err(Error::Guard("the packing oracle is limited to dimension 3".into()));
    }
    let elems = discretize(target, resolution)?;
    let sep = 2.0 * eps * (1.0 + REL_TOL);
    let side = sep.min(4.0);
    let mut map: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
    let mut kept: Vec<u32> = Vec::new();
    let mut diff = vec![0.0; d];
    for (k, p) in elems.chunks_exact(d).enumerate() {
        let mut ok = true;
        let probe = Buckets { side, map: std::mem::take(&mut map) };
        let mut visit = |q: u32| {
            if ok {
                let e = &elems[q as usize * d..(q as usize + 1) * d];
                for j in 0..d {
                    diff[j] = p[j] - e[j];
                }
                if metric.eval(&diff) <= sep {
                    ok = false;
                }
            }
        };
        if sep < 4.0 {
            probe.around(p, &mut visit);
        } else {
            kept.iter().for_each(|q| visit(*q));
        }
        map = probe.map;
        if ok {
            kept.push(k as u32);
            map.entry(Buckets::cell(p, side)).or_default().push(k as u32);
        }
    }
    Ok(kept
        .iter()
        .map(|k| Point::from_slice_unchecked(&elems[*k as usize * d..(*k as usize + 1) * d]))
        .collect())
}

/// Size of [`packing_set`]; a lower bound on the covering number at `eps`.
pub fn packing_oracle(target: &Target, metric: &NormSpec, eps: f64, resolution: usize) -> Result<usize> {
    Ok(packing_set(target, metric, eps, resolution)?.len())
}
