//! Exact TSP and k-TSP by Held-Karp, the minimum-ratio TSP, and the scaling
//! wrapper that turns a k-TSP routine into a ratio approximation.
//!
//! Tours always start and end at the depot (vertex 0 of the [`Metric`]); a
//! subset `S` of retailers is priced as the shortest closed walk through
//! `S ∪ {depot}`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::setfn::Metric;
use crate::subset::ElementSet;

/// Largest vertex set handed to the Held-Karp routine.
pub const MAX_TSP_VERTICES: usize = 14;
/// Largest metric for the brute-force and scaled ratio solvers.
pub const MAX_RATIO_VERTICES: usize = 12;

const RATIO_TIE: f64 = 1e-12;

/// Tour lengths for every subset of `vertices`, indexed by local bitmask.
fn held_karp(metric: &Metric, vertices: &[usize]) -> Vec<f64> {
    let k = vertices.len();
    let full = 1usize << k;
    let mut tours = vec![0.0; full];
    if k == 0 {
        return tours;
    }
    let mut paths = vec![f64::INFINITY; full * k];
    for (j, &v) in vertices.iter().enumerate() {
        paths[(1 << j) * k + j] = metric.dist(0, v);
    }
    for mask in 1..full {
        let mut best = f64::INFINITY;
        let mut rest = mask;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let here = paths[mask * k + j];
            if !here.is_finite() {
                continue;
            }
            best = best.min(here + metric.dist(vertices[j], 0));
            let mut open = !mask & (full - 1);
            while open != 0 {
                let nxt = open.trailing_zeros() as usize;
                open &= open - 1;
                let slot = (mask | 1 << nxt) * k + nxt;
                let cand = here + metric.dist(vertices[j], vertices[nxt]);
                if cand < paths[slot] {
                    paths[slot] = cand;
                }
            }
        }
        tours[mask] = best;
    }
    tours
}

/// Optimal tour length over `set ∪ {depot}` without size checks.
pub(crate) fn tour_length(metric: &Metric, set: ElementSet) -> f64 {
    let vertices: Vec<usize> = set.iter().collect();
    debug_assert!(vertices.len() <= MAX_TSP_VERTICES);
    held_karp(metric, &vertices)[(1usize << vertices.len()) - 1]
}

/// Exact tour length over `set ∪ {depot}`; zero for the empty set.
pub fn tsp_exact(metric: &Metric, set: ElementSet) -> Result<f64> {
    if set.len() > MAX_TSP_VERTICES {
        return Err(Error::SizeCap { what: "TSP subset", limit: MAX_TSP_VERTICES as u64, actual: set.len() as u64 });
    }
    if set.max_element().is_some_and(|m| m > metric.num_retailers()) {
        return Err(Error::Precondition(format!("subset {set} has vertices outside the metric")));
    }
    Ok(tour_length(metric, set))
}

/// Tour lengths for every subset of the retailers of one metric.
#[derive(Debug, Clone)]
pub struct TourTable {
    n: usize,
    lengths: Vec<f64>,
}

impl TourTable {
    /// Runs Held-Karp over all retailers; panics above [`MAX_TSP_VERTICES`].
    pub fn build(metric: &Metric) -> Self {
        let n = metric.num_retailers();
        assert!(n <= MAX_TSP_VERTICES, "tour table over {n} retailers");
        let vertices: Vec<usize> = (1..=n).collect();
        TourTable { n, lengths: held_karp(metric, &vertices) }
    }

    #[inline]
    pub fn length(&self, set: ElementSet) -> f64 {
        self.lengths[set.bits() as usize]
    }

    #[inline]
    pub fn num_retailers(&self) -> usize {
        self.n
    }

    pub fn into_lengths(self) -> Vec<f64> {
        self.lengths
    }
}

fn better(cand: (ElementSet, f64), best: Option<(ElementSet, f64)>) -> bool {
    match best {
        None => true,
        Some((set, len)) => cand.1 < len || (cand.1 == len && cand.0.lex_cmp(set) == Ordering::Less),
    }
}

/// Answers k-TSP queries for fixed multiplicities using a shared tour table.
///
/// Vertices with multiplicity zero never help reach a target and only lengthen
/// tours, so they are left out of the search.
pub struct KTspSolver {
    /// `best[k]`: shortest tour collecting at least `k` units.
    best: Vec<(ElementSet, f64)>,
}

impl KTspSolver {
    pub fn new(table: &TourTable, multiplicities: &[u64]) -> Self {
        let support: ElementSet = multiplicities
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(v, _)| v + 1)
            .collect();
        let total: u64 = multiplicities.iter().sum();
        let mut exact: Vec<Option<(ElementSet, f64)>> = vec![None; total as usize + 1];
        for set in support.subsets() {
            let units: u64 = set.iter().map(|v| multiplicities[v - 1]).sum();
            let cand = (set, table.length(set));
            if better(cand, exact[units as usize]) {
                exact[units as usize] = Some(cand);
            }
        }
        let mut best = Vec::with_capacity(exact.len());
        let mut running: Option<(ElementSet, f64)> = None;
        for slot in exact.into_iter().rev() {
            if let Some(cand) = slot {
                if better(cand, running) {
                    running = Some(cand);
                }
            }
            best.push(running.expect("full support reaches every target"));
        }
        best.reverse();
        KTspSolver { best }
    }

    /// Largest reachable target.
    pub fn max_target(&self) -> u64 {
        self.best.len() as u64 - 1
    }

    pub fn query(&self, k: u64) -> Option<(ElementSet, f64)> {
        self.best.get(k as usize).copied()
    }
}

/// Shortest depot tour collecting at least `k` units, where a vertex yields
/// its whole multiplicity the first time it is visited.
pub fn k_tsp_exact(metric: &Metric, multiplicities: &[u64], k: u64) -> Result<(ElementSet, f64)> {
    let n = metric.num_retailers();
    if multiplicities.len() != n {
        return Err(Error::Precondition(format!("{} multiplicities for {n} retailers", multiplicities.len())));
    }
    if n > MAX_TSP_VERTICES {
        return Err(Error::SizeCap { what: "k-TSP retailers", limit: MAX_TSP_VERTICES as u64, actual: n as u64 });
    }
    let total: u64 = multiplicities.iter().sum();
    if k > total {
        return Err(Error::Precondition(format!("target {k} exceeds total multiplicity {total}")));
    }
    let table = TourTable::build(metric);
    Ok(KTspSolver::new(&table, multiplicities).query(k).expect("k within range"))
}

/// Metric with non-negative rewards on the retailers.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioInstance {
    pub metric: Metric,
    pub rewards: Vec<f64>,
}

impl RatioInstance {
    pub fn new(metric: Metric, rewards: Vec<f64>) -> Result<Self> {
        if rewards.len() != metric.num_retailers() {
            return Err(Error::Precondition(format!(
                "{} rewards for {} retailers",
                rewards.len(),
                metric.num_retailers()
            )));
        }
        if rewards.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Precondition("rewards must be finite and non-negative".into()));
        }
        Ok(RatioInstance { metric, rewards })
    }

    fn check(&self) -> Result<()> {
        let n = self.metric.num_retailers();
        if n > MAX_RATIO_VERTICES {
            return Err(Error::SizeCap { what: "ratio-TSP retailers", limit: MAX_RATIO_VERTICES as u64, actual: n as u64 });
        }
        if self.rewards.iter().all(|&a| a <= 0.0) {
            return Err(Error::Precondition("all rewards are zero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSolution {
    pub subset: ElementSet,
    pub ratio: f64,
}

fn reward_of(rewards: &[f64], set: ElementSet) -> f64 {
    set.iter().map(|v| rewards[v - 1]).sum()
}

fn improves(cand: RatioSolution, best: Option<RatioSolution>) -> bool {
    match best {
        None => true,
        Some(b) => {
            let tie = RATIO_TIE * b.ratio.abs().max(1.0);
            cand.ratio < b.ratio - tie || ((cand.ratio - b.ratio).abs() <= tie && cand.subset.lex_cmp(b.subset) == Ordering::Less)
        }
    }
}

/// Global minimiser of `tour(S) / a(S)` by enumerating every subset.
pub fn min_ratio_exact(instance: &RatioInstance) -> Result<RatioSolution> {
    instance.check()?;
    let table = TourTable::build(&instance.metric);
    let mut best = None;
    for set in ElementSet::full(instance.metric.num_retailers()).subsets() {
        let reward = reward_of(&instance.rewards, set);
        if reward <= 0.0 {
            continue;
        }
        let cand = RatioSolution { subset: set, ratio: table.length(set) / reward };
        if improves(cand, best) {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| Error::Internal("no subset with positive reward".into()))
}

/// Largest integer `q` with `q * unit <= reward`.
fn scaled_units(reward: f64, unit: f64) -> u64 {
    let mut q = libm::floor(reward / unit).max(0.0) as u64;
    // relative slack so that e.g. 9 · (a/9) still fits in a
    let cap = reward * (1.0 + 1e-12);
    while (q + 1) as f64 * unit <= cap {
        q += 1;
    }
    while q > 0 && q as f64 * unit > cap {
        q -= 1;
    }
    q
}

/// Scaling wrapper around k-TSP: guess the largest-reward vertex `u` of an
/// optimal set, drop vertices with larger rewards, round rewards down to
/// multiples of `a_u / n²`, and try every target `k ≤ n³`.
pub fn min_ratio_garg(instance: &RatioInstance) -> Result<RatioSolution> {
    instance.check()?;
    let table = TourTable::build(&instance.metric);
    garg_with_table(&table, &instance.rewards).ok_or_else(|| Error::Internal("no candidate tour".into()))
}

pub(crate) fn garg_with_table(table: &TourTable, rewards: &[f64]) -> Option<RatioSolution> {
    let n = table.num_retailers();
    let n2 = (n * n) as f64;
    let k_cap = (n * n * n) as u64;
    let mut best: Option<RatioSolution> = None;
    for u in 1..=n {
        let a_u = rewards[u - 1];
        if a_u <= 0.0 {
            continue;
        }
        let unit = a_u / n2;
        let multiplicities: Vec<u64> = rewards
            .iter()
            .map(|&a_v| if a_v > a_u { 0 } else { scaled_units(a_v, unit) })
            .collect();
        let solver = KTspSolver::new(table, &multiplicities);
        for k in 1..=solver.max_target().min(k_cap) {
            let (set, len) = solver.query(k).expect("k within range");
            let reward = reward_of(rewards, set);
            if reward <= 0.0 {
                continue;
            }
            // strict improvement keeps the smallest (u, k) on ties
            let cand = RatioSolution { subset: set, ratio: len / reward };
            if best.is_none_or(|b| cand.ratio < b.ratio - RATIO_TIE * b.ratio.abs().max(1.0)) {
                best = Some(cand);
            }
        }
    }
    best
}

/// `min_{S ≠ ∅} tour(S) − a(S)` by Held-Karp restricted to retailers with
/// positive reward (a zero-reward vertex can only lengthen a tour).
pub fn prize_collecting_min(metric: &Metric, rewards: &[f64]) -> Result<Option<(ElementSet, f64)>> {
    let support: Vec<usize> = (1..=metric.num_retailers()).filter(|&v| rewards[v - 1] > 0.0).collect();
    if support.is_empty() {
        return Ok(None);
    }
    if support.len() > MAX_TSP_VERTICES {
        return Err(Error::SizeCap { what: "positive-reward retailers", limit: MAX_TSP_VERTICES as u64, actual: support.len() as u64 });
    }
    let tours = held_karp(metric, &support);
    let mut best: Option<(ElementSet, f64)> = None;
    for (local, &len) in tours.iter().enumerate().skip(1) {
        let mut set = ElementSet::EMPTY;
        let mut reward = 0.0;
        for (j, &v) in support.iter().enumerate() {
            if local & (1 << j) != 0 {
                set.insert(v);
                reward += rewards[v - 1];
            }
        }
        let value = len - reward;
        let replace = match best {
            None => true,
            Some((b, bv)) => value < bv - RATIO_TIE || (value <= bv + RATIO_TIE && set.lex_cmp(b) == Ordering::Less),
        };
        if replace {
            best = Some((set, value));
        }
    }
    Ok(best)
}
