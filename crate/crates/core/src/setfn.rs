//! Ordering-cost set functions and brute-force property checks.
//!
//! Every cost is a monotone set function `f` over `{1, ..., N}` with
//! `f(∅) = 0`. All families except [`Family::MetricTsp`] are submodular; the
//! TSP family is only subadditive, which is what the fractional-cover checks
//! here quantify.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::simplex::{LinearProgram, Sense, SimplexOptions};
use crate::ratiotsp::{self, TourTable};
use crate::subset::{ElementSet, MAX_ELEMENTS};

/// Cost-comparison tolerance shared with the LP layer.
pub const COST_TOL: f64 = 1e-9;
/// Slack allowed when checking fractional subadditivity against an LP optimum.
pub const SUBADDITIVITY_TOL: f64 = 1e-6;

pub const MAX_TABLE_ELEMENTS: usize = 16;
pub const MAX_ENUMERATION_ELEMENTS: usize = 16;
pub const MAX_COVER_ELEMENTS: usize = 12;

/// Symmetric distances over `{depot = 0} ∪ {1, ..., N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    size: usize,
    dist: Vec<f64>,
}

impl Metric {
    /// Builds a metric from a full row-major matrix; vertex 0 is the depot.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size < 2 {
            return Err(Error::InvalidCost("metric needs a depot and at least one retailer".into()));
        }
        let mut dist = Vec::with_capacity(size * size);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidCost(format!("metric row {a} has {} entries, expected {size}", row.len())));
            }
            dist.extend_from_slice(row);
        }
        let metric = Metric { size, dist };
        metric.validate()?;
        Ok(metric)
    }

    fn validate(&self) -> Result<()> {
        let n = self.size;
        for a in 0..n {
            if self.dist(a, a) != 0.0 {
                return Err(Error::InvalidCost(format!("metric diagonal entry ({a},{a}) is not zero")));
            }
            for b in 0..n {
                let w = self.dist(a, b);
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidCost(format!("metric entry ({a},{b}) = {w} is not a finite non-negative distance")));
                }
                if w != self.dist(b, a) {
                    return Err(Error::InvalidCost(format!("metric is not symmetric at ({a},{b})")));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let direct = self.dist(a, c);
                    let detour = self.dist(a, b) + self.dist(b, c);
                    if direct > detour + COST_TOL * (1.0 + direct) {
                        return Err(Error::InvalidCost(format!(
                            "triangle inequality fails for ({a},{b},{c}): {direct} > {detour}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of vertices including the depot.
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn num_retailers(&self) -> usize {
        self.size - 1
    }

    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.size + b]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.size).map(|r| r.to_vec()).collect()
    }
}

/// Rooted tree whose root-to-vertex paths price a subset.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeCost {
    parent: Vec<usize>,
    weight: Vec<f64>,
    leaf: Vec<usize>,
}

impl TreeCost {
    /// `parent[v]` and `weight[v]` describe the edge from `v` to its parent;
    /// vertex 0 is the root. `leaf[i - 1]` is the tree vertex of element `i`.
    pub fn new(parent: Vec<usize>, weight: Vec<f64>, leaf: Vec<usize>) -> Result<Self> {
        let v = parent.len();
        if v == 0 || weight.len() != v {
            return Err(Error::InvalidCost("tree needs matching non-empty parent and weight arrays".into()));
        }
        for u in 1..v {
            if parent[u] >= v {
                return Err(Error::InvalidCost(format!("tree vertex {u} has out-of-range parent {}", parent[u])));
            }
            let mut cur = u;
            let mut steps = 0;
            while cur != 0 {
                cur = parent[cur];
                steps += 1;
                if steps > v {
                    return Err(Error::InvalidCost(format!("tree vertex {u} does not reach the root")));
                }
            }
        }
        if weight.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidCost("tree edge weights must be finite and non-negative".into()));
        }
        if let Some(bad) = leaf.iter().find(|&&l| l == 0 || l >= v) {
            return Err(Error::InvalidCost(format!("element mapped to invalid tree vertex {bad}")));
        }
        Ok(TreeCost { parent, weight, leaf })
    }

    pub fn parent(&self) -> &[usize] {
        &self.parent
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn leaf(&self) -> &[usize] {
        &self.leaf
    }

    fn eval(&self, set: ElementSet) -> f64 {
        let mut seen = vec![false; self.parent.len()];
        let mut total = 0.0;
        for e in set.iter() {
            let mut v = self.leaf[e - 1];
            while v != 0 && !seen[v] {
                seen[v] = true;
                total += self.weight[v];
                v = self.parent[v];
            }
        }
        total
    }
}

/// Weighted laminar family; a set pays for every member it intersects.
#[derive(Debug, Clone, PartialEq)]
pub struct LaminarCost {
    sets: Vec<ElementSet>,
    weights: Vec<f64>,
}

impl LaminarCost {
    pub fn new(n: usize, sets: Vec<ElementSet>, weights: Vec<f64>) -> Result<Self> {
        if sets.len() != weights.len() {
            return Err(Error::InvalidCost("laminar sets and weights differ in length".into()));
        }
        let universe = ElementSet::full(n);
        for (k, s) in sets.iter().enumerate() {
            if s.is_empty() || !s.is_subset(universe) {
                return Err(Error::InvalidCost(format!("laminar set {k} is empty or has elements outside 1..={n}")));
            }
            for t in &sets[..k] {
                let meet = s.intersection(*t);
                if !(meet.is_empty() || meet == *s || meet == *t) {
                    return Err(Error::InvalidCost(format!("sets {s} and {t} are neither disjoint nor nested")));
                }
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidCost("laminar weights must be finite and non-negative".into()));
        }
        Ok(LaminarCost { sets, weights })
    }

    pub fn sets(&self) -> &[ElementSet] {
        &self.sets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn eval(&self, set: ElementSet) -> f64 {
        self.sets
            .iter()
            .zip(&self.weights)
            .filter(|(s, _)| !s.intersection(set).is_empty())
            .map(|(_, w)| *w)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Additive,
    Cardinality,
    Tree,
    Laminar,
    Table,
    MetricTsp,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Additive => "additive",
            Family::Cardinality => "cardinality",
            Family::Tree => "tree",
            Family::Laminar => "laminar",
            Family::Table => "table",
            Family::MetricTsp => "metric_tsp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum CostKind {
    Additive { fixed: f64, per_element: Vec<f64> },
    Cardinality { by_size: Vec<f64> },
    Tree(TreeCost),
    Laminar(LaminarCost),
    Table { values: Vec<f64> },
    MetricTsp(Metric),
}

/// Joint ordering cost `f(S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCost {
    n: usize,
    kind: CostKind,
}

fn check_ground_set(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ELEMENTS {
        return Err(Error::InvalidCost(format!("ground set size {n} outside 1..={MAX_ELEMENTS}")));
    }
    Ok(())
}

impl OrderingCost {
    /// `f(S) = K0 + Σ_{i∈S} k_i` for non-empty `S`.
    pub fn additive(fixed: f64, per_element: Vec<f64>) -> Result<Self> {
        let n = per_element.len();
        check_ground_set(n)?;
        if !fixed.is_finite() || fixed < 0.0 || per_element.iter().any(|k| !k.is_finite() || *k < 0.0) {
            return Err(Error::InvalidCost("additive costs must be finite and non-negative".into()));
        }
        Ok(OrderingCost { n, kind: CostKind::Additive { fixed, per_element } })
    }

    /// `f(S) = g(|S|)` for a concave nondecreasing `g` with `g(0) = 0`.
    pub fn cardinality(by_size: Vec<f64>) -> Result<Self> {
        let n = by_size.len().saturating_sub(1);
        check_ground_set(n)?;
        if by_size[0] != 0.0 {
            return Err(Error::InvalidCost("cardinality table must start with g(0) = 0".into()));
        }
        if by_size.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidCost("cardinality table must be finite".into()));
        }
        for k in 1..=n {
            let step = by_size[k] - by_size[k - 1];
            if step < -COST_TOL {
                return Err(Error::InvalidCost(format!("cardinality table decreases at {k}")));
            }
            if k >= 2 && step > by_size[k - 1] - by_size[k - 2] + COST_TOL {
                return Err(Error::InvalidCost(format!("cardinality table is not concave at {k}")));
            }
        }
        Ok(OrderingCost { n, kind: CostKind::Cardinality { by_size } })
    }

    pub fn tree(tree: TreeCost) -> Result<Self> {
        let n = tree.leaf.len();
        check_ground_set(n)?;
        Ok(OrderingCost { n, kind: CostKind::Tree(tree) })
    }

    pub fn laminar(laminar: LaminarCost, n: usize) -> Result<Self> {
        check_ground_set(n)?;
        if laminar.sets.iter().any(|s| !s.is_subset(ElementSet::full(n))) {
            return Err(Error::InvalidCost("laminar set outside the ground set".into()));
        }
        Ok(OrderingCost { n, kind: CostKind::Laminar(laminar) })
    }

    /// Explicit value table indexed by bitmask (bit `i-1` for element `i`).
    /// Submodularity is not enforced here; use [`check_monotone_submodular`].
    pub fn table(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidCost(format!("table length {len} is not 2^N with N >= 1")));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_TABLE_ELEMENTS {
            return Err(Error::SizeCap { what: "table ground set", limit: MAX_TABLE_ELEMENTS as u64, actual: n as u64 });
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidCost("table must have f(empty) = 0".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidCost("table values must be finite and non-negative".into()));
        }
        Ok(OrderingCost { n, kind: CostKind::Table { values } })
    }

    /// TSP cost over the retailers of `metric`.
    pub fn metric_tsp(metric: Metric) -> Result<Self> {
        let n = metric.num_retailers();
        check_ground_set(n)?;
        if n > ratiotsp::MAX_TSP_VERTICES {
            return Err(Error::SizeCap { what: "TSP retailers", limit: ratiotsp::MAX_TSP_VERTICES as u64, actual: n as u64 });
        }
        Ok(OrderingCost { n, kind: CostKind::MetricTsp(metric) })
    }

    #[inline]
    pub fn num_elements(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> Family {
        match self.kind {
            CostKind::Additive { .. } => Family::Additive,
            CostKind::Cardinality { .. } => Family::Cardinality,
            CostKind::Tree(_) => Family::Tree,
            CostKind::Laminar(_) => Family::Laminar,
            CostKind::Table { .. } => Family::Table,
            CostKind::MetricTsp(_) => Family::MetricTsp,
        }
    }

    /// Fractional-subadditivity factor assumed by the rounding analysis:
    /// 1 for the submodular families, 1.5 for TSP.
    pub fn beta(&self) -> f64 {
        match self.family() {
            Family::MetricTsp => 1.5,
            _ => 1.0,
        }
    }

    pub fn metric(&self) -> Option<&Metric> {
        match &self.kind {
            CostKind::MetricTsp(m) => Some(m),
            _ => None,
        }
    }

    pub fn additive_params(&self) -> Option<(f64, &[f64])> {
        match &self.kind {
            CostKind::Additive { fixed, per_element } => Some((*fixed, per_element)),
            _ => None,
        }
    }

    pub fn cardinality_table(&self) -> Option<&[f64]> {
        match &self.kind {
            CostKind::Cardinality { by_size } => Some(by_size),
            _ => None,
        }
    }

    pub fn tree_params(&self) -> Option<&TreeCost> {
        match &self.kind {
            CostKind::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn laminar_params(&self) -> Option<&LaminarCost> {
        match &self.kind {
            CostKind::Laminar(l) => Some(l),
            _ => None,
        }
    }

    pub fn table_values(&self) -> Option<&[f64]> {
        match &self.kind {
            CostKind::Table { values } => Some(values),
            _ => None,
        }
    }

    /// `f(S)`. Elements outside the ground set are ignored.
    pub fn eval(&self, set: ElementSet) -> f64 {
        let set = set.intersection(ElementSet::full(self.n));
        if set.is_empty() {
            return 0.0;
        }
        match &self.kind {
            CostKind::Additive { fixed, per_element } => fixed + set.iter().map(|i| per_element[i - 1]).sum::<f64>(),
            CostKind::Cardinality { by_size } => by_size[set.len()],
            CostKind::Tree(t) => t.eval(set),
            CostKind::Laminar(l) => l.eval(set),
            CostKind::Table { values } => values[set.bits() as usize],
            CostKind::MetricTsp(m) => ratiotsp::tour_length(m, set),
        }
    }

    /// Values of `f` on all `2^N` subsets, indexed by bitmask.
    pub fn tabulate(&self) -> Result<Vec<f64>> {
        if self.n > MAX_ENUMERATION_ELEMENTS {
            return Err(Error::SizeCap {
                what: "subset enumeration ground set",
                limit: MAX_ENUMERATION_ELEMENTS as u64,
                actual: self.n as u64,
            });
        }
        match &self.kind {
            CostKind::Table { values } => Ok(values.clone()),
            CostKind::MetricTsp(m) => Ok(TourTable::build(m).into_lengths()),
            _ => Ok(ElementSet::full(self.n).subsets().map(|s| self.eval(s)).collect()),
        }
    }
}

/// Outcome of [`check_monotone_submodular`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubmodularityCheck {
    Holds,
    /// `f(∅) != 0`.
    NonzeroEmpty,
    /// `f(set ∪ {element}) < f(set)`.
    NotMonotone { set: ElementSet, element: usize },
    /// `f(larger ∪ {i}) − f(larger) > f(smaller ∪ {i}) − f(smaller)` with `smaller ⊆ larger`.
    NotSubmodular { smaller: ElementSet, larger: ElementSet, element: usize },
}

impl SubmodularityCheck {
    pub fn holds(&self) -> bool {
        matches!(self, SubmodularityCheck::Holds)
    }
}

/// Subsets of `{1..n}` ordered by popcount, then by bitmask.
fn by_popcount(n: usize) -> Vec<ElementSet> {
    let mut all: Vec<ElementSet> = ElementSet::full(n).subsets().collect();
    all.sort_by_key(|s| (s.len(), s.bits()));
    all
}

/// Brute-force monotonicity and submodularity check over all subsets.
///
/// Diminishing returns is checked on adjacent pairs `S ⊂ S ∪ {j}`, which is
/// equivalent to the full `S1 ⊆ S2` condition; any violation is reported as a
/// `(S, S ∪ {j}, i)` triple.
pub fn check_monotone_submodular(cost: &OrderingCost) -> Result<SubmodularityCheck> {
    let n = cost.num_elements();
    let values = cost.tabulate()?;
    let f = |s: ElementSet| values[s.bits() as usize];
    if f(ElementSet::EMPTY).abs() > COST_TOL {
        return Ok(SubmodularityCheck::NonzeroEmpty);
    }
    let order = by_popcount(n);
    for &set in &order {
        for i in 1..=n {
            if !set.contains(i) && f(set.with(i)) < f(set) - COST_TOL {
                return Ok(SubmodularityCheck::NotMonotone { set, element: i });
            }
        }
    }
    for &smaller in &order {
        for j in (1..=n).filter(|&j| !smaller.contains(j)) {
            let larger = smaller.with(j);
            for i in (1..=n).filter(|&i| !larger.contains(i)) {
                let gain_small = f(smaller.with(i)) - f(smaller);
                let gain_large = f(larger.with(i)) - f(larger);
                if gain_large > gain_small + COST_TOL {
                    return Ok(SubmodularityCheck::NotSubmodular { smaller, larger, element: i });
                }
            }
        }
    }
    Ok(SubmodularityCheck::Holds)
}

/// Optimal fractional cover of a set.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalCover {
    pub value: f64,
    pub weights: Vec<(ElementSet, f64)>,
}

/// `min Σ λ_A f(A)` s.t. `Σ_{A∋v} λ_A ≥ 1` for `v ∈ target`, `λ ≥ 0`.
pub fn min_fractional_cover(cost: &OrderingCost, target: ElementSet) -> Result<FractionalCover> {
    let n = cost.num_elements();
    if n > MAX_COVER_ELEMENTS {
        return Err(Error::SizeCap { what: "fractional cover ground set", limit: MAX_COVER_ELEMENTS as u64, actual: n as u64 });
    }
    if !target.is_subset(ElementSet::full(n)) {
        return Err(Error::Precondition(format!("cover target {target} is outside 1..={n}")));
    }
    let values = cost.tabulate()?;
    cover_from_table(&values, target)
}

/// Covers restricted to subsets of `target`: by monotonicity any cover using
/// `A` can swap it for `A ∩ target` at no extra cost.
fn cover_from_table(values: &[f64], target: ElementSet) -> Result<FractionalCover> {
    if target.is_empty() {
        return Ok(FractionalCover { value: 0.0, weights: Vec::new() });
    }
    let candidates: Vec<ElementSet> = target.subsets().filter(|s| !s.is_empty()).collect();
    let mut lp = LinearProgram::new();
    for a in &candidates {
        lp.add_variable(values[a.bits() as usize]);
    }
    for v in target.iter() {
        let terms: Vec<(usize, f64)> = candidates
            .iter()
            .enumerate()
            .filter(|(_, a)| a.contains(v))
            .map(|(k, _)| (k, 1.0))
            .collect();
        lp.add_constraint(terms, Sense::Ge, 1.0);
    }
    let sol = lp.solve(&SimplexOptions::default())?;
    let weights = candidates
        .iter()
        .zip(&sol.values)
        .filter(|(_, w)| **w > 1e-12)
        .map(|(a, w)| (*a, *w))
        .collect();
    Ok(FractionalCover { value: sol.objective, weights })
}

/// Checks `f(S) ≤ β · cover(S) + 1e-6` for every `S`; returns the first
/// violating set in popcount order.
pub fn check_beta_subadditive(cost: &OrderingCost, beta: f64) -> Result<Option<ElementSet>> {
    let n = cost.num_elements();
    if n > MAX_COVER_ELEMENTS {
        return Err(Error::SizeCap { what: "fractional cover ground set", limit: MAX_COVER_ELEMENTS as u64, actual: n as u64 });
    }
    let values = cost.tabulate()?;
    for set in by_popcount(n) {
        let cover = cover_from_table(&values, set)?;
        if values[set.bits() as usize] > beta * cover.value + SUBADDITIVITY_TOL {
            return Ok(Some(set));
        }
    }
    Ok(None)
}
