//! Seeded random instance generators.

use anyhow::{bail, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use replenish_core::model::{Demand, HoldingModel, Instance};
use replenish_core::setfn::{LaminarCost, Metric, OrderingCost, TreeCost};
use replenish_core::ElementSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenFamily {
    JrpAdditive,
    JrpTable,
    JrpCardinality,
    JrpTree,
    JrpLaminar,
    IrpEuclidean,
    IrpRandomMetric,
}

impl GenFamily {
    pub const ALL: [GenFamily; 7] = [
        GenFamily::JrpAdditive,
        GenFamily::JrpTable,
        GenFamily::JrpCardinality,
        GenFamily::JrpTree,
        GenFamily::JrpLaminar,
        GenFamily::IrpEuclidean,
        GenFamily::IrpRandomMetric,
    ];

    pub fn is_routing(self) -> bool {
        matches!(self, GenFamily::IrpEuclidean | GenFamily::IrpRandomMetric)
    }
}

fn default_density() -> f64 {
    0.3
}

fn default_alpha() -> f64 {
    1.0
}

fn default_rates() -> (f64, f64) {
    (0.1, 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub seed: u64,
    pub family: GenFamily,
    /// Inclusive range for the number of elements.
    pub n: (usize, usize),
    /// Inclusive range for the horizon.
    pub t: (usize, usize),
    /// Probability that a given `(i, t)` carries demand.
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Range of base holding rates.
    #[serde(default = "default_rates")]
    pub holding_rate: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<usize>,
}

impl GenSpec {
    pub fn new(seed: u64, family: GenFamily, n: (usize, usize), t: (usize, usize)) -> Self {
        GenSpec {
            seed,
            family,
            n,
            t,
            density: default_density(),
            alpha: default_alpha(),
            holding_rate: default_rates(),
            lifetime: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n.0 == 0 || self.n.0 > self.n.1 || self.t.0 == 0 || self.t.0 > self.t.1 {
            bail!("element and horizon ranges must be non-empty and start at 1 or more");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            bail!("density must lie in (0, 1]");
        }
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            bail!("alpha must be at least 1");
        }
        let (lo, hi) = self.holding_rate;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            bail!("holding rates must satisfy 0 < lo <= hi");
        }
        if self.family == GenFamily::JrpTable && self.n.1 > 12 {
            bail!("table family supports at most 12 elements");
        }
        if self.family.is_routing() && self.n.1 > 12 {
            bail!("routing families support at most 12 retailers");
        }
        Ok(())
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The instance with id `stream` of a spec; identical inputs give identical
/// instances. An empty demand draw is retried on the next stream block.
pub fn generate_instance(spec: &GenSpec, stream: u64) -> Result<Instance> {
    spec.validate()?;
    for attempt in 0u64.. {
        let mut rng = rng_for(spec.seed, stream.wrapping_add(attempt << 40));
        let n = rng.gen_range(spec.n.0..=spec.n.1);
        let horizon = rng.gen_range(spec.t.0..=spec.t.1);
        let mut demands = Vec::new();
        for element in 1..=n {
            for period in 1..=horizon {
                if spec.density >= 1.0 || rng.gen_bool(spec.density) {
                    let quantity = rng.gen_range(1..=20) as f64 / 4.0;
                    demands.push(Demand { element, period, quantity });
                }
            }
        }
        if demands.is_empty() {
            continue;
        }
        let holding = match spec.lifetime {
            Some(lifetime) => HoldingModel::Perishable { lifetime },
            None => {
                let (lo, hi) = spec.holding_rate;
                let base_rates =
                    (0..n).map(|_| (0..horizon).map(|_| round4(rng.gen_range(lo..=hi))).collect()).collect();
                HoldingModel::Polynomial { alpha: spec.alpha, base_rates }
            }
        };
        let ordering = ordering_cost(spec.family, n, &mut rng)?;
        return Ok(Instance::new(n, horizon, demands, holding, ordering)?);
    }
    unreachable!("attempt counter is unbounded")
}

/// Keeps generated numbers short in JSON.
fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

fn ordering_cost(family: GenFamily, n: usize, rng: &mut ChaCha8Rng) -> Result<OrderingCost> {
    let cost = match family {
        GenFamily::JrpAdditive => {
            let k0 = round4(rng.gen_range(1.0..20.0));
            OrderingCost::additive(k0, (0..n).map(|_| round4(rng.gen_range(0.5..5.0))).collect())?
        }
        GenFamily::JrpCardinality => {
            let (k0, scale) = (rng.gen_range(1.0..15.0), rng.gen_range(0.5..5.0));
            let mut g = vec![0.0];
            g.extend((1..=n).map(|k| k0 + scale * (k as f64).sqrt()));
            OrderingCost::cardinality(g)?
        }
        GenFamily::JrpTable => OrderingCost::table(coverage_table(n, rng))?,
        GenFamily::JrpTree => OrderingCost::tree(random_tree(n, rng)?)?,
        GenFamily::JrpLaminar => {
            let mut order: Vec<usize> = (1..=n).collect();
            order.shuffle(rng);
            let (mut sets, mut weights) = (Vec::new(), Vec::new());
            split_laminar(&order, rng, &mut sets, &mut weights);
            OrderingCost::laminar(LaminarCost::new(n, sets, weights)?, n)?
        }
        GenFamily::IrpEuclidean => {
            let points: Vec<(f64, f64)> =
                (0..=n).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
            let mut rows = vec![vec![0.0; n + 1]; n + 1];
            for a in 0..=n {
                for b in a + 1..=n {
                    let d = (points[a].0 - points[b].0).hypot(points[a].1 - points[b].1);
                    rows[a][b] = d;
                    rows[b][a] = d;
                }
            }
            OrderingCost::metric_tsp(Metric::new(rows)?)?
        }
        GenFamily::IrpRandomMetric => OrderingCost::metric_tsp(Metric::new(random_metric(n + 1, rng))?)?,
    };
    Ok(cost)
}

/// Fixed charge plus a weighted coverage function plus a capped additive
/// part; each piece is monotone submodular. Rounding the pieces rather than
/// the sums keeps the table submodular.
fn coverage_table(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k0 = round4(rng.gen_range(1.0..10.0));
    let groups: Vec<(ElementSet, f64)> = (0..n + 1)
        .map(|_| {
            let members: ElementSet = (1..=n).filter(|_| rng.gen_bool(0.4)).collect();
            (members, round4(rng.gen_range(0.5..4.0)))
        })
        .collect();
    let per: Vec<f64> = (0..n).map(|_| round4(rng.gen_range(0.5..3.0))).collect();
    let cap = round4(rng.gen_range(1.0..(n as f64 * 2.0).max(2.0)));
    (0..1u64 << n)
        .map(|mask| {
            let set = ElementSet::from_bits(mask);
            if set.is_empty() {
                return 0.0;
            }
            let coverage: f64 = groups.iter().filter(|(g, _)| !g.intersection(set).is_empty()).map(|(_, w)| w).sum();
            let additive: f64 = set.iter().map(|i| per[i - 1]).sum();
            k0 + coverage + additive.min(cap)
        })
        .collect()
}

fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Result<TreeCost> {
    let internal = 1 + n / 2;
    // vertex 0 is the root, 1..internal are internal vertices, then one leaf per element
    let mut parent = vec![0];
    let mut weight = vec![0.0];
    for v in 1..internal {
        parent.push(rng.gen_range(0..v));
        weight.push(round4(rng.gen_range(1.0..6.0)));
    }
    let mut leaf = Vec::with_capacity(n);
    for _ in 0..n {
        leaf.push(parent.len());
        parent.push(rng.gen_range(0..internal));
        weight.push(round4(rng.gen_range(0.5..3.0)));
    }
    Ok(TreeCost::new(parent, weight, leaf)?)
}

fn split_laminar(block: &[usize], rng: &mut ChaCha8Rng, sets: &mut Vec<ElementSet>, weights: &mut Vec<f64>) {
    sets.push(block.iter().copied().collect());
    weights.push(round4(rng.gen_range(0.5..5.0)));
    if block.len() >= 2 {
        let cut = rng.gen_range(1..block.len());
        let (left, right) = block.split_at(cut);
        split_laminar(left, rng, sets, weights);
        split_laminar(right, rng, sets, weights);
    }
}

/// Random symmetric weights closed under shortest paths.
fn random_metric(size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; size]; size];
    for a in 0..size {
        for b in a + 1..size {
            let w = round4(rng.gen_range(1.0..10.0));
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for k in 0..size {
        for a in 0..size {
            for b in 0..size {
                let via = d[a][k] + d[k][b];
                if via < d[a][b] {
                    d[a][b] = via;
                }
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::instance_to_string;

    #[test]
    fn same_seed_same_bytes() {
        for family in GenFamily::ALL {
            let spec = GenSpec::new(7, family, (2, 4), (3, 6));
            let a = instance_to_string(&generate_instance(&spec, 3).unwrap());
            let b = instance_to_string(&generate_instance(&spec, 3).unwrap());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn full_density_has_every_demand() {
        let mut spec = GenSpec::new(1, GenFamily::JrpAdditive, (3, 3), (4, 4));
        spec.density = 1.0;
        assert_eq!(generate_instance(&spec, 0).unwrap().demands().len(), 12);
    }

    #[test]
    fn random_metric_is_symmetric() {
        let mut rng = rng_for(5, 0);
        let d = random_metric(6, &mut rng);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(d[a][b], d[b][a]);
            }
        }
    }
}
