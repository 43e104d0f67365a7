//! Proptest strategies for small random instances.

#![allow(dead_code)]

use proptest::collection::vec;
use proptest::prelude::*;

use replenish_core::setfn::{Metric, TreeCost};
use replenish_core::{Demand, HoldingModel, Instance, OrderingCost};

pub fn euclidean_metric(points: &[(f64, f64)]) -> Metric {
    let size = points.len();
    let mut rows = vec![vec![0.0; size]; size];
    for a in 0..size {
        for b in a + 1..size {
            let d = (points[a].0 - points[b].0).hypot(points[a].1 - points[b].1);
            rows[a][b] = d;
            rows[b][a] = d;
        }
    }
    Metric::new(rows).unwrap()
}

/// Metric over depot plus `n` retailers.
pub fn metric_strategy(n: usize) -> impl Strategy<Value = Metric> {
    vec((0.0..10.0f64, 0.0..10.0f64), n + 1).prop_map(|p| euclidean_metric(&p))
}

pub fn ordering_strategy(n: usize) -> BoxedStrategy<OrderingCost> {
    let additive = (1.0..20.0f64, vec(0.0..5.0f64, n))
        .prop_map(|(k0, per)| OrderingCost::additive(k0, per).unwrap());
    let cardinality = (0.5..15.0f64, 0.1..5.0f64).prop_map(move |(k0, scale)| {
        let mut g = vec![0.0];
        g.extend((1..=n).map(|k| k0 + scale * (k as f64).sqrt()));
        OrderingCost::cardinality(g).unwrap()
    });
    let tree = (0.5..8.0f64, vec((any::<bool>(), 0.1..4.0f64), n)).prop_map(move |(trunk, leaves)| {
        // root 0, one internal vertex 1, leaves hang off either
        let mut parent = vec![0, 0];
        let mut weight = vec![0.0, trunk];
        let mut leaf = Vec::new();
        for (deep, w) in leaves {
            leaf.push(parent.len());
            parent.push(usize::from(deep));
            weight.push(w);
        }
        OrderingCost::tree(TreeCost::new(parent, weight, leaf).unwrap()).unwrap()
    });
    let tsp = metric_strategy(n).prop_map(|m| OrderingCost::metric_tsp(m).unwrap());
    prop_oneof![additive, cardinality, tree, tsp].boxed()
}

pub fn holding_strategy(n: usize, t: usize) -> BoxedStrategy<HoldingModel> {
    let polynomial = (prop_oneof![Just(1.0), Just(1.5), Just(2.0)], vec(vec(0.1..2.0f64, t), n))
        .prop_map(|(alpha, base_rates)| HoldingModel::Polynomial { alpha, base_rates });
    let perishable = (0..4usize).prop_map(|lifetime| HoldingModel::Perishable { lifetime });
    let table = vec(vec(0.0..3.0f64, t), n).prop_map(move |rates| {
        let rates = rates
            .into_iter()
            .map(|by_t| {
                (1..=t)
                    .map(|period| (1..=period).map(|s| by_t[period - 1] * (period - s) as f64).collect())
                    .collect()
            })
            .collect();
        HoldingModel::Table { rates }
    });
    prop_oneof![3 => polynomial, 1 => perishable, 1 => table].boxed()
}

/// Instances with `1..=max_n` elements and horizon `1..=max_t`; each `(i, t)`
/// carries demand with probability about one half.
pub fn instance_strategy(max_n: usize, max_t: usize) -> impl Strategy<Value = Instance> {
    instance_with(max_n, max_t, ordering_strategy)
}

/// Like [`instance_strategy`] with a metric TSP ordering cost.
pub fn routing_instance_strategy(max_n: usize, max_t: usize) -> impl Strategy<Value = Instance> {
    instance_with(max_n, max_t, |n| metric_strategy(n).prop_map(|m| OrderingCost::metric_tsp(m).unwrap()).boxed())
}

fn instance_with(
    max_n: usize,
    max_t: usize,
    ordering: fn(usize) -> BoxedStrategy<OrderingCost>,
) -> impl Strategy<Value = Instance> {
    (1..=max_n, 1..=max_t).prop_flat_map(move |(n, t)| {
        (vec(0..8u32, n * t), ordering(n), holding_strategy(n, t)).prop_map(move |(qty, ordering, holding)| {
            let demands = qty
                .iter()
                .enumerate()
                .filter(|(_, &q)| q >= 4)
                .map(|(k, &q)| Demand { element: k / t + 1, period: k % t + 1, quantity: (q - 3) as f64 * 0.5 })
                .collect();
            Instance::new(n, t, demands, holding, ordering).unwrap()
        })
    })
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
