//! JSON round trips and generator output checks.

use proptest::collection::vec;
use proptest::prelude::*;

use replenish::format::{instance_to_string, parse_instance, LpJson};
use replenish::generate::{generate_instance, GenFamily, GenSpec};
use replenish_core::setfn::{LaminarCost, Metric, TreeCost};
use replenish_core::{solve_lp, Demand, ElementSet, HoldingModel, Instance, LpOptions, OrderingCost};

/// Positive finite doubles across many binades, including awkward mantissas.
fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![
        (1u64..(1 << 52), -20i32..20).prop_map(|(m, e)| (1.0 + m as f64 / (1u64 << 52) as f64) * 2f64.powi(e)),
        0.001..1000.0f64,
        (1u32..400).prop_map(|k| k as f64 / 4.0),
    ]
}

fn metric(size: usize) -> impl Strategy<Value = Metric> {
    vec((positive(), positive()), size).prop_map(|pts| {
        let mut rows = vec![vec![0.0; pts.len()]; pts.len()];
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let d = (pts[a].0 - pts[b].0).hypot(pts[a].1 - pts[b].1);
                rows[a][b] = d;
                rows[b][a] = d;
            }
        }
        rows
    })
    .prop_filter_map("triangle inequality lost to rounding", |rows| Metric::new(rows).ok())
}

fn ordering(n: usize) -> BoxedStrategy<OrderingCost> {
    prop_oneof![
        (positive(), vec(positive(), n)).prop_map(|(k0, k)| OrderingCost::additive(k0, k).unwrap()),
        vec(positive(), n).prop_map(|inc| {
            // concave: sorted decreasing increments
            let mut inc = inc;
            inc.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let mut g = vec![0.0];
            for v in inc {
                g.push(g.last().unwrap() + v);
            }
            OrderingCost::cardinality(g).unwrap()
        }),
        vec(positive(), n + 1).prop_map(move |w| {
            // a star: every element is a leaf under the root
            let parent = vec![0; n + 1];
            let mut weight = w;
            weight[0] = 0.0;
            OrderingCost::tree(TreeCost::new(parent, weight, (1..=n).collect()).unwrap()).unwrap()
        }),
        vec(positive(), n).prop_map(move |w| {
            let sets = (1..=n).map(ElementSet::singleton).collect();
            OrderingCost::laminar(LaminarCost::new(n, sets, w).unwrap(), n).unwrap()
        }),
        vec(positive(), 1 << n).prop_map(|mut values| {
            values[0] = 0.0;
            OrderingCost::table(values).unwrap()
        }),
        metric(n + 1).prop_map(|m| OrderingCost::metric_tsp(m).unwrap()),
    ]
    .boxed()
}

fn holding(n: usize, t: usize) -> BoxedStrategy<HoldingModel> {
    prop_oneof![
        (1.0..3.0f64, vec(vec(positive(), t), n))
            .prop_map(|(alpha, base_rates)| HoldingModel::Polynomial { alpha, base_rates }),
        vec(vec(positive(), t), n).prop_map(move |r| HoldingModel::Table {
            rates: r
                .iter()
                .map(|by_t| (1..=t).map(|p| (1..=p).map(|s| by_t[p - 1] * (p - s) as f64).collect()).collect())
                .collect(),
        }),
        (0..5usize).prop_map(|lifetime| HoldingModel::Perishable { lifetime }),
    ]
    .boxed()
}

fn instance() -> impl Strategy<Value = Instance> {
    (1..=4usize, 1..=5usize).prop_flat_map(|(n, t)| {
        (vec(proptest::option::of(positive()), n * t), ordering(n), holding(n, t)).prop_map(move |(q, o, h)| {
            let demands = q
                .iter()
                .enumerate()
                .filter_map(|(k, v)| v.map(|quantity| Demand { element: k / t + 1, period: k % t + 1, quantity }))
                .collect();
            Instance::new(n, t, demands, h, o).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn instance_round_trip_is_bit_exact(inst in instance()) {
        let text = instance_to_string(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        for (a, b) in back.demands().iter().zip(inst.demands()) {
            prop_assert_eq!(a.quantity.to_bits(), b.quantity.to_bits());
        }
        let all = |i: &Instance| i.ordering().tabulate().unwrap().into_iter().map(f64::to_bits).collect::<Vec<_>>();
        prop_assert_eq!(all(&back), all(&inst));
        prop_assert_eq!(instance_to_string(&back), text);
    }

    #[test]
    fn lp_round_trip_preserves_values(inst in instance()) {
        prop_assume!(inst.demands().len() <= 12);
        let lp = solve_lp(&inst, &LpOptions::default()).unwrap();
        let json = serde_json::to_string(&LpJson::from_solution(&lp, Some("exact"))).unwrap();
        let back = serde_json::from_str::<LpJson>(&json).unwrap().to_solution(&inst).unwrap();
        prop_assert_eq!(back.x.len(), lp.x.len());
        for (a, b) in back.x.iter().zip(&lp.x) {
            prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
        for (a, b) in back.y.iter().zip(&lp.y) {
            prop_assert_eq!((a.period, a.set, a.value.to_bits()), (b.period, b.set, b.value.to_bits()));
        }
        prop_assert!((back.objective - lp.objective).abs() <= 1e-9 * (1.0 + lp.objective.abs()));
    }
}

#[test]
fn random_metric_generator_satisfies_triangle_inequality() {
    for family in [GenFamily::IrpRandomMetric, GenFamily::IrpEuclidean] {
        for stream in 0..50 {
            let inst = generate_instance(&GenSpec::new(11, family, (1, 12), (1, 2)), stream).unwrap();
            let m = inst.ordering().metric().unwrap();
            let size = m.size();
            for a in 0..size {
                for b in 0..size {
                    assert_eq!(m.dist(a, b), m.dist(b, a));
                    for c in 0..size {
                        assert!(m.dist(a, c) <= m.dist(a, b) + m.dist(b, c) + 1e-9, "{family:?} #{stream}");
                    }
                }
            }
        }
    }
}

#[test]
fn generated_instances_survive_a_round_trip() {
    for family in GenFamily::ALL {
        let mut spec = GenSpec::new(5, family, (1, 6), (1, 8));
        for stream in 0..10 {
            spec.lifetime = (stream % 3 == 0).then_some(stream as usize % 4);
            let inst = generate_instance(&spec, stream).unwrap();
            assert_eq!(parse_instance(&instance_to_string(&inst)).unwrap(), inst);
        }
    }
}
