//! Properties of the ordering-cost functions and the tour oracles.

mod common;

use proptest::collection::vec;
use proptest::prelude::*;

use common::{metric_strategy, ordering_strategy};
use replenish_core::ratiotsp::{k_tsp_exact, min_ratio_exact, min_ratio_garg, prize_collecting_min, tsp_exact, RatioInstance};
use replenish_core::setfn::{check_beta_subadditive, check_monotone_submodular, min_fractional_cover, Family, SubmodularityCheck};
use replenish_core::ElementSet;

const TOL: f64 = 1e-9;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_family_is_monotone(cost in (1..=6usize).prop_flat_map(ordering_strategy)) {
        let n = cost.num_elements();
        for set in ElementSet::full(n).subsets() {
            for i in 1..=n {
                prop_assert!(cost.eval(set) <= cost.eval(set.with(i)) + TOL, "f({set}) > f({set} + {i})");
            }
        }
    }

    #[test]
    fn non_routing_families_are_submodular(cost in (1..=6usize).prop_flat_map(ordering_strategy)) {
        let check = check_monotone_submodular(&cost).unwrap();
        if cost.family() != Family::MetricTsp {
            prop_assert_eq!(check, SubmodularityCheck::Holds);
        }
    }

    #[test]
    fn tour_splice_bound(metric in (1..=7usize).prop_flat_map(metric_strategy)) {
        let n = metric.num_retailers();
        for set in ElementSet::full(n).subsets() {
            let f = tsp_exact(&metric, set).unwrap();
            for v in set.iter() {
                let spliced = tsp_exact(&metric, set.without(v)).unwrap() + 2.0 * metric.dist(0, v);
                prop_assert!(f <= spliced + TOL);
            }
        }
    }

    #[test]
    fn fractional_cover_never_exceeds_f(cost in (1..=5usize).prop_flat_map(ordering_strategy)) {
        let n = cost.num_elements();
        let beta = cost.beta();
        for set in ElementSet::full(n).subsets().filter(|s| !s.is_empty()) {
            let cover = min_fractional_cover(&cost, set).unwrap().value;
            let f = cost.eval(set);
            prop_assert!(cover <= f + 1e-6, "cover {cover} > f {f} for {set}");
            prop_assert!(f <= beta * cover + 1e-6, "f {f} > {beta} x cover {cover} for {set}");
        }
        prop_assert_eq!(check_beta_subadditive(&cost, beta).unwrap(), None);
    }

    #[test]
    fn k_tsp_is_nondecreasing_in_k(
        (metric, mult) in (1..=6usize).prop_flat_map(|n| (metric_strategy(n), vec(1..4u64, n)))
    ) {
        let total: u64 = mult.iter().sum();
        let mut last = 0.0;
        for k in 1..=total {
            let (set, len) = k_tsp_exact(&metric, &mult, k).unwrap();
            let covered: u64 = set.iter().map(|v| mult[v - 1]).sum();
            prop_assert!(covered >= k);
            prop_assert!((len - tsp_exact(&metric, set).unwrap()).abs() <= TOL);
            prop_assert!(len >= last - TOL);
            last = len;
        }
    }

    #[test]
    fn garg_ratio_within_three_of_exact(
        (metric, rewards) in (1..=7usize).prop_flat_map(|n| (metric_strategy(n), vec(0.1..5.0f64, n)))
    ) {
        let inst = RatioInstance::new(metric, rewards).unwrap();
        let exact = min_ratio_exact(&inst).unwrap();
        let garg = min_ratio_garg(&inst).unwrap();
        prop_assert!(garg.ratio >= exact.ratio - TOL);
        prop_assert!(garg.ratio <= 3.0 * exact.ratio + TOL);
    }

    #[test]
    fn prize_collecting_matches_enumeration(
        (metric, rewards) in (1..=6usize).prop_flat_map(|n| (metric_strategy(n), vec(0.0..15.0f64, n)))
    ) {
        let n = metric.num_retailers();
        let brute = ElementSet::full(n)
            .subsets()
            .filter(|s| !s.is_empty())
            .map(|s| tsp_exact(&metric, s).unwrap() - s.iter().map(|v| rewards[v - 1]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        match prize_collecting_min(&metric, &rewards).unwrap() {
            Some((_, value)) => prop_assert!((value - brute).abs() <= 1e-9 * (1.0 + brute.abs())),
            None => prop_assert!(rewards.iter().all(|&a| a <= 0.0)),
        }
    }
}

#[test]
fn tour_lengths_on_a_right_triangle() {
    let metric = common::euclidean_metric(&[(0.0, 0.0), (4.0, 0.0), (4.0, 3.0)]);
    let one = tsp_exact(&metric, ElementSet::singleton(2)).unwrap();
    let both = tsp_exact(&metric, ElementSet::full(2)).unwrap();
    assert!((one - 10.0).abs() < 1e-12);
    assert!((both - 12.0).abs() < 1e-12);
}
