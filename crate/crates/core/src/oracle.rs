//! Exact optimum of tiny instances by enumerating every demand assignment.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{evaluate_schedule_cost, Instance, Schedule};
use crate::setfn::MAX_TABLE_ELEMENTS;
use crate::subset::ElementSet;

/// Largest number of assignment vectors `exact_opt` will enumerate.
pub const MAX_ASSIGNMENTS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub value: f64,
    pub schedule: Schedule,
}

/// Number of assignment vectors, saturating at `u64::MAX`.
pub fn search_space(instance: &Instance) -> u64 {
    instance
        .demands()
        .iter()
        .map(|d| instance.serving_window(d.period).count() as u64)
        .fold(1u64, |acc, c| acc.saturating_mul(c))
}

struct Search<'a> {
    instance: &'a Instance,
    values: Option<Vec<f64>>,
    holding: Vec<Vec<(usize, f64)>>,
    orders: Vec<Vec<usize>>,
    current: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn order_cost(&self, set: ElementSet) -> f64 {
        match &self.values {
            Some(values) => values[set.bits() as usize],
            None => self.instance.ordering().eval(set),
        }
    }

    fn visit(&mut self, k: usize, holding: f64) {
        if k == self.holding.len() {
            let ordering: f64 = self
                .orders
                .iter()
                .filter(|members| !members.is_empty())
                .map(|members| {
                    let set: ElementSet = members.iter().map(|&d| self.instance.demands()[d].element).collect();
                    self.order_cost(set)
                })
                .sum();
            let total = ordering + holding;
            let better = match &self.best {
                None => true,
                Some((best, _)) => total < best - 1e-9 * (1.0 + best.abs()),
            };
            if better {
                self.best = Some((total, self.current.clone()));
            }
            return;
        }
        for idx in 0..self.holding[k].len() {
            let (s, h) = self.holding[k][idx];
            self.current.push(s);
            self.orders[s - 1].push(k);
            self.visit(k + 1, holding + h);
            self.orders[s - 1].pop();
            self.current.pop();
        }
    }
}

/// Minimum total cost over all assignments; the earliest optimal assignment
/// vector in lexicographic order (demands sorted by element, then period)
/// is returned.
pub fn exact_opt(instance: &Instance) -> Result<ExactResult> {
    let space = search_space(instance);
    if space > MAX_ASSIGNMENTS {
        return Err(Error::SizeCap { what: "assignment vectors", limit: MAX_ASSIGNMENTS, actual: space });
    }
    let values = if instance.num_elements() <= MAX_TABLE_ELEMENTS { Some(instance.ordering().tabulate()?) } else { None };
    let holding = instance
        .demands()
        .iter()
        .enumerate()
        .map(|(k, d)| instance.serving_window(d.period).map(|s| (s, instance.finite_holding(k, s))).collect())
        .collect();
    let mut search = Search {
        instance,
        values,
        holding,
        orders: vec![Vec::new(); instance.horizon()],
        current: Vec::with_capacity(instance.demands().len()),
        best: None,
    };
    search.visit(0, 0.0);
    let (_, assignment) = search.best.expect("at least one assignment exists");
    let mut schedule = Schedule::new();
    for (d, s) in instance.demands().iter().zip(assignment) {
        schedule.serve(d.element, d.period, s);
    }
    let value = evaluate_schedule_cost(instance, &schedule)?.total;
    Ok(ExactResult { value, schedule })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Demand, HoldingModel};
    use crate::setfn::OrderingCost;

    fn additive(n: usize, horizon: usize, demands: &[(usize, usize, f64)]) -> Instance {
        Instance::new(
            n,
            horizon,
            demands.iter().map(|&(element, period, quantity)| Demand { element, period, quantity }).collect(),
            HoldingModel::Polynomial { alpha: 1.0, base_rates: vec![vec![1.0; horizon]; n] },
            OrderingCost::additive(5.0, vec![1.0; n]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn instance_a_optimum_is_joint_order() {
        let inst = additive(2, 3, &[(1, 2, 1.0), (2, 3, 2.0)]);
        let r = exact_opt(&inst).unwrap();
        assert!((r.value - 9.0).abs() < 1e-12);
        assert_eq!(r.schedule.orders.get(&2), Some(&ElementSet::full(2)));
    }

    #[test]
    fn single_demand_and_empty() {
        let r = exact_opt(&additive(1, 2, &[(1, 2, 1.0)])).unwrap();
        assert!((r.value - 6.0).abs() < 1e-12);
        assert_eq!(r.schedule.assignment[&(1, 2)], 2);
        assert_eq!(exact_opt(&additive(2, 3, &[])).unwrap().value, 0.0);
    }

    #[test]
    fn search_space_cap() {
        let demands: Vec<(usize, usize, f64)> = (1..=10).map(|t| (1, t + 10, 1.0)).collect();
        let inst = additive(1, 20, &demands);
        assert!(matches!(exact_opt(&inst), Err(Error::SizeCap { .. })));
    }
}
