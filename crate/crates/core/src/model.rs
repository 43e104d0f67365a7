//! Instances, holding-cost models, schedules and exact cost evaluation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::setfn::OrderingCost;
use crate::subset::ElementSet;

/// Demand of `quantity > 0` units of `element` due in `period`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demand {
    pub element: usize,
    pub period: usize,
    pub quantity: f64,
}

/// Per-unit holding cost `h^i_{st}` of serving period `t` from period `s`.
#[derive(Debug, Clone, PartialEq)]
pub enum HoldingModel {
    /// `h = (t − s)^α · base_rates[i−1][t−1]`.
    Polynomial { alpha: f64, base_rates: Vec<Vec<f64>> },
    /// `h = rates[i−1][t−1][s−1]`, nonincreasing in `s`.
    Table { rates: Vec<Vec<Vec<f64>>> },
    /// Zero inside `[t − lifetime, t]`, infinite before it.
    Perishable { lifetime: usize },
}

/// Holding cost of one demand; `Infinite` marks a forbidden serving period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HoldingCost {
    Finite(f64),
    Infinite,
}

impl HoldingCost {
    pub fn finite(self) -> Option<f64> {
        match self {
            HoldingCost::Finite(v) => Some(v),
            HoldingCost::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, HoldingCost::Infinite)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    num_elements: usize,
    horizon: usize,
    demands: Vec<Demand>,
    holding: HoldingModel,
    ordering: OrderingCost,
    index: BTreeMap<(usize, usize), usize>,
}

impl Instance {
    /// Validates and builds an instance; demands are stored sorted by
    /// `(element, period)`.
    pub fn new(
        num_elements: usize,
        horizon: usize,
        mut demands: Vec<Demand>,
        holding: HoldingModel,
        ordering: OrderingCost,
    ) -> Result<Self> {
        if num_elements == 0 || horizon == 0 {
            return Err(Error::InvalidInstance("need at least one element and one period".into()));
        }
        if ordering.num_elements() != num_elements {
            return Err(Error::InvalidInstance(format!(
                "ordering cost is over {} elements, instance has {num_elements}",
                ordering.num_elements()
            )));
        }
        for d in &demands {
            if !(1..=num_elements).contains(&d.element) || !(1..=horizon).contains(&d.period) {
                return Err(Error::InvalidInstance(format!("demand ({},{}) is out of range", d.element, d.period)));
            }
            if !d.quantity.is_finite() || d.quantity <= 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "demand ({},{}) has non-positive quantity {}",
                    d.element, d.period, d.quantity
                )));
            }
        }
        demands.sort_by_key(|d| (d.element, d.period));
        let mut index = BTreeMap::new();
        for (k, d) in demands.iter().enumerate() {
            if index.insert((d.element, d.period), k).is_some() {
                return Err(Error::InvalidInstance(format!("duplicate demand ({},{})", d.element, d.period)));
            }
        }
        validate_holding(&holding, num_elements, horizon)?;
        Ok(Instance { num_elements, horizon, demands, holding, ordering, index })
    }

    #[inline]
    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    #[inline]
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    pub fn demands(&self) -> &[Demand] {
        &self.demands
    }

    #[inline]
    pub fn holding(&self) -> &HoldingModel {
        &self.holding
    }

    #[inline]
    pub fn ordering(&self) -> &OrderingCost {
        &self.ordering
    }

    pub fn demand_index(&self, element: usize, period: usize) -> Option<usize> {
        self.index.get(&(element, period)).copied()
    }

    pub fn is_perishable(&self) -> bool {
        matches!(self.holding, HoldingModel::Perishable { .. })
    }

    /// Degree of the polynomial holding model; 1 for the other models.
    pub fn alpha(&self) -> f64 {
        match self.holding {
            HoldingModel::Polynomial { alpha, .. } => alpha,
            _ => 1.0,
        }
    }

    /// Periods that may serve a demand due at `period` with finite cost.
    pub fn serving_window(&self, period: usize) -> RangeInclusive<usize> {
        match self.holding {
            HoldingModel::Perishable { lifetime } => period.saturating_sub(lifetime).max(1)..=period,
            _ => 1..=period,
        }
    }

    /// `H^i_{st} = d_{it} · h^i_{st}` for demand number `k`, with `s ≤ t` assumed.
    pub(crate) fn holding_cost(&self, k: usize, s: usize) -> HoldingCost {
        let d = self.demands[k];
        let t = d.period;
        debug_assert!(s >= 1 && s <= t);
        match &self.holding {
            HoldingModel::Polynomial { alpha, base_rates } => {
                let lag = (t - s) as f64;
                let per_unit = if t == s { 0.0 } else { libm::pow(lag, *alpha) * base_rates[d.element - 1][t - 1] };
                HoldingCost::Finite(d.quantity * per_unit)
            }
            HoldingModel::Table { rates } => HoldingCost::Finite(d.quantity * rates[d.element - 1][t - 1][s - 1]),
            HoldingModel::Perishable { lifetime } => {
                if s + lifetime >= t {
                    HoldingCost::Finite(0.0)
                } else {
                    HoldingCost::Infinite
                }
            }
        }
    }

    /// Finite holding cost of serving demand `k` at `s`; callers stay inside
    /// [`Instance::serving_window`].
    pub(crate) fn finite_holding(&self, k: usize, s: usize) -> f64 {
        self.holding_cost(k, s).finite().expect("serving period inside the lifetime window")
    }

    /// `H^i_{st}` for the demand `(element, period)` served at `from`.
    pub fn evaluate_holding(&self, element: usize, from: usize, period: usize) -> Result<HoldingCost> {
        if from == 0 || from > period {
            return Err(Error::Precondition(format!("serving period {from} is not in 1..={period}")));
        }
        let k = self
            .demand_index(element, period)
            .ok_or_else(|| Error::Precondition(format!("({element},{period}) is not a demand point")))?;
        Ok(self.holding_cost(k, from))
    }
}

fn validate_holding(holding: &HoldingModel, n: usize, horizon: usize) -> Result<()> {
    match holding {
        HoldingModel::Polynomial { alpha, base_rates } => {
            if !alpha.is_finite() || *alpha < 1.0 {
                return Err(Error::InvalidInstance(format!("holding degree {alpha} must be at least 1")));
            }
            if base_rates.len() != n || base_rates.iter().any(|r| r.len() != horizon) {
                return Err(Error::InvalidInstance(format!("base rates must be a {n} x {horizon} table")));
            }
            if base_rates.iter().flatten().any(|h| !h.is_finite() || *h <= 0.0) {
                return Err(Error::InvalidInstance("base holding rates must be finite and positive".into()));
            }
        }
        HoldingModel::Table { rates } => {
            if rates.len() != n || rates.iter().any(|by_t| by_t.len() != horizon) {
                return Err(Error::InvalidInstance(format!("holding table must have {n} x {horizon} rows")));
            }
            for (i, by_t) in rates.iter().enumerate() {
                for (t, by_s) in by_t.iter().enumerate() {
                    if by_s.len() != t + 1 {
                        return Err(Error::InvalidInstance(format!(
                            "holding table for ({},{}) needs {} entries",
                            i + 1,
                            t + 1,
                            t + 1
                        )));
                    }
                    if by_s.iter().any(|h| !h.is_finite() || *h < 0.0) {
                        return Err(Error::InvalidInstance("holding table entries must be finite and non-negative".into()));
                    }
                    if by_s.windows(2).any(|w| w[1] > w[0]) {
                        return Err(Error::InvalidInstance(format!(
                            "holding cost for ({},{}) increases with the serving period",
                            i + 1,
                            t + 1
                        )));
                    }
                }
            }
        }
        HoldingModel::Perishable { .. } => {}
    }
    Ok(())
}

/// Integral solution: one joint order per period and a serving period per demand.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    pub orders: BTreeMap<usize, ElementSet>,
    pub assignment: BTreeMap<(usize, usize), usize>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `element` to the order at `period` and serves `(element, due)` there.
    pub fn serve(&mut self, element: usize, due: usize, period: usize) {
        self.orders.entry(period).or_default().insert(element);
        self.assignment.insert((element, due), period);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Unserved { element: usize, period: usize },
    ServedLate { element: usize, period: usize, served: usize },
    MissingElement { element: usize, period: usize, served: usize },
    OutsideLifetime { element: usize, period: usize, served: usize },
    NotADemand { element: usize, period: usize },
    InvalidOrder { period: usize, elements: ElementSet },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Unserved { element, period } => write!(f, "demand ({element},{period}) is not served"),
            Violation::ServedLate { element, period, served } => {
                write!(f, "demand ({element},{period}) is served later, at period {served}")
            }
            Violation::MissingElement { element, served, .. } => {
                write!(f, "no order at period {served} contains element {element}")
            }
            Violation::OutsideLifetime { element, period, served } => {
                write!(f, "demand ({element},{period}) is served at {served}, before its lifetime window")
            }
            Violation::NotADemand { element, period } => write!(f, "({element},{period}) is not a demand point"),
            Violation::InvalidOrder { period, elements } => {
                write!(f, "order {elements} at period {period} is outside the instance")
            }
        }
    }
}

/// Every constraint violation of `schedule`; empty iff feasible.
pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> Vec<Violation> {
    let mut out = Vec::new();
    let universe = ElementSet::full(instance.num_elements());
    for (&period, &elements) in &schedule.orders {
        if period == 0 || period > instance.horizon() || !elements.is_subset(universe) {
            out.push(Violation::InvalidOrder { period, elements });
        }
    }
    for &(element, period) in schedule.assignment.keys() {
        if instance.demand_index(element, period).is_none() {
            out.push(Violation::NotADemand { element, period });
        }
    }
    for (k, d) in instance.demands().iter().enumerate() {
        let (element, period) = (d.element, d.period);
        let Some(&served) = schedule.assignment.get(&(element, period)) else {
            out.push(Violation::Unserved { element, period });
            continue;
        };
        if served == 0 || served > period {
            out.push(Violation::ServedLate { element, period, served });
            continue;
        }
        if !schedule.orders.get(&served).is_some_and(|s| s.contains(element)) {
            out.push(Violation::MissingElement { element, period, served });
        }
        if instance.holding_cost(k, served).is_infinite() {
            out.push(Violation::OutsideLifetime { element, period, served });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub ordering_cost: f64,
    pub holding_cost: f64,
    pub total: f64,
    /// `(period, f(S_period))` for every non-empty order.
    pub per_period: Vec<(usize, f64)>,
    /// `((element, period), H)` for every demand.
    pub per_demand: Vec<((usize, usize), f64)>,
}

/// Ordering plus holding cost of a feasible schedule.
pub fn evaluate_schedule_cost(instance: &Instance, schedule: &Schedule) -> Result<CostReport> {
    let violations = validate_schedule(instance, schedule);
    if !violations.is_empty() {
        return Err(Error::Infeasible(violations));
    }
    let per_period: Vec<(usize, f64)> = schedule
        .orders
        .iter()
        .filter(|(_, s)| !s.is_empty())
        .map(|(&p, &s)| (p, instance.ordering().eval(s)))
        .collect();
    let per_demand: Vec<((usize, usize), f64)> = instance
        .demands()
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let served = schedule.assignment[&(d.element, d.period)];
            ((d.element, d.period), instance.finite_holding(k, served))
        })
        .collect();
    let ordering_cost: f64 = per_period.iter().map(|(_, c)| c).sum();
    let holding_cost: f64 = per_demand.iter().map(|(_, c)| c).sum();
    Ok(CostReport { ordering_cost, holding_cost, total: ordering_cost + holding_cost, per_period, per_demand })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// N=2, T=3, d_{1,2}=1, d_{2,3}=2; K0=5, k≡1; α=1, h̄≡1.
    fn instance_a() -> Instance {
        Instance::new(
            2,
            3,
            vec![
                Demand { element: 1, period: 2, quantity: 1.0 },
                Demand { element: 2, period: 3, quantity: 2.0 },
            ],
            HoldingModel::Polynomial { alpha: 1.0, base_rates: vec![vec![1.0; 3]; 2] },
            OrderingCost::additive(5.0, vec![1.0, 1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn holding_examples() {
        let inst = Instance::new(
            1,
            3,
            vec![Demand { element: 1, period: 3, quantity: 2.0 }],
            HoldingModel::Polynomial { alpha: 1.0, base_rates: vec![vec![1.0; 3]] },
            OrderingCost::additive(1.0, vec![0.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(inst.evaluate_holding(1, 2, 3).unwrap(), HoldingCost::Finite(2.0));
        assert_eq!(inst.evaluate_holding(1, 3, 3).unwrap(), HoldingCost::Finite(0.0));
        assert!(inst.evaluate_holding(1, 4, 3).is_err());
        assert!(inst.evaluate_holding(1, 1, 2).is_err());

        let per = Instance::new(
            1,
            3,
            vec![Demand { element: 1, period: 3, quantity: 1.0 }],
            HoldingModel::Perishable { lifetime: 1 },
            OrderingCost::additive(1.0, vec![0.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(per.evaluate_holding(1, 1, 3).unwrap(), HoldingCost::Infinite);
        assert_eq!(per.evaluate_holding(1, 2, 3).unwrap(), HoldingCost::Finite(0.0));
        assert_eq!(per.evaluate_holding(1, 3, 3).unwrap(), HoldingCost::Finite(0.0));
    }

    #[test]
    fn rejects_bad_instances() {
        let f = || OrderingCost::additive(5.0, vec![1.0, 1.0]).unwrap();
        let poly = || HoldingModel::Polynomial { alpha: 1.0, base_rates: vec![vec![1.0; 3]; 2] };
        let dup = vec![Demand { element: 1, period: 2, quantity: 1.0 }; 2];
        assert!(Instance::new(2, 3, dup, poly(), f()).is_err());
        let zero = vec![Demand { element: 1, period: 2, quantity: 0.0 }];
        assert!(Instance::new(2, 3, zero, poly(), f()).is_err());
        let out = vec![Demand { element: 3, period: 2, quantity: 1.0 }];
        assert!(Instance::new(2, 3, out, poly(), f()).is_err());
        let increasing = HoldingModel::Table { rates: vec![vec![vec![0.0], vec![1.0, 2.0], vec![1.0, 1.0, 0.0]]; 2] };
        assert!(Instance::new(2, 3, Vec::new(), increasing, f()).is_err());
    }

    #[test]
    fn validate_examples() {
        let inst = instance_a();
        let mut s = Schedule::new();
        s.serve(1, 2, 2);
        s.serve(2, 3, 2);
        assert!(validate_schedule(&inst, &s).is_empty());

        s.assignment.insert((2, 3), 3);
        let v = validate_schedule(&inst, &s);
        assert_eq!(v, vec![Violation::MissingElement { element: 2, period: 3, served: 3 }]);
        assert_eq!(alloc::format!("{}", v[0]), "no order at period 3 contains element 2");

        let empty = Schedule::new();
        assert_eq!(validate_schedule(&inst, &empty).len(), 2);
    }

    #[test]
    fn cost_examples() {
        let inst = instance_a();
        let mut s = Schedule::new();
        s.serve(1, 2, 2);
        s.serve(2, 3, 2);
        let report = evaluate_schedule_cost(&inst, &s).unwrap();
        assert_eq!((report.ordering_cost, report.holding_cost, report.total), (7.0, 2.0, 9.0));

        let mut s = Schedule::new();
        s.serve(1, 2, 2);
        s.serve(2, 3, 3);
        assert_eq!(evaluate_schedule_cost(&inst, &s).unwrap().total, 12.0);

        let mut bad = Schedule::new();
        bad.serve(1, 2, 3);
        assert!(matches!(evaluate_schedule_cost(&inst, &bad), Err(Error::Infeasible(_))));
    }

    #[test]
    fn zero_demand_costs_nothing() {
        let inst = Instance::new(
            2,
            3,
            Vec::new(),
            HoldingModel::Polynomial { alpha: 1.0, base_rates: vec![vec![1.0; 3]; 2] },
            OrderingCost::additive(5.0, vec![1.0, 1.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(evaluate_schedule_cost(&inst, &Schedule::new()).unwrap().total, 0.0);
    }
}
