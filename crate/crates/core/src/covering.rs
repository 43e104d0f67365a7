//! The covering LP over extended intervals and the ordering-cost audits that
//! compare rounded orders against it and against the LP.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::simplex::{LinearProgram, Sense, SimplexError, SimplexOptions, Tableau};
use crate::lp::{generate_columns, seed_columns, Column, LpSolution, Master, Pricer, PricingMode, YColumn, DEFAULT_MAX_COLUMNS};
use crate::model::{CostReport, HoldingModel, Instance};
use crate::rounding::{audit_holding, within, HoldingAudit, RoundingTrace, ShadowInterval};
use crate::setfn::{Family, OrderingCost};

/// Cover constraints may fall short of 1 by this much.
pub const COVER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringSolution {
    /// Columns with positive value, sorted by `(period, set)`.
    pub z: Vec<YColumn>,
    pub objective: f64,
    pub pricing: PricingMode,
    /// Approximation guarantee of `objective` relative to the optimum.
    pub gamma: f64,
}

impl CoveringSolution {
    /// `Σ_{S∋i} z_s^S` indexed `[i−1][s−1]`.
    pub fn mass(&self, instance: &Instance) -> Vec<Vec<f64>> {
        let mut mass = vec![vec![0.0; instance.horizon()]; instance.num_elements()];
        for c in &self.z {
            for i in c.set.iter() {
                mass[i - 1][c.period - 1] += c.value;
            }
        }
        mass
    }
}

/// Exact pricing whenever the family and size allow it, ratio pricing otherwise.
pub fn covering_pricing(cost: &OrderingCost) -> PricingMode {
    match cost.family() {
        Family::MetricTsp if cost.num_elements() <= crate::ratiotsp::MAX_TSP_VERTICES => PricingMode::ExactTspDp,
        Family::MetricTsp => PricingMode::GargApprox,
        _ => PricingMode::ExactEnumeration,
    }
}

struct CoveringMaster<'a> {
    instance: &'a Instance,
    tableau: Tableau,
    /// Per demand: `(element, s*, t, row)`.
    rows: Vec<(usize, usize, usize, usize)>,
    z_vars: Vec<usize>,
    duals: Vec<f64>,
}

impl<'a> CoveringMaster<'a> {
    fn new(instance: &'a Instance, intervals: &[ShadowInterval], columns: &[Column]) -> Self {
        let mut lp = LinearProgram::new();
        let z_vars: Vec<usize> = columns.iter().map(|c| lp.add_variable(instance.ordering().eval(c.set))).collect();
        let mut rows = Vec::with_capacity(intervals.len());
        for iv in intervals {
            let terms = columns
                .iter()
                .zip(&z_vars)
                .filter(|(c, _)| (iv.s_star..=iv.period).contains(&c.period) && c.set.contains(iv.element))
                .map(|(_, &v)| (v, 1.0))
                .collect();
            let row = lp.add_constraint(terms, Sense::Ge, 1.0);
            rows.push((iv.element, iv.s_star, iv.period, row));
        }
        CoveringMaster { instance, tableau: Tableau::new(&lp, SimplexOptions::default()), rows, z_vars, duals: Vec::new() }
    }
}

impl Master for CoveringMaster<'_> {
    fn optimize(&mut self) -> Result<()> {
        self.tableau.optimize().map_err(|e| match e {
            SimplexError::Infeasible => Error::Internal("covering master is infeasible".into()),
            other => Error::Lp(other),
        })?;
        self.duals = self.tableau.duals();
        Ok(())
    }

    fn objective(&self) -> f64 {
        self.tableau.objective()
    }

    fn dual_objective(&self) -> f64 {
        self.rows.iter().map(|&(_, _, _, r)| self.duals[r]).sum()
    }

    fn rewards(&self, period: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.instance.num_elements()];
        for &(element, s_star, t, row) in &self.rows {
            if (s_star..=t).contains(&period) {
                a[element - 1] += self.duals[row].max(0.0);
            }
        }
        a
    }

    fn add_column(&mut self, column: Column, cost: f64) {
        let terms: Vec<(usize, f64)> = self
            .rows
            .iter()
            .filter(|&&(element, s_star, t, _)| (s_star..=t).contains(&column.period) && column.set.contains(element))
            .map(|&(_, _, _, row)| (row, 1.0))
            .collect();
        let index = self.tableau.add_column(cost, &terms);
        self.z_vars.push(index);
    }
}

/// `min Σ f(S) z_s^S` s.t. every demand gets unit mass inside `[s*, t]`.
pub fn solve_covering_lp(instance: &Instance, intervals: &[ShadowInterval]) -> Result<CoveringSolution> {
    let mode = covering_pricing(instance.ordering());
    let pricer = Pricer::new(instance.ordering(), mode)?;
    if intervals.is_empty() {
        return Ok(CoveringSolution { z: Vec::new(), objective: 0.0, pricing: mode, gamma: pricer.gamma() });
    }
    for iv in intervals {
        if iv.s_star == 0 || iv.s_star > iv.period || iv.period > instance.horizon() || iv.element > instance.num_elements() {
            return Err(Error::Precondition(format!(
                "interval [{}, {}] of element {} is outside the instance",
                iv.s_star, iv.period, iv.element
            )));
        }
    }
    let mut columns = seed_columns(instance);
    let mut master = CoveringMaster::new(instance, intervals, &columns);
    generate_columns(&mut master, &pricer, instance.ordering(), instance.horizon(), &mut columns, DEFAULT_MAX_COLUMNS)?;
    let values = master.tableau.values();
    let mut z: Vec<YColumn> = columns
        .iter()
        .zip(&master.z_vars)
        .map(|(c, &v)| YColumn { period: c.period, set: c.set, value: values[v] })
        .filter(|c| c.value > 0.0)
        .collect();
    z.sort_by_key(|c| (c.period, c.set));
    let objective = z.iter().map(|c| c.value * instance.ordering().eval(c.set)).sum();
    Ok(CoveringSolution { z, objective, pricing: mode, gamma: pricer.gamma() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupCheck {
    pub group: usize,
    pub width: usize,
    /// `Σ_j f(A_m^j)`.
    pub order_cost: f64,
    /// `2β ×` covering objective.
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingAudit {
    pub beta: f64,
    pub k: usize,
    pub lp_ordering: f64,
    pub covering_objective: f64,
    /// `2y` satisfies every covering constraint.
    pub doubled_lp_feasible: bool,
    /// `y` alone satisfies every covering constraint (expected for
    /// perishable instances, whose intervals hold all LP mass).
    pub lp_feasible: bool,
    /// Smallest cover mass inside a demand's per-group serving window.
    pub min_window_mass: f64,
    pub window_mass_ok: bool,
    /// Covering objective against `2γ ×` LP ordering part.
    pub covering_bound: f64,
    pub covering_ok: bool,
    pub groups: Vec<GroupCheck>,
    /// Merged schedule ordering cost.
    pub total_ordering: f64,
    /// `Σ_m Σ_j f(A_m^j)`, an upper bound on `total_ordering`.
    pub grouped_ordering: f64,
    /// `4βk ×` LP ordering part.
    pub total_bound: f64,
    pub total_ok: bool,
    pub passed: bool,
}

impl OrderingAudit {
    pub fn covering_ratio(&self) -> f64 {
        safe_ratio(self.covering_objective, self.lp_ordering)
    }

    pub fn max_group_ratio(&self) -> f64 {
        self.groups.iter().map(|g| safe_ratio(g.order_cost, self.covering_objective)).fold(0.0, f64::max)
    }

    pub fn total_ratio(&self) -> f64 {
        safe_ratio(self.total_ordering, self.lp_ordering)
    }
}

fn safe_ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 1e-12 {
        lhs / rhs
    } else {
        0.0
    }
}

/// Checks the covering-LP chain linking LP ordering cost to rounded orders.
pub fn audit_ordering(
    instance: &Instance,
    lp: &LpSolution,
    covering: &CoveringSolution,
    trace: &RoundingTrace,
    beta: f64,
) -> Result<OrderingAudit> {
    let horizon = instance.horizon();
    let lp_mass = lp.order_mass(instance);
    let cover_mass = covering.mass(instance);
    let window_sum = |mass: &[Vec<f64>], element: usize, from: usize, to: usize| -> f64 {
        mass[element - 1][from - 1..to].iter().sum()
    };
    let mut doubled_lp_feasible = true;
    let mut lp_feasible = true;
    let mut min_window_mass = f64::INFINITY;
    for iv in &trace.intervals {
        let lp_inside = window_sum(&lp_mass, iv.element, iv.s_star, iv.period);
        doubled_lp_feasible &= 2.0 * lp_inside >= 1.0 - COVER_TOL;
        lp_feasible &= lp_inside >= 1.0 - COVER_TOL;
        let (from, to) = iv.serving_window(trace.width_of(iv.group), horizon);
        if from > iv.s_star || to < iv.period {
            return Err(Error::Internal(format!(
                "interval [{}, {}] of demand ({},{}) leaves its serving window [{from}, {to}]",
                iv.s_star, iv.period, iv.element, iv.period
            )));
        }
        min_window_mass = min_window_mass.min(window_sum(&cover_mass, iv.element, from, to));
    }
    if trace.intervals.is_empty() {
        min_window_mass = 0.0;
    }
    let window_mass_ok = trace.intervals.is_empty() || min_window_mass >= 1.0 - COVER_TOL;
    let lp_ordering = lp.ordering_part;
    let covering_bound = 2.0 * covering.gamma * lp_ordering;
    let covering_ok = within(covering.objective, covering_bound);
    let f = instance.ordering();
    let groups: Vec<GroupCheck> = trace
        .groups
        .iter()
        .map(|g| {
            let order_cost: f64 = g.orders.iter().map(|&(_, set)| f.eval(set)).sum();
            let bound = 2.0 * beta * covering.objective;
            GroupCheck { group: g.group, width: g.width, order_cost, bound, ok: within(order_cost, bound) }
        })
        .collect();
    let grouped_ordering: f64 = groups.iter().map(|g| g.order_cost).sum();
    let total_ordering: f64 =
        trace.schedule.orders.values().filter(|s| !s.is_empty()).map(|&s| f.eval(s)).sum();
    let k = trace.params.k;
    let total_bound = 4.0 * beta * k as f64 * lp_ordering;
    let total_ok = within(total_ordering, grouped_ordering) && within(total_ordering, total_bound);
    let passed = doubled_lp_feasible && window_mass_ok && covering_ok && total_ok && groups.iter().all(|g| g.ok);
    Ok(OrderingAudit {
        beta,
        k,
        lp_ordering,
        covering_objective: covering.objective,
        doubled_lp_feasible,
        lp_feasible,
        min_window_mass,
        window_mass_ok,
        covering_bound,
        covering_ok,
        groups,
        total_ordering,
        grouped_ordering,
        total_bound,
        total_ok,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndCheck {
    pub rounded_total: f64,
    pub lp_objective: f64,
    /// `max(2ρ^α, 4βk)`.
    pub factor: f64,
    /// False for tabulated holding costs.
    pub applicable: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub holding: HoldingAudit,
    pub ordering: OrderingAudit,
    pub covering: CoveringSolution,
    pub end_to_end: EndToEndCheck,
    pub all_passed: bool,
}

/// Every audit for one rounding run, including the covering LP solve.
pub fn audit_all(instance: &Instance, lp: &LpSolution, trace: &RoundingTrace, cost: &CostReport) -> Result<AuditReport> {
    let beta = instance.ordering().beta();
    let holding = audit_holding(instance, lp, trace)?;
    let covering = solve_covering_lp(instance, &trace.intervals)?;
    let ordering = audit_ordering(instance, lp, &covering, trace, beta)?;
    let applicable = !matches!(instance.holding(), HoldingModel::Table { .. });
    let factor = holding.factor.max(4.0 * beta * trace.params.k as f64);
    let ok = !applicable || within(cost.total, factor * lp.objective);
    let end_to_end = EndToEndCheck { rounded_total: cost.total, lp_objective: lp.objective, factor, applicable, ok };
    let all_passed = holding.passed && ordering.passed && end_to_end.ok;
    Ok(AuditReport { holding, ordering, covering, end_to_end, all_passed })
}
