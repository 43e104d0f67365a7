//! The time-indexed LP relaxation: restricted-master column generation with
//! pluggable pricing, plus a fully enumerated LP used as a test oracle.

pub mod pricing;
pub mod simplex;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::setfn::OrderingCost;
use crate::subset::ElementSet;

pub use pricing::{Pricer, PricingMode, PRICING_TOL};
pub use simplex::{LinearProgram, Sense, SimplexError, SimplexOptions, SimplexSolution, Tableau};

/// Tolerance for the LP feasibility invariants.
pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_COLUMNS: usize = 10_000;
pub const MAX_FULL_ELEMENTS: usize = 10;
pub const MAX_FULL_HORIZON: usize = 12;

/// A joint-order column `y_s^S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Column {
    pub period: usize,
    pub set: ElementSet,
}

/// `x^i_{ts}`: share of demand `(element, period)` served at `serving`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XEntry {
    pub element: usize,
    pub period: usize,
    pub serving: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YColumn {
    pub period: usize,
    pub set: ElementSet,
    pub value: f64,
}

/// Restricted-master objective and dual bound after one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationLog {
    pub primal: f64,
    pub dual: f64,
    pub columns: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpStats {
    pub iterations: usize,
    pub columns: usize,
    pub pivots: usize,
    pub log: Vec<IterationLog>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Non-zero `x` entries sorted by `(element, period, serving)`.
    pub x: Vec<XEntry>,
    /// Columns with positive value, sorted by `(period, set)`.
    pub y: Vec<YColumn>,
    pub objective: f64,
    pub ordering_part: f64,
    pub holding_part: f64,
    /// Guarantee of the pricing oracle: the objective is at most `gamma`
    /// times the LP optimum.
    pub gamma: f64,
    pub stats: LpStats,
}

impl LpSolution {
    /// Builds a solution from raw values, recomputing the objective split.
    pub fn from_parts(instance: &Instance, mut x: Vec<XEntry>, mut y: Vec<YColumn>, gamma: f64) -> Result<Self> {
        x.retain(|e| e.value > 0.0);
        y.retain(|c| c.value > 0.0);
        x.sort_by_key(|e| (e.element, e.period, e.serving));
        y.sort_by_key(|c| (c.period, c.set));
        let mut holding_part = 0.0;
        for e in &x {
            let k = instance.demand_index(e.element, e.period).ok_or_else(|| {
                Error::Precondition(format!("x entry ({},{}) is not a demand point", e.element, e.period))
            })?;
            if !instance.serving_window(e.period).contains(&e.serving) {
                return Err(Error::Precondition(format!(
                    "x entry ({},{}) served at {} is outside its serving window",
                    e.element, e.period, e.serving
                )));
            }
            holding_part += e.value * instance.finite_holding(k, e.serving);
        }
        let ordering_part: f64 = y.iter().map(|c| c.value * instance.ordering().eval(c.set)).sum();
        Ok(LpSolution {
            x,
            y,
            objective: ordering_part + holding_part,
            ordering_part,
            holding_part,
            gamma,
            stats: LpStats::default(),
        })
    }

    /// Dense `x` rows per demand (in instance order), indexed by `serving − 1`.
    pub fn x_columns(&self, instance: &Instance) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = instance.demands().iter().map(|d| vec![0.0; d.period]).collect();
        for e in &self.x {
            if let Some(k) = instance.demand_index(e.element, e.period) {
                if (1..=e.period).contains(&e.serving) {
                    out[k][e.serving - 1] += e.value;
                }
            }
        }
        out
    }

    /// `Σ_{S∋i} y_s^S` indexed `[i−1][s−1]`.
    pub fn order_mass(&self, instance: &Instance) -> Vec<Vec<f64>> {
        let mut mass = vec![vec![0.0; instance.horizon()]; instance.num_elements()];
        for c in &self.y {
            for i in c.set.iter() {
                mass[i - 1][c.period - 1] += c.value;
            }
        }
        mass
    }

    /// Checks both constraint families and the objective split within `tol`.
    pub fn check_feasible(&self, instance: &Instance, tol: f64) -> Result<()> {
        for e in &self.x {
            if !(e.value >= -tol && e.value <= 1.0 + tol) {
                return Err(Error::Precondition(format!(
                    "x({},{},{}) = {} is outside [0,1]",
                    e.element, e.period, e.serving, e.value
                )));
            }
        }
        for c in &self.y {
            if c.period == 0 || c.period > instance.horizon() || !c.set.is_subset(ElementSet::full(instance.num_elements())) {
                return Err(Error::Precondition(format!("column ({}, {}) is outside the instance", c.period, c.set)));
            }
        }
        let columns = self.x_columns(instance);
        let mass = self.order_mass(instance);
        for (d, row) in instance.demands().iter().zip(&columns) {
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > tol {
                return Err(Error::Precondition(format!(
                    "x for demand ({},{}) sums to {total}",
                    d.element, d.period
                )));
            }
            for (s, &v) in row.iter().enumerate() {
                let cover = mass[d.element - 1][s];
                if v > cover + tol {
                    return Err(Error::Precondition(format!(
                        "x({},{},{}) = {v} exceeds order mass {cover}",
                        d.element,
                        d.period,
                        s + 1
                    )));
                }
            }
        }
        let recomputed = LpSolution::from_parts(instance, self.x.clone(), self.y.clone(), self.gamma)?;
        let scale = 1.0 + recomputed.objective.abs();
        if (recomputed.objective - self.objective).abs() > tol * scale
            || (recomputed.ordering_part - self.ordering_part).abs() > tol * scale
            || (recomputed.holding_part - self.holding_part).abs() > tol * scale
        {
            return Err(Error::Precondition(format!(
                "objective {} does not match recomputed {}",
                self.objective, recomputed.objective
            )));
        }
        Ok(())
    }
}

/// Multipliers of the restricted master: `b` per demand (equality rows) and
/// `b̄ ≥ 0` per demand and serving period (linking rows).
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    pub b: Vec<f64>,
    /// `b_bar[k][s−1]`, zero for periods outside the serving window.
    pub b_bar: Vec<Vec<f64>>,
}

impl DualVector {
    pub fn zeros(instance: &Instance) -> Self {
        DualVector {
            b: vec![0.0; instance.demands().len()],
            b_bar: instance.demands().iter().map(|d| vec![0.0; d.period]).collect(),
        }
    }

    /// `a_i = Σ_{t ≥ s} b̄^i_{st}` for every element.
    pub fn rewards(&self, instance: &Instance, period: usize) -> Vec<f64> {
        let mut a = vec![0.0; instance.num_elements()];
        for (d, row) in instance.demands().iter().zip(&self.b_bar) {
            if d.period >= period {
                a[d.element - 1] += row[period - 1];
            }
        }
        a
    }

    pub fn objective(&self) -> f64 {
        self.b.iter().sum()
    }
}

/// Most negative reduced-cost column at `period` for the given duals.
pub fn price_column(
    instance: &Instance,
    duals: &DualVector,
    period: usize,
    mode: PricingMode,
) -> Result<Option<(ElementSet, f64)>> {
    if period == 0 || period > instance.horizon() {
        return Err(Error::Precondition(format!("period {period} is outside 1..={}", instance.horizon())));
    }
    if duals.b_bar.iter().flatten().any(|&v| v < 0.0) {
        return Err(Error::Precondition("linking duals must be non-negative".into()));
    }
    let pricer = Pricer::new(instance.ordering(), mode)?;
    pricer.price(&duals.rewards(instance, period))
}

/// A restricted master problem driven by [`generate_columns`].
pub(crate) trait Master {
    fn optimize(&mut self) -> Result<()>;
    fn objective(&self) -> f64;
    fn dual_objective(&self) -> f64;
    fn rewards(&self, period: usize) -> Vec<f64>;
    fn add_column(&mut self, column: Column, cost: f64);
}

/// Alternates master solves and pricing over every period until no column
/// prices out. `columns` holds the seeds and receives the generated columns.
pub(crate) fn generate_columns<M: Master>(
    master: &mut M,
    pricer: &Pricer<'_>,
    cost: &OrderingCost,
    horizon: usize,
    columns: &mut Vec<Column>,
    max_columns: usize,
) -> Result<Vec<IterationLog>> {
    let mut present: BTreeSet<Column> = columns.iter().copied().collect();
    let mut log = Vec::new();
    loop {
        master.optimize()?;
        log.push(IterationLog { primal: master.objective(), dual: master.dual_objective(), columns: columns.len() });
        let mut added = 0;
        for period in 1..=horizon {
            let rewards = master.rewards(period);
            if let Some((set, _)) = pricer.price(&rewards)? {
                let column = Column { period, set };
                if present.insert(column) {
                    master.add_column(column, cost.eval(set));
                    columns.push(column);
                    added += 1;
                }
            }
        }
        if added == 0 {
            return Ok(log);
        }
        if columns.len() > max_columns {
            master.optimize()?;
            return Err(Error::ColumnLimit { limit: max_columns, best_objective: master.objective() });
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    pub pricing: PricingMode,
    pub max_columns: usize,
    pub simplex: SimplexOptions,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions { pricing: PricingMode::ExactEnumeration, max_columns: DEFAULT_MAX_COLUMNS, simplex: SimplexOptions::default() }
    }
}

impl LpOptions {
    pub fn with_pricing(pricing: PricingMode) -> Self {
        LpOptions { pricing, ..Self::default() }
    }
}

/// The LP restricted to a set of columns, kept as a live tableau.
struct LpMaster<'a> {
    instance: &'a Instance,
    tableau: Tableau,
    demand_rows: Vec<usize>,
    /// Per demand: `(serving period, x variable, linking row)`.
    links: Vec<Vec<(usize, usize, usize)>>,
    /// Per period: `(element, linking row)`.
    rows_at: Vec<Vec<(usize, usize)>>,
    y_vars: Vec<usize>,
    duals: Vec<f64>,
}

impl<'a> LpMaster<'a> {
    fn new(instance: &'a Instance, columns: &[Column], options: SimplexOptions) -> Self {
        let mut lp = LinearProgram::new();
        let mut links = Vec::with_capacity(instance.demands().len());
        for (k, d) in instance.demands().iter().enumerate() {
            let vars = instance
                .serving_window(d.period)
                .map(|s| (s, lp.add_variable(instance.finite_holding(k, s)), 0))
                .collect::<Vec<_>>();
            links.push(vars);
        }
        let y_vars: Vec<usize> =
            columns.iter().map(|c| lp.add_variable(instance.ordering().eval(c.set))).collect();
        let mut rows_at = vec![Vec::new(); instance.horizon()];
        let mut demand_rows = Vec::with_capacity(links.len());
        for (d, vars) in instance.demands().iter().zip(links.iter_mut()) {
            demand_rows.push(lp.add_constraint(vars.iter().map(|&(_, v, _)| (v, 1.0)).collect(), Sense::Eq, 1.0));
            for entry in vars.iter_mut() {
                let (s, v, _) = *entry;
                let mut terms = vec![(v, 1.0)];
                for (c, &y) in columns.iter().zip(&y_vars) {
                    if c.period == s && c.set.contains(d.element) {
                        terms.push((y, -1.0));
                    }
                }
                let row = lp.add_constraint(terms, Sense::Le, 0.0);
                entry.2 = row;
                rows_at[s - 1].push((d.element, row));
            }
        }
        LpMaster {
            instance,
            tableau: Tableau::new(&lp, options),
            demand_rows,
            links,
            rows_at,
            y_vars,
            duals: Vec::new(),
        }
    }

    fn dual_vector(&self) -> DualVector {
        let mut duals = DualVector::zeros(self.instance);
        for (k, links) in self.links.iter().enumerate() {
            duals.b[k] = self.duals[self.demand_rows[k]];
            for &(s, _, row) in links {
                duals.b_bar[k][s - 1] = (-self.duals[row]).max(0.0);
            }
        }
        duals
    }

    fn x_entries(&self, values: &[f64]) -> Vec<XEntry> {
        let mut x = Vec::new();
        for (d, links) in self.instance.demands().iter().zip(&self.links) {
            for &(s, v, _) in links {
                x.push(XEntry { element: d.element, period: d.period, serving: s, value: values[v] });
            }
        }
        x
    }
}

impl Master for LpMaster<'_> {
    fn optimize(&mut self) -> Result<()> {
        self.tableau.optimize().map_err(|e| match e {
            SimplexError::Infeasible => Error::Internal("restricted master is infeasible".into()),
            other => Error::Lp(other),
        })?;
        self.duals = self.tableau.duals();
        Ok(())
    }

    fn objective(&self) -> f64 {
        self.tableau.objective()
    }

    fn dual_objective(&self) -> f64 {
        self.demand_rows.iter().map(|&r| self.duals[r]).sum()
    }

    fn rewards(&self, period: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.instance.num_elements()];
        for &(element, row) in &self.rows_at[period - 1] {
            a[element - 1] += (-self.duals[row]).max(0.0);
        }
        a
    }

    fn add_column(&mut self, column: Column, cost: f64) {
        let terms: Vec<(usize, f64)> = self.rows_at[column.period - 1]
            .iter()
            .filter(|(element, _)| column.set.contains(*element))
            .map(|&(_, row)| (row, -1.0))
            .collect();
        let index = self.tableau.add_column(cost, &terms);
        self.y_vars.push(index);
    }
}

fn check_covered(instance: &Instance, columns: &[Column]) -> Result<()> {
    for d in instance.demands() {
        let window = instance.serving_window(d.period);
        if !columns.iter().any(|c| window.contains(&c.period) && c.set.contains(d.element)) {
            return Err(Error::Precondition(format!(
                "no column can serve demand ({},{})",
                d.element, d.period
            )));
        }
    }
    Ok(())
}

/// Primal values, duals and objective of the LP restricted to `columns`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedMasterSolution {
    pub x: Vec<XEntry>,
    /// One value per input column, in input order.
    pub y: Vec<f64>,
    pub duals: DualVector,
    pub objective: f64,
}

pub fn solve_restricted_master(instance: &Instance, columns: &[Column]) -> Result<RestrictedMasterSolution> {
    check_covered(instance, columns)?;
    let mut master = LpMaster::new(instance, columns, SimplexOptions::default());
    master.optimize()?;
    let values = master.tableau.values();
    Ok(RestrictedMasterSolution {
        x: master.x_entries(&values),
        y: master.y_vars.iter().map(|&v| values[v]).collect(),
        duals: master.dual_vector(),
        objective: master.objective(),
    })
}

/// Seed columns: the full ground set at every period.
pub fn seed_columns(instance: &Instance) -> Vec<Column> {
    let full = ElementSet::full(instance.num_elements());
    (1..=instance.horizon()).map(|period| Column { period, set: full }).collect()
}

/// Solves the LP relaxation by column generation.
pub fn solve_lp(instance: &Instance, options: &LpOptions) -> Result<LpSolution> {
    let pricer = Pricer::new(instance.ordering(), options.pricing)?;
    if instance.demands().is_empty() {
        return Ok(LpSolution {
            x: Vec::new(),
            y: Vec::new(),
            objective: 0.0,
            ordering_part: 0.0,
            holding_part: 0.0,
            gamma: pricer.gamma(),
            stats: LpStats::default(),
        });
    }
    let mut columns = seed_columns(instance);
    let mut master = LpMaster::new(instance, &columns, options.simplex);
    let log = generate_columns(&mut master, &pricer, instance.ordering(), instance.horizon(), &mut columns, options.max_columns)?;
    let values = master.tableau.values();
    let y = columns
        .iter()
        .zip(&master.y_vars)
        .map(|(c, &v)| YColumn { period: c.period, set: c.set, value: values[v] })
        .collect();
    let mut solution = LpSolution::from_parts(instance, master.x_entries(&values), y, pricer.gamma())?;
    solution.stats = LpStats {
        iterations: log.len(),
        columns: columns.len(),
        pivots: master.tableau.pivots(),
        log,
    };
    Ok(solution)
}

/// The LP with every `(period, non-empty subset)` column materialised.
pub fn lp_full_enumeration(instance: &Instance) -> Result<LpSolution> {
    let (n, horizon) = (instance.num_elements(), instance.horizon());
    if n > MAX_FULL_ELEMENTS {
        return Err(Error::SizeCap { what: "full LP ground set", limit: MAX_FULL_ELEMENTS as u64, actual: n as u64 });
    }
    if horizon > MAX_FULL_HORIZON {
        return Err(Error::SizeCap { what: "full LP horizon", limit: MAX_FULL_HORIZON as u64, actual: horizon as u64 });
    }
    let mut lp = LinearProgram::new();
    let values = instance.ordering().tabulate()?;
    let mut y_vars = Vec::new();
    for period in 1..=horizon {
        for mask in 1..(1u64 << n) {
            y_vars.push((period, ElementSet::from_bits(mask), lp.add_variable(values[mask as usize])));
        }
    }
    let mut x_vars = Vec::new();
    for (k, d) in instance.demands().iter().enumerate() {
        let mut row = Vec::new();
        for s in instance.serving_window(d.period) {
            let v = lp.add_variable(instance.finite_holding(k, s));
            x_vars.push((d.element, d.period, s, v));
            row.push((v, 1.0));
            let mut link = vec![(v, 1.0)];
            link.extend(y_vars.iter().filter(|&&(p, set, _)| p == s && set.contains(d.element)).map(|&(_, _, y)| (y, -1.0)));
            lp.add_constraint(link, Sense::Le, 0.0);
        }
        lp.add_constraint(row, Sense::Eq, 1.0);
    }
    let solution = lp.solve(&SimplexOptions::default())?;
    let x = x_vars
        .iter()
        .map(|&(element, period, serving, v)| XEntry { element, period, serving, value: solution.values[v] })
        .collect();
    let y = y_vars
        .iter()
        .map(|&(period, set, v)| YColumn { period, set, value: solution.values[v] })
        .collect();
    let mut out = LpSolution::from_parts(instance, x, y, 1.0)?;
    out.stats.pivots = solution.pivots;
    out.stats.columns = y_vars.len();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Demand, HoldingModel};

    fn additive_instance(n: usize, horizon: usize, demands: &[(usize, usize, f64)]) -> Instance {
        Instance::new(
            n,
            horizon,
            demands.iter().map(|&(element, period, quantity)| Demand { element, period, quantity }).collect(),
            HoldingModel::Polynomial { alpha: 1.0, base_rates: vec![vec![1.0; horizon]; n] },
            OrderingCost::additive(5.0, vec![1.0; n]).unwrap(),
        )
        .unwrap()
    }

    fn instance_a() -> Instance {
        additive_instance(2, 3, &[(1, 2, 1.0), (2, 3, 2.0)])
    }

    #[test]
    fn single_demand_lp_is_six() {
        let inst = additive_instance(1, 2, &[(1, 2, 1.0)]);
        let cg = solve_lp(&inst, &LpOptions::default()).unwrap();
        assert!((cg.objective - 6.0).abs() < 1e-9);
        let full = lp_full_enumeration(&inst).unwrap();
        assert!((full.objective - 6.0).abs() < 1e-9);
    }

    #[test]
    fn instance_a_matches_full_enumeration() {
        let inst = instance_a();
        let cg = solve_lp(&inst, &LpOptions::default()).unwrap();
        let full = lp_full_enumeration(&inst).unwrap();
        assert!((cg.objective - full.objective).abs() <= 1e-6 * (1.0 + full.objective));
        assert!(full.objective <= 9.0 + 1e-9);
        cg.check_feasible(&inst, FEASIBILITY_TOL).unwrap();
        full.check_feasible(&inst, FEASIBILITY_TOL).unwrap();
        for entry in &cg.stats.log {
            assert!(entry.dual <= entry.primal + 1e-6);
        }
    }

    #[test]
    fn zero_demands() {
        let inst = additive_instance(2, 3, &[]);
        let cg = solve_lp(&inst, &LpOptions::default()).unwrap();
        assert_eq!((cg.objective, cg.y.len()), (0.0, 0));
        assert_eq!(lp_full_enumeration(&inst).unwrap().objective, 0.0);
        assert_eq!(solve_restricted_master(&inst, &seed_columns(&inst)).unwrap().objective, 0.0);
    }

    #[test]
    fn restricted_master_bounds_and_reproduces() {
        let inst = instance_a();
        let lp = solve_lp(&inst, &LpOptions::default()).unwrap();
        let seeded = solve_restricted_master(&inst, &seed_columns(&inst)).unwrap();
        assert!(seeded.objective >= lp.objective - 1e-9);
        let mut columns = seed_columns(&inst);
        columns.extend(lp.y.iter().map(|c| Column { period: c.period, set: c.set }));
        let full = solve_restricted_master(&inst, &columns).unwrap();
        assert!((full.objective - lp.objective).abs() < 1e-9);
        assert!(full.duals.b_bar.iter().flatten().all(|&v| v >= 0.0));
    }

    #[test]
    fn restricted_master_needs_cover() {
        let inst = instance_a();
        let columns = [Column { period: 2, set: ElementSet::singleton(1) }];
        assert!(matches!(solve_restricted_master(&inst, &columns), Err(Error::Precondition(_))));
    }

    #[test]
    fn price_column_examples() {
        let inst = additive_instance(2, 3, &[(1, 3, 1.0)]);
        let mut duals = DualVector::zeros(&inst);
        assert_eq!(price_column(&inst, &duals, 2, PricingMode::ExactEnumeration).unwrap(), None);
        duals.b_bar[0][1] = 7.0;
        let (set, rc) = price_column(&inst, &duals, 2, PricingMode::ExactEnumeration).unwrap().unwrap();
        assert_eq!(set, ElementSet::singleton(1));
        assert!((rc + 1.0).abs() < 1e-12);
    }

    #[test]
    fn garg_mode_rejects_submodular_family() {
        let inst = instance_a();
        assert!(matches!(
            solve_lp(&inst, &LpOptions::with_pricing(PricingMode::GargApprox)),
            Err(Error::PricingMismatch { .. })
        ));
    }

    #[test]
    fn column_cap_reports_bound() {
        let inst = additive_instance(3, 4, &[(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]);
        let options = LpOptions { max_columns: 4, ..LpOptions::default() };
        match solve_lp(&inst, &options) {
            Err(Error::ColumnLimit { limit, best_objective }) => {
                assert_eq!(limit, 4);
                assert!(best_objective.is_finite());
            }
            other => panic!("expected column limit, got {other:?}"),
        }
    }
}
