//! Shadow-interval rounding of a fractional LP solution and the holding-cost
//! audits that go with it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::LpSolution;
use crate::model::{evaluate_schedule_cost, CostReport, HoldingModel, Instance, Schedule};
use crate::subset::ElementSet;

/// Slack when locating the half point of an `x` column.
pub const HALF_TOL: f64 = 1e-9;
/// An `x` column may miss 1 by at most this much.
pub const COLUMN_SUM_TOL: f64 = 1e-6;
/// Audit inequalities use `lhs ≤ rhs + AUDIT_TOL · (1 + |rhs|)`.
pub const AUDIT_TOL: f64 = 1e-6;

#[inline]
pub(crate) fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + AUDIT_TOL * (1.0 + rhs.abs())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundingParams {
    pub rho: u64,
    /// Base of the logarithm inside `ρ`; always 2.
    pub log_base: u32,
    /// Number of width groups.
    pub k: usize,
    /// `widths[m]` is the grid spacing of group `m`; `widths[0] = 0` except
    /// for perishable instances, which use one group of width `c`.
    pub widths: Vec<usize>,
}

impl RoundingParams {
    /// Parameters for a horizon under an explicit `ρ ≥ 2`.
    pub fn with_rho(horizon: usize, rho: u64) -> Result<Self> {
        if rho < 2 {
            return Err(Error::Precondition(format!("rho must be at least 2, got {rho}")));
        }
        if horizon == 0 {
            return Err(Error::Precondition("horizon must be positive".into()));
        }
        let k = 1 + ceil_log(rho, horizon as u64);
        let mut widths = vec![0];
        let mut power = 1u64;
        for _ in 1..k {
            power = power.saturating_mul(rho);
            widths.push(power.min(horizon as u64) as usize);
        }
        Ok(RoundingParams { rho, log_base: 2, k, widths })
    }

    pub fn new(horizon: usize, alpha: f64) -> Result<Self> {
        Self::with_rho(horizon, compute_rho(horizon, alpha))
    }

    /// One group whose grid spacing is the lifetime.
    pub fn perishable(lifetime: usize) -> Self {
        RoundingParams { rho: 2, log_base: 2, k: 1, widths: vec![lifetime] }
    }

    pub fn for_instance(instance: &Instance, rho_override: Option<u64>) -> Result<Self> {
        if let HoldingModel::Perishable { lifetime } = *instance.holding() {
            return Ok(Self::perishable(lifetime));
        }
        match rho_override {
            Some(rho) => Self::with_rho(instance.horizon(), rho),
            None => Self::new(instance.horizon(), instance.alpha()),
        }
    }
}

/// Smallest `m ≥ 0` with `base^m ≥ value`.
pub fn ceil_log(base: u64, value: u64) -> usize {
    debug_assert!(base >= 2);
    let (mut m, mut power) = (0, 1u64);
    while power < value {
        power = power.saturating_mul(base);
        m += 1;
    }
    m
}

/// `ρ = max(2, ⌊(log₂ T)^{1/(2α)}⌋)`.
pub fn compute_rho(horizon: usize, alpha: f64) -> u64 {
    let log = libm::log2(horizon.max(1) as f64);
    let value = libm::pow(log, 1.0 / (2.0 * alpha));
    (libm::floor(value + 1e-9) as u64).max(2)
}

/// Largest `s` whose suffix sum `Σ_{r=s..t} x_r` reaches one half;
/// `x[s−1]` is the share served at `s`.
pub fn shadow_interval(x: &[f64]) -> Result<usize> {
    let total: f64 = x.iter().sum();
    if x.is_empty() || (total - 1.0).abs() > COLUMN_SUM_TOL {
        return Err(Error::Precondition(format!("x column sums to {total}, expected 1")));
    }
    let mut suffix = 0.0;
    for s in (1..=x.len()).rev() {
        suffix += x[s - 1];
        if suffix >= 0.5 - HALF_TOL {
            return Ok(s);
        }
    }
    Err(Error::Internal("column sums to 1 but never reaches one half".into()))
}

/// `(s*, nominal width, group)` for a shadow interval `[s′, t]`.
pub fn extend_interval(s_prime: usize, t: usize, rho: u64, horizon: usize) -> (usize, usize, usize) {
    debug_assert!(s_prime <= t);
    if s_prime == t {
        return (t, 0, 0);
    }
    let length = (t - s_prime) as u64;
    let (mut m, mut power) = (1, rho);
    while power < length {
        power = power.saturating_mul(rho);
        m += 1;
    }
    let s_star = if power >= t as u64 { 1 } else { (t as u64 - power).max(1) as usize };
    (s_star, power.min(horizon as u64) as usize, m)
}

/// Latest grid point `1 + j·width` not after `t`; `t` itself for width 0.
pub fn latest_grid_point(t: usize, width: usize) -> usize {
    if width == 0 {
        t
    } else {
        1 + (t - 1) / width * width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShadowInterval {
    pub element: usize,
    pub period: usize,
    pub s_prime: usize,
    pub s_star: usize,
    pub nominal_width: usize,
    pub group: usize,
    /// Grid point that serves the demand.
    pub served: usize,
}

impl ShadowInterval {
    /// Periods that may carry cover mass for this demand in the per-group
    /// argument: `[τ − w, τ + w) ∩ [1, T]`, or `{t}` for width 0.
    pub fn serving_window(&self, width: usize, horizon: usize) -> (usize, usize) {
        if width == 0 {
            (self.period, self.period)
        } else {
            (self.served.saturating_sub(width).max(1), (self.served + width - 1).min(horizon))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupOrders {
    pub group: usize,
    pub width: usize,
    /// `(τ_j, A_m^j)` for each grid point with at least one assigned demand.
    pub orders: Vec<(usize, ElementSet)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundingTrace {
    pub params: RoundingParams,
    /// One entry per demand, in instance order.
    pub intervals: Vec<ShadowInterval>,
    pub groups: Vec<GroupOrders>,
    pub schedule: Schedule,
}

impl RoundingTrace {
    pub fn width_of(&self, group: usize) -> usize {
        self.params.widths[group]
    }
}

/// Shadow and extended interval of every demand.
pub fn compute_intervals(instance: &Instance, lp: &LpSolution, params: &RoundingParams) -> Result<Vec<ShadowInterval>> {
    let columns = lp.x_columns(instance);
    let perishable = match *instance.holding() {
        HoldingModel::Perishable { lifetime } => Some(lifetime),
        _ => None,
    };
    let mut out = Vec::with_capacity(columns.len());
    for (d, x) in instance.demands().iter().zip(&columns) {
        let s_prime = shadow_interval(x).map_err(|e| match e {
            Error::Precondition(msg) => Error::Precondition(format!("demand ({},{}): {msg}", d.element, d.period)),
            other => other,
        })?;
        let (s_star, nominal_width, group) = match perishable {
            Some(lifetime) => (d.period.saturating_sub(lifetime).max(1), lifetime, 0),
            None => extend_interval(s_prime, d.period, params.rho, instance.horizon()),
        };
        out.push(ShadowInterval {
            element: d.element,
            period: d.period,
            s_prime,
            s_star,
            nominal_width,
            group,
            served: 0,
        });
    }
    Ok(out)
}

/// Serves every demand at the latest grid point of its group inside
/// `[s*, t]` and merges the per-group orders by period.
pub fn place_orders(instance: &Instance, mut intervals: Vec<ShadowInterval>, params: &RoundingParams) -> Result<RoundingTrace> {
    if intervals.len() != instance.demands().len() {
        return Err(Error::Precondition(format!(
            "{} intervals for {} demands",
            intervals.len(),
            instance.demands().len()
        )));
    }
    let mut per_group: Vec<BTreeMap<usize, ElementSet>> = vec![BTreeMap::new(); params.k];
    let mut schedule = Schedule::new();
    for iv in intervals.iter_mut() {
        let width = *params
            .widths
            .get(iv.group)
            .ok_or_else(|| Error::Internal(format!("group {} exceeds k = {}", iv.group, params.k)))?;
        let tau = latest_grid_point(iv.period, width);
        if tau < iv.s_star || tau > iv.period {
            return Err(Error::Internal(format!(
                "no grid point of width {width} inside [{}, {}]",
                iv.s_star, iv.period
            )));
        }
        iv.served = tau;
        per_group[iv.group].entry(tau).or_default().insert(iv.element);
        schedule.serve(iv.element, iv.period, tau);
    }
    let groups = per_group
        .into_iter()
        .enumerate()
        .map(|(group, orders)| GroupOrders { group, width: params.widths[group], orders: orders.into_iter().collect() })
        .collect();
    Ok(RoundingTrace { params: params.clone(), intervals, groups, schedule })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundingOutcome {
    pub schedule: Schedule,
    pub trace: RoundingTrace,
    pub cost: CostReport,
}

/// The full rounding pipeline.
pub fn round(instance: &Instance, lp: &LpSolution, rho_override: Option<u64>) -> Result<RoundingOutcome> {
    let params = RoundingParams::for_instance(instance, rho_override)?;
    let intervals = compute_intervals(instance, lp, &params)?;
    let trace = place_orders(instance, intervals, &params)?;
    let cost = evaluate_schedule_cost(instance, &trace.schedule)?;
    Ok(RoundingOutcome { schedule: trace.schedule.clone(), trace, cost })
}

/// Half-point holding inequality at serving period `s`: returns
/// `(H_s, 2 Σ_r H_r x_r)` for per-period holding costs `h` and shares `x`.
pub fn half_point_bound(h: &[f64], x: &[f64], s: usize) -> (f64, f64) {
    let expected: f64 = h.iter().zip(x).map(|(a, b)| a * b).sum();
    (h[s - 1], 2.0 * expected)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoldingCheck {
    pub element: usize,
    pub period: usize,
    /// `Σ_s H_st x_st`.
    pub lp_holding: f64,
    pub shadow_holding: f64,
    pub extended_holding: f64,
    pub served_holding: f64,
    pub shadow_ok: bool,
    pub extended_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoldingAudit {
    pub demands: Vec<HoldingCheck>,
    /// `2ρ^α`.
    pub factor: f64,
    /// False for tabulated holding costs, where the bound does not follow.
    pub extended_applicable: bool,
    pub shadow_max_ratio: f64,
    pub extended_max_ratio: f64,
    pub algorithm_holding: f64,
    pub lp_holding: f64,
    pub aggregate_ok: bool,
    pub passed: bool,
}

impl HoldingAudit {
    /// First failing demand, if any.
    pub fn first_failure(&self) -> Option<&HoldingCheck> {
        self.demands.iter().find(|c| !c.shadow_ok || (self.extended_applicable && !c.extended_ok))
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 1e-12 {
        lhs / rhs
    } else {
        0.0
    }
}

/// Per-demand and aggregate holding-cost inequalities for a rounding run.
pub fn audit_holding(instance: &Instance, lp: &LpSolution, trace: &RoundingTrace) -> Result<HoldingAudit> {
    let columns = lp.x_columns(instance);
    let alpha = instance.alpha();
    let factor = 2.0 * libm::pow(trace.params.rho as f64, alpha);
    let extended_applicable = !matches!(instance.holding(), HoldingModel::Table { .. });
    let mut demands = Vec::with_capacity(columns.len());
    let (mut shadow_max, mut extended_max) = (0.0f64, 0.0f64);
    let (mut algorithm_holding, mut lp_holding) = (0.0, 0.0);
    for (k, (iv, x)) in trace.intervals.iter().zip(&columns).enumerate() {
        let window = instance.serving_window(iv.period);
        let h: Vec<f64> = (1..=iv.period)
            .map(|s| if window.contains(&s) { instance.finite_holding(k, s) } else { 0.0 })
            .collect();
        let (shadow_holding, twice) = half_point_bound(&h, x, iv.s_prime);
        let expected = twice / 2.0;
        let extended_holding = h[iv.s_star - 1];
        let served_holding = h[iv.served - 1];
        shadow_max = shadow_max.max(ratio(shadow_holding, expected));
        extended_max = extended_max.max(ratio(extended_holding, expected));
        algorithm_holding += served_holding;
        lp_holding += expected;
        demands.push(HoldingCheck {
            element: iv.element,
            period: iv.period,
            lp_holding: expected,
            shadow_holding,
            extended_holding,
            served_holding,
            shadow_ok: within(shadow_holding, twice),
            extended_ok: within(extended_holding, factor * expected) && served_holding <= extended_holding + 1e-12,
        });
    }
    let aggregate_ok = !extended_applicable || within(algorithm_holding, factor * lp_holding);
    let passed = aggregate_ok && demands.iter().all(|c| c.shadow_ok && (!extended_applicable || c.extended_ok));
    Ok(HoldingAudit {
        demands,
        factor,
        extended_applicable,
        shadow_max_ratio: shadow_max,
        extended_max_ratio: extended_max,
        algorithm_holding,
        lp_holding,
        aggregate_ok,
        passed,
    })
}
