//! JSON file formats for instances, LP solutions, schedules, traces and
//! audit reports.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use replenish_core::covering::{AuditReport, CoveringSolution, GroupCheck};
use replenish_core::lp::{LpSolution, XEntry, YColumn};
use replenish_core::model::{CostReport, Demand, HoldingModel, Instance, Schedule};
use replenish_core::oracle::ExactResult;
use replenish_core::rounding::{HoldingCheck, RoundingTrace};
use replenish_core::setfn::{LaminarCost, Metric, OrderingCost, TreeCost};
use replenish_core::ElementSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandJson {
    pub i: usize,
    pub t: usize,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoldingJson {
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_rates: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum OrderingJson {
    Additive { k0: f64, k: Vec<f64> },
    Cardinality { g: Vec<f64> },
    Tree { parent: Vec<usize>, weight: Vec<f64>, leaf: Vec<usize> },
    Laminar { sets: Vec<Vec<usize>>, weights: Vec<f64> },
    Table { values: Vec<f64> },
    MetricTsp { metric: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    pub t: usize,
    pub demands: Vec<DemandJson>,
    pub holding: HoldingJson,
    pub ordering: OrderingJson,
}

pub fn set_to_vec(set: ElementSet) -> Vec<usize> {
    set.iter().collect()
}

pub fn set_from_slice(elements: &[usize]) -> Result<ElementSet> {
    if let Some(&bad) = elements.iter().find(|&&e| e == 0 || e > replenish_core::subset::MAX_ELEMENTS) {
        bail!("element {bad} is out of range");
    }
    Ok(elements.iter().copied().collect())
}

impl OrderingJson {
    pub fn from_cost(cost: &OrderingCost) -> Self {
        if let Some((k0, k)) = cost.additive_params() {
            OrderingJson::Additive { k0, k: k.to_vec() }
        } else if let Some(g) = cost.cardinality_table() {
            OrderingJson::Cardinality { g: g.to_vec() }
        } else if let Some(tree) = cost.tree_params() {
            OrderingJson::Tree { parent: tree.parent().to_vec(), weight: tree.weight().to_vec(), leaf: tree.leaf().to_vec() }
        } else if let Some(lam) = cost.laminar_params() {
            OrderingJson::Laminar {
                sets: lam.sets().iter().map(|&s| set_to_vec(s)).collect(),
                weights: lam.weights().to_vec(),
            }
        } else if let Some(values) = cost.table_values() {
            OrderingJson::Table { values: values.to_vec() }
        } else {
            let metric = cost.metric().expect("remaining family is the TSP");
            OrderingJson::MetricTsp { metric: metric.rows() }
        }
    }

    pub fn to_cost(&self, n: usize) -> Result<OrderingCost> {
        let cost = match self {
            OrderingJson::Additive { k0, k } => OrderingCost::additive(*k0, k.clone())?,
            OrderingJson::Cardinality { g } => OrderingCost::cardinality(g.clone())?,
            OrderingJson::Tree { parent, weight, leaf } => {
                OrderingCost::tree(TreeCost::new(parent.clone(), weight.clone(), leaf.clone())?)?
            }
            OrderingJson::Laminar { sets, weights } => {
                let sets = sets.iter().map(|s| set_from_slice(s)).collect::<Result<Vec<_>>>()?;
                OrderingCost::laminar(LaminarCost::new(n, sets, weights.clone())?, n)?
            }
            OrderingJson::Table { values } => OrderingCost::table(values.clone())?,
            OrderingJson::MetricTsp { metric } => OrderingCost::metric_tsp(Metric::new(metric.clone())?)?,
        };
        Ok(cost)
    }
}

impl HoldingJson {
    pub fn from_model(model: &HoldingModel) -> Self {
        let mut out = HoldingJson { variant: String::new(), alpha: None, base_rates: None, table: None, lifetime: None };
        match model {
            HoldingModel::Polynomial { alpha, base_rates } => {
                out.variant = "polynomial".into();
                out.alpha = Some(*alpha);
                out.base_rates = Some(base_rates.clone());
            }
            HoldingModel::Table { rates } => {
                out.variant = "table".into();
                out.table = Some(rates.clone());
            }
            HoldingModel::Perishable { lifetime } => {
                out.variant = "perishable".into();
                out.lifetime = Some(*lifetime);
            }
        }
        out
    }

    pub fn to_model(&self) -> Result<HoldingModel> {
        match self.variant.as_str() {
            "polynomial" => Ok(HoldingModel::Polynomial {
                alpha: self.alpha.ok_or_else(|| anyhow!("polynomial holding needs `alpha`"))?,
                base_rates: self.base_rates.clone().ok_or_else(|| anyhow!("polynomial holding needs `base_rates`"))?,
            }),
            "table" => Ok(HoldingModel::Table {
                rates: self.table.clone().ok_or_else(|| anyhow!("table holding needs `table`"))?,
            }),
            "perishable" => Ok(HoldingModel::Perishable {
                lifetime: self.lifetime.ok_or_else(|| anyhow!("perishable holding needs `lifetime`"))?,
            }),
            other => bail!("unknown holding variant `{other}`"),
        }
    }
}

impl InstanceJson {
    pub fn from_instance(instance: &Instance) -> Self {
        InstanceJson {
            n: instance.num_elements(),
            t: instance.horizon(),
            demands: instance.demands().iter().map(|d| DemandJson { i: d.element, t: d.period, d: d.quantity }).collect(),
            holding: HoldingJson::from_model(instance.holding()),
            ordering: OrderingJson::from_cost(instance.ordering()),
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let demands = self.demands.iter().map(|d| Demand { element: d.i, period: d.t, quantity: d.d }).collect();
        let instance = Instance::new(self.n, self.t, demands, self.holding.to_model()?, self.ordering.to_cost(self.n)?)?;
        Ok(instance)
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let json: InstanceJson = serde_json::from_str(text).context("instance JSON")?;
    json.to_instance()
}

pub fn instance_to_string(instance: &Instance) -> String {
    serde_json::to_string(&InstanceJson::from_instance(instance)).expect("instance serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XJson {
    pub i: usize,
    pub t: usize,
    pub s: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnJson {
    pub s: usize,
    pub set: Vec<usize>,
    pub value: f64,
}

impl ColumnJson {
    fn from_column(c: &YColumn) -> Self {
        ColumnJson { s: c.period, set: set_to_vec(c.set), value: c.value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpStatsJson {
    pub iterations: usize,
    pub columns: usize,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpJson {
    pub objective: f64,
    pub ordering_part: f64,
    pub holding_part: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pricing: Option<String>,
    pub x: Vec<XJson>,
    pub y: Vec<ColumnJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<LpStatsJson>,
}

impl LpJson {
    pub fn from_solution(lp: &LpSolution, pricing: Option<&str>) -> Self {
        LpJson {
            objective: lp.objective,
            ordering_part: lp.ordering_part,
            holding_part: lp.holding_part,
            gamma: lp.gamma,
            pricing: pricing.map(str::to_string),
            x: lp.x.iter().map(|e| XJson { i: e.element, t: e.period, s: e.serving, value: e.value }).collect(),
            y: lp.y.iter().map(ColumnJson::from_column).collect(),
            stats: Some(LpStatsJson { iterations: lp.stats.iterations, columns: lp.stats.columns, pivots: lp.stats.pivots }),
        }
    }

    /// Rebuilds the solution, recomputing the objective split from `x` and `y`.
    pub fn to_solution(&self, instance: &Instance) -> Result<LpSolution> {
        let x = self.x.iter().map(|e| XEntry { element: e.i, period: e.t, serving: e.s, value: e.value }).collect();
        let y = self
            .y
            .iter()
            .map(|c| Ok(YColumn { period: c.s, set: set_from_slice(&c.set)?, value: c.value }))
            .collect::<Result<Vec<_>>>()?;
        Ok(LpSolution::from_parts(instance, x, y, self.gamma)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderJson {
    pub s: usize,
    pub set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentJson {
    pub i: usize,
    pub t: usize,
    pub s: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleJson {
    pub orders: Vec<OrderJson>,
    pub assignment: Vec<AssignmentJson>,
}

impl ScheduleJson {
    pub fn from_schedule(schedule: &Schedule) -> Self {
        ScheduleJson {
            orders: schedule.orders.iter().map(|(&s, &set)| OrderJson { s, set: set_to_vec(set) }).collect(),
            assignment: schedule.assignment.iter().map(|(&(i, t), &s)| AssignmentJson { i, t, s }).collect(),
        }
    }

    pub fn to_schedule(&self) -> Result<Schedule> {
        let mut schedule = Schedule::new();
        for o in &self.orders {
            schedule.orders.insert(o.s, set_from_slice(&o.set)?);
        }
        for a in &self.assignment {
            schedule.assignment.insert((a.i, a.t), a.s);
        }
        Ok(schedule)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodCostJson {
    pub s: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandCostJson {
    pub i: usize,
    pub t: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReportJson {
    pub ordering_cost: f64,
    pub holding_cost: f64,
    pub total: f64,
    pub per_period: Vec<PeriodCostJson>,
    pub per_demand: Vec<DemandCostJson>,
}

impl CostReportJson {
    pub fn from_report(r: &CostReport) -> Self {
        CostReportJson {
            ordering_cost: r.ordering_cost,
            holding_cost: r.holding_cost,
            total: r.total,
            per_period: r.per_period.iter().map(|&(s, cost)| PeriodCostJson { s, cost }).collect(),
            per_demand: r.per_demand.iter().map(|&((i, t), cost)| DemandCostJson { i, t, cost }).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub rho: u64,
    pub log_base: u32,
    pub k: usize,
    pub widths: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalJson {
    pub i: usize,
    pub t: usize,
    pub s_prime: usize,
    pub s_star: usize,
    pub nominal_width: usize,
    pub group: usize,
    pub served: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupJson {
    pub group: usize,
    pub width: usize,
    pub orders: Vec<OrderJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceJson {
    pub params: ParamsJson,
    pub intervals: Vec<IntervalJson>,
    pub groups: Vec<GroupJson>,
}

impl TraceJson {
    pub fn from_trace(trace: &RoundingTrace) -> Self {
        let p = &trace.params;
        TraceJson {
            params: ParamsJson { rho: p.rho, log_base: p.log_base, k: p.k, widths: p.widths.clone() },
            intervals: trace
                .intervals
                .iter()
                .map(|iv| IntervalJson {
                    i: iv.element,
                    t: iv.period,
                    s_prime: iv.s_prime,
                    s_star: iv.s_star,
                    nominal_width: iv.nominal_width,
                    group: iv.group,
                    served: iv.served,
                })
                .collect(),
            groups: trace
                .groups
                .iter()
                .map(|g| GroupJson {
                    group: g.group,
                    width: g.width,
                    orders: g.orders.iter().map(|&(s, set)| OrderJson { s, set: set_to_vec(set) }).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldingFailureJson {
    pub i: usize,
    pub t: usize,
    pub lp_holding: f64,
    pub shadow_holding: f64,
    pub extended_holding: f64,
    pub shadow_ok: bool,
    pub extended_ok: bool,
}

impl HoldingFailureJson {
    fn from_check(c: &HoldingCheck) -> Self {
        HoldingFailureJson {
            i: c.element,
            t: c.period,
            lp_holding: c.lp_holding,
            shadow_holding: c.shadow_holding,
            extended_holding: c.extended_holding,
            shadow_ok: c.shadow_ok,
            extended_ok: c.extended_ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldingAuditJson {
    pub factor: f64,
    pub extended_applicable: bool,
    pub shadow_max_ratio: f64,
    pub extended_max_ratio: f64,
    pub algorithm_holding: f64,
    pub lp_holding: f64,
    pub aggregate_ok: bool,
    /// Demands violating a per-demand inequality.
    pub failures: Vec<HoldingFailureJson>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCheckJson {
    pub group: usize,
    pub width: usize,
    pub order_cost: f64,
    pub bound: f64,
    pub ok: bool,
}

impl GroupCheckJson {
    fn from_check(g: &GroupCheck) -> Self {
        GroupCheckJson { group: g.group, width: g.width, order_cost: g.order_cost, bound: g.bound, ok: g.ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingAuditJson {
    pub beta: f64,
    pub k: usize,
    pub lp_ordering: f64,
    pub covering_objective: f64,
    pub covering_pricing: String,
    pub doubled_lp_feasible: bool,
    pub lp_feasible: bool,
    pub min_window_mass: f64,
    pub window_mass_ok: bool,
    pub covering_bound: f64,
    pub covering_ok: bool,
    pub groups: Vec<GroupCheckJson>,
    pub total_ordering: f64,
    pub grouped_ordering: f64,
    pub total_bound: f64,
    pub total_ok: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndToEndJson {
    pub rounded_total: f64,
    pub lp_objective: f64,
    pub factor: f64,
    pub applicable: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditJson {
    pub holding: HoldingAuditJson,
    pub ordering: OrderingAuditJson,
    pub end_to_end: EndToEndJson,
    pub all_passed: bool,
}

impl AuditJson {
    pub fn from_report(report: &AuditReport) -> Self {
        let h = &report.holding;
        let o = &report.ordering;
        let cover: &CoveringSolution = &report.covering;
        let e = &report.end_to_end;
        AuditJson {
            holding: HoldingAuditJson {
                factor: h.factor,
                extended_applicable: h.extended_applicable,
                shadow_max_ratio: h.shadow_max_ratio,
                extended_max_ratio: h.extended_max_ratio,
                algorithm_holding: h.algorithm_holding,
                lp_holding: h.lp_holding,
                aggregate_ok: h.aggregate_ok,
                failures: h
                    .demands
                    .iter()
                    .filter(|c| !c.shadow_ok || (h.extended_applicable && !c.extended_ok))
                    .map(HoldingFailureJson::from_check)
                    .collect(),
                passed: h.passed,
            },
            ordering: OrderingAuditJson {
                beta: o.beta,
                k: o.k,
                lp_ordering: o.lp_ordering,
                covering_objective: o.covering_objective,
                covering_pricing: cover.pricing.name().to_string(),
                doubled_lp_feasible: o.doubled_lp_feasible,
                lp_feasible: o.lp_feasible,
                min_window_mass: o.min_window_mass,
                window_mass_ok: o.window_mass_ok,
                covering_bound: o.covering_bound,
                covering_ok: o.covering_ok,
                groups: o.groups.iter().map(GroupCheckJson::from_check).collect(),
                total_ordering: o.total_ordering,
                grouped_ordering: o.grouped_ordering,
                total_bound: o.total_bound,
                total_ok: o.total_ok,
                passed: o.passed,
            },
            end_to_end: EndToEndJson {
                rounded_total: e.rounded_total,
                lp_objective: e.lp_objective,
                factor: e.factor,
                applicable: e.applicable,
                ok: e.ok,
            },
            all_passed: report.all_passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactJson {
    pub value: f64,
    pub schedule: ScheduleJson,
}

impl ExactJson {
    pub fn from_result(r: &ExactResult) -> Self {
        ExactJson { value: r.value, schedule: ScheduleJson::from_schedule(&r.schedule) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioInputJson {
    pub metric: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioOutputJson {
    pub subset: Vec<usize>,
    pub ratio: f64,
    pub mode: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    const INSTANCE_A: &str = r#"{"n":2,"t":3,"demands":[{"i":1,"t":2,"d":1.0},{"i":2,"t":3,"d":2.0}],
        "holding":{"variant":"polynomial","alpha":1.0,"base_rates":[[1.0,1.0,1.0],[1.0,1.0,1.0]]},
        "ordering":{"family":"additive","params":{"k0":5.0,"k":[1.0,1.0]}}}"#;

    #[test]
    fn parses_instance_a() {
        let inst = parse_instance(INSTANCE_A).unwrap();
        assert_eq!((inst.num_elements(), inst.horizon(), inst.demands().len()), (2, 3, 2));
        assert_eq!(inst.ordering().eval(ElementSet::full(2)), 7.0);
    }

    #[test]
    fn every_family_round_trips() {
        let families = [
            r#"{"family":"cardinality","params":{"g":[0.0,1.0,1.5]}}"#,
            r#"{"family":"tree","params":{"parent":[0,0,1,1],"weight":[0.0,2.0,1.0,1.0],"leaf":[2,3]}}"#,
            r#"{"family":"laminar","params":{"sets":[[1,2],[2]],"weights":[3.0,1.0]}}"#,
            r#"{"family":"table","params":{"values":[0.0,1.0,1.0,1.5]}}"#,
            r#"{"family":"metric_tsp","params":{"metric":[[0.0,1.0,2.0],[1.0,0.0,1.0],[2.0,1.0,0.0]]}}"#,
        ];
        for fam in families {
            let text = INSTANCE_A.replace(r#"{"family":"additive","params":{"k0":5.0,"k":[1.0,1.0]}}"#, fam);
            let inst = parse_instance(&text).unwrap();
            let again = parse_instance(&instance_to_string(&inst)).unwrap();
            assert_eq!(inst, again, "{fam}");
        }
    }

    #[test]
    fn rejects_unknown_holding_variant() {
        let text = INSTANCE_A.replace(r#""variant":"polynomial""#, r#""variant":"quadratic""#);
        assert!(parse_instance(&text).is_err());
    }
}
