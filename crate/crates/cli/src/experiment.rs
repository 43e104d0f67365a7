//! Batch pipeline runs over generated instances with aggregated reports.

use std::time::Instant;

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use replenish_core::covering::audit_all;
use replenish_core::lp::{lp_full_enumeration, solve_lp, LpOptions, PricingMode, FEASIBILITY_TOL};
use replenish_core::model::{validate_schedule, Instance};
use replenish_core::oracle::{exact_opt, search_space};
use replenish_core::rounding::round;

use crate::generate::{generate_instance, GenSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PricingArg {
    Exact,
    TspDp,
    Garg,
}

impl PricingArg {
    pub fn mode(self) -> PricingMode {
        match self {
            PricingArg::Exact => PricingMode::ExactEnumeration,
            PricingArg::TspDp => PricingMode::ExactTspDp,
            PricingArg::Garg => PricingMode::GargApprox,
        }
    }
}

fn default_count() -> usize {
    1
}

fn default_pricing() -> PricingArg {
    PricingArg::Exact
}

fn default_true() -> bool {
    true
}

/// One family of instances and the pipeline options applied to each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub name: String,
    pub gen: GenSpec,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_pricing")]
    pub pricing: PricingArg,
    /// Run the exact oracle when its search space is at most this size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_limit: Option<u64>,
    /// Also solve the fully enumerated LP and compare objectives.
    #[serde(default)]
    pub full_lp: bool,
    #[serde(default = "default_true")]
    pub audit: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_override: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub runs: Vec<RunSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFlags {
    pub feasible: bool,
    pub holding: bool,
    pub ordering: bool,
    pub end_to_end: bool,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportRow {
    pub run: String,
    pub index: usize,
    pub n: usize,
    pub t: usize,
    pub demands: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_lp_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounded_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_lp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audits: Option<AuditFlags>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl ReportRow {
    /// No error and every computed audit passed.
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.audits.as_ref().is_none_or(|a| a.all_passed)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregate {
    pub instances: usize,
    pub failures: usize,
    pub max_ratio_lp: f64,
    pub mean_ratio_lp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio_exact: Option<f64>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub aggregate: Aggregate,
}

impl ExperimentReport {
    /// Line-delimited JSON: one line per row, then the aggregate.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&serde_json::to_string(row).expect("row serializes"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&serde_json::json!({ "aggregate": self.aggregate })).expect("aggregate serializes"));
        out.push('\n');
        out
    }
}

/// Stream id of instance `index` in run `run`.
pub fn stream_id(run: usize, index: usize) -> u64 {
    ((run as u64) << 32) | index as u64
}

fn run_one(spec: &RunSpec, run: usize, index: usize, timing: bool) -> ReportRow {
    let start = Instant::now();
    let mut row = ReportRow { run: spec.name.clone(), index, ..ReportRow::default() };
    let instance = match generate_instance(&spec.gen, stream_id(run, index)) {
        Ok(inst) => inst,
        Err(e) => {
            row.error = Some(format!("generate: {e}"));
            return row;
        }
    };
    row.n = instance.num_elements();
    row.t = instance.horizon();
    row.demands = instance.demands().len();
    if let Err(e) = pipeline(spec, &instance, &mut row) {
        row.error = Some(e.to_string());
    }
    if timing {
        row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    row
}

fn pipeline(spec: &RunSpec, instance: &Instance, row: &mut ReportRow) -> Result<()> {
    let lp = solve_lp(instance, &LpOptions::with_pricing(spec.pricing.mode()))?;
    lp.check_feasible(instance, FEASIBILITY_TOL)?;
    row.lp_value = Some(lp.objective);
    if spec.full_lp {
        row.full_lp_value = Some(lp_full_enumeration(instance)?.objective);
    }
    let outcome = round(instance, &lp, spec.rho_override)?;
    let feasible = validate_schedule(instance, &outcome.schedule).is_empty();
    row.rounded_cost = Some(outcome.cost.total);
    row.ratio_lp = Some(ratio(outcome.cost.total, lp.objective));
    if let Some(limit) = spec.exact_limit {
        if search_space(instance) <= limit {
            let exact = exact_opt(instance)?;
            row.exact_opt = Some(exact.value);
            row.ratio_exact = Some(ratio(outcome.cost.total, exact.value));
        }
    }
    if spec.audit {
        let report = audit_all(instance, &lp, &outcome.trace, &outcome.cost)?;
        row.bound = Some(report.end_to_end.factor);
        row.audits = Some(AuditFlags {
            feasible,
            holding: report.holding.passed,
            ordering: report.ordering.passed,
            end_to_end: report.end_to_end.ok,
            all_passed: feasible && report.all_passed,
        });
    } else if !feasible {
        bail!("rounded schedule is infeasible");
    }
    Ok(())
}

fn ratio(value: f64, base: f64) -> f64 {
    if base > 1e-12 {
        value / base
    } else if value <= 1e-12 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Runs every configured instance; rows come back in `(run, index)` order
/// regardless of how many threads execute them.
pub fn run_experiment(config: &ExperimentConfig, timing: bool) -> ExperimentReport {
    let jobs: Vec<(usize, usize)> =
        config.runs.iter().enumerate().flat_map(|(r, spec)| (0..spec.count).map(move |i| (r, i))).collect();
    let rows: Vec<ReportRow> = jobs.par_iter().map(|&(r, i)| run_one(&config.runs[r], r, i, timing)).collect();
    let aggregate = aggregate(&rows);
    ExperimentReport { rows, aggregate }
}

fn aggregate(rows: &[ReportRow]) -> Aggregate {
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio_lp).collect();
    let max_ratio_exact = rows.iter().filter_map(|r| r.ratio_exact).reduce(f64::max);
    let failures = rows.iter().filter(|r| !r.passed()).count();
    Aggregate {
        instances: rows.len(),
        failures,
        max_ratio_lp: ratios.iter().copied().fold(0.0, f64::max),
        mean_ratio_lp: if ratios.is_empty() { 0.0 } else { ratios.iter().sum::<f64>() / ratios.len() as f64 },
        max_ratio_exact,
        all_passed: failures == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::GenFamily;

    #[test]
    fn empty_config_gives_empty_report() {
        let report = run_experiment(&ExperimentConfig::default(), false);
        assert!(report.rows.is_empty());
        assert!(report.aggregate.all_passed);
    }

    #[test]
    fn small_batch_passes() {
        let config = ExperimentConfig {
            runs: vec![RunSpec {
                name: "tiny".into(),
                gen: GenSpec::new(3, GenFamily::JrpAdditive, (2, 3), (3, 5)),
                count: 5,
                pricing: PricingArg::Exact,
                exact_limit: Some(100_000),
                full_lp: true,
                audit: true,
                rho_override: None,
            }],
        };
        let report = run_experiment(&config, false);
        assert_eq!(report.rows.len(), 5);
        assert!(report.aggregate.all_passed, "{:?}", report.rows);
        for row in &report.rows {
            let (lp, full) = (row.lp_value.unwrap(), row.full_lp_value.unwrap());
            assert!((lp - full).abs() <= 1e-6 * (1.0 + full));
            assert!(row.ratio_exact.unwrap() >= 1.0 - 1e-9);
        }
    }
}
