//! Joint replenishment and inventory routing: LP relaxation by column
//! generation, shadow-interval rounding, and exact audit oracles.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod covering;
pub mod error;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod ratiotsp;
pub mod rounding;
pub mod setfn;
pub mod subset;

pub use error::{Error, Result};
pub use covering::{audit_all, AuditReport};
pub use lp::{lp_full_enumeration, solve_lp, LpOptions, LpSolution, PricingMode};
pub use model::{evaluate_schedule_cost, validate_schedule, CostReport, Demand, HoldingCost, HoldingModel, Instance, Schedule, Violation};
pub use oracle::{exact_opt, ExactResult};
pub use rounding::{round, RoundingOutcome, RoundingParams, RoundingTrace};
pub use setfn::{Family, Metric, OrderingCost};
pub use subset::ElementSet;
