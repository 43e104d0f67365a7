//! File formats, instance generators and the experiment harness around
//! `replenish-core`.

pub mod experiment;
pub mod format;
pub mod generate;
