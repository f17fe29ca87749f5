//! Configuration-driven Monte Carlo experiments over the feedback search
//! simulators: claim audits, ratio-table reproduction, scaling studies, and
//! baseline comparisons, all with deterministic per-trial seeding.

pub mod config;
pub mod experiments;
pub mod output;
pub mod stats;
