//! Evaluation harness: common adapter interface over reduced models,
//! energy diagnostics, short-horizon propagation scoring, and comparison
//! reports.

pub mod adapters;
pub mod energy;
pub mod propagate;
pub mod report;
