//! Error-optimal decision fusion over independent biased binary channels.
//!
//! A consumer observes one source bit `X` through `n` independent binary
//! channels, each with its own pair of crossover probabilities, and applies
//! the MAP rule to the `n` readings. This crate computes that rule and its
//! error probability exactly, and provides the tools to study how the error
//! depends on channel bias when each channel's prior-weighted error rate is
//! held fixed:
//!
//! - [`model`]: priors, channels, systems, canonical relabeling, constructors
//! - [`decision`]: likelihoods, the MAP comparator, LLR weights, policy tables
//! - [`analysis`]: exact error by enumeration, binomial and closed-form paths, bias sweeps
//! - [`gains`]: fully-biased vs unbiased gain bounds and exact binomial identities
//! - [`montecarlo`]: seeded simulation of policies
//! - [`experiments`]: the batch jobs behind the `biasfusion` binary

pub mod analysis;
pub mod decision;
pub mod error;
pub mod experiments;
pub mod gains;
pub mod model;
pub mod montecarlo;

pub use analysis::{
    bias_sweep, exact_error_probability, fully_biased_error, identical_error_probability,
    llr_rate_constrained_derivative, log_identical_error_probability, BiasSweep, ErrorReport, Method,
};
pub use decision::{likelihoods, llr_weights, map_decide, policy_table, DecisionPolicy, OutcomeVector, PolicyTable};
pub use error::{Error, Result};
pub use gains::{claim1_check, convergence_table, exact_gain_ratio, gain_bounds, GainBounds};
pub use model::{
    canonicalize, error_rate, make_fully_biased_system, make_unbiased_system, random_system_with_rates, Channel, Prior,
    RateVector, SystemSpec,
};
pub use montecarlo::{simulate, simulate_policy_comparison, SimConfig, SimResult};

/// Scientific notation with 17 significant digits; parses back to the same double.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}
