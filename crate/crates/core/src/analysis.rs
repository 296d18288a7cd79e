//! Minimum error probability and its behaviour under rate-preserving bias changes.
//!
//! The minimum over all policies is `sum_y min(rho0 A(y), rho1 B(y))`. Four
//! routes compute it: full enumeration over `{0,1}^n`, a binomial sum for
//! identical channels, the same sum in the log domain for large `n`, and a
//! closed form for systems made only of S-channels.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::decision::{DecisionPolicy, OutcomeLikelihoods, OutcomeVector};
use crate::error::{Error, Result};
use crate::model::{beta_for_rate, feasible_alpha_range, Channel, Prior, RateVector, SystemSpec};

/// Largest `n` handled by full enumeration.
pub const ENUMERATION_LIMIT: usize = 24;

/// Largest `n` accepted by [`bias_sweep`].
pub const SWEEP_LIMIT: usize = 20;

/// Slack allowed on positive second differences of a sweep.
pub const CONCAVITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Enumeration,
    Binomial,
    LogBinomial,
    ClosedForm,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Enumeration => "enumeration",
            Method::Binomial => "binomial",
            Method::LogBinomial => "log-binomial",
            Method::ClosedForm => "closed-form",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub p_error: f64,
    pub log_p_error: f64,
    pub method: Method,
}

impl ErrorReport {
    fn from_probability(p_error: f64, method: Method) -> Self {
        Self {
            p_error,
            log_p_error: p_error.ln(),
            method,
        }
    }

    fn from_log(log_p_error: f64, method: Method) -> Self {
        Self {
            p_error: log_p_error.exp(),
            log_p_error,
            method,
        }
    }
}

/// Fixed-shape pairwise reduction; the result depends only on `values`.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let (l, r) = values.split_at(len / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Sums `term(index, A, B)` over every outcome.
///
/// Chunks run in parallel but each is summed sequentially and the chunk sums
/// are reduced by a fixed tree, so the result does not depend on the thread count.
fn enumerate_sum(system: &SystemSpec, term: impl Fn(usize, f64, f64) -> f64 + Sync) -> Result<f64> {
    if system.n() > ENUMERATION_LIMIT {
        return Err(Error::SizeGuard {
            n: system.n(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let lik = OutcomeLikelihoods::new(system);
    let chunk_sums: Vec<f64> = (0..lik.chunks())
        .into_par_iter()
        .map(|h| {
            let mut acc = 0.0;
            lik.for_each_in_chunk(h, |idx, a, b| acc += term(idx, a, b));
            acc
        })
        .collect();
    Ok(pairwise_sum(&chunk_sums))
}

/// Minimum error probability by enumerating all `2^n` outcomes (`n <= 24`).
pub fn exact_error_probability(system: &SystemSpec) -> Result<ErrorReport> {
    let (rho0, rho1) = (system.prior().rho0(), system.prior().rho1());
    let p = enumerate_sum(system, |_, a, b| (rho0 * a).min(rho1 * b))?;
    Ok(ErrorReport::from_probability(p, Method::Enumeration))
}

/// Error probability of an arbitrary policy on its own system, by enumeration.
pub fn policy_error_probability(policy: &DecisionPolicy) -> Result<f64> {
    let system = policy.system();
    let (rho0, rho1) = (system.prior().rho0(), system.prior().rho1());
    enumerate_sum(system, |idx, a, b| {
        if policy.decide_index(idx as u64) == 0 {
            rho1 * b
        } else {
            rho0 * a
        }
    })
}

/// Minimum error probability of `n` copies of the channel `(alpha, beta)`.
///
/// The optimal policy only depends on the number of ones, so the sum runs
/// over `k = 0..=n` with weight `C(n, k)`.
pub fn identical_error_probability(n: usize, prior: &Prior, alpha: f64, beta: f64) -> Result<ErrorReport> {
    Channel::new(alpha, beta)?;
    if n == 0 {
        return Err(Error::EmptySystem);
    }
    let (rho0, rho1) = (prior.rho0(), prior.rho1());
    let mut binom = 1.0f64;
    let mut p = 0.0;
    for k in 0..=n {
        if k > 0 {
            binom = binom * (n - k + 1) as f64 / k as f64;
        }
        let (ones, zeros) = (k as i32, (n - k) as i32);
        let a = alpha.powi(ones) * (1.0 - alpha).powi(zeros);
        let b = (1.0 - beta).powi(ones) * beta.powi(zeros);
        p += binom * (rho0 * a).min(rho1 * b);
    }
    Ok(ErrorReport::from_probability(p, Method::Binomial))
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `k * ln(p) + m * ln(q)` with the convention `0 * ln(0) = 0`.
fn ln_power_pair(p: f64, k: usize, q: f64, m: usize) -> f64 {
    let term = |x: f64, e: usize| if e == 0 { 0.0 } else { e as f64 * ln_or_neg_inf(x) };
    term(p, k) + term(q, m)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

pub(crate) fn log_identical_sum(n: usize, prior: &Prior, alpha: f64, beta: f64) -> f64 {
    let (ln_rho0, ln_rho1) = (ln_or_neg_inf(prior.rho0()), ln_or_neg_inf(prior.rho1()));
    let terms: Vec<f64> = (0..=n)
        .map(|k| {
            let a = ln_rho0 + ln_power_pair(alpha, k, 1.0 - alpha, n - k);
            let b = ln_rho1 + ln_power_pair(1.0 - beta, k, beta, n - k);
            ln_binomial(n as u64, k as u64) + a.min(b)
        })
        .collect();
    log_sum_exp(&terms)
}

/// Log of the minimum error probability of `n` unbiased channels with rate `r`,
/// stable for very large `n`.
pub fn log_identical_error_probability(n: usize, prior: &Prior, r: f64) -> Result<ErrorReport> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(Error::InvalidRate {
            rate: r,
            range: "(0, 1/2]",
        });
    }
    if n == 0 {
        return Err(Error::EmptySystem);
    }
    Ok(ErrorReport::from_log(
        log_identical_sum(n, prior, r, r),
        Method::LogBinomial,
    ))
}

/// Closed-form error of a system of S-channels with the given rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FullyBiasedError {
    #[serde(flatten)]
    pub report: ErrorReport,
    /// `rho0 * prod(r_i / rho0) <= rho1`, under which the product policy is optimal.
    pub condition_holds: bool,
}

/// `ln(rho0 * prod(r_i / rho0))`.
pub fn log_product_bound(prior: &Prior, rates: &RateVector) -> f64 {
    rates.iter().fold(ln_or_neg_inf(prior.rho0()), |acc, r| {
        acc + ln_or_neg_inf(r / prior.rho0())
    })
}

/// `min(rho0 * prod(r_i / rho0), rho1)`: the exact minimum for an all-S system,
/// and a lower bound for any system sharing the rate vector.
pub fn fully_biased_error(prior: &Prior, rates: &RateVector) -> Result<FullyBiasedError> {
    prior.require_canonical()?;
    if let Some(rate) = rates.iter().find(|&r| r > 0.5) {
        return Err(Error::InvalidRate {
            rate,
            range: "[0, 1/2]",
        });
    }
    let bound = rates.iter().fold(prior.rho0(), |acc, r| acc * (r / prior.rho0()));
    let log_bound = log_product_bound(prior, rates);
    let condition_holds = if bound > 0.0 { bound <= prior.rho1() } else { true };
    let report = if bound > 0.0 {
        ErrorReport {
            p_error: bound.min(prior.rho1()),
            log_p_error: log_bound.min(prior.rho1().ln()),
            method: Method::ClosedForm,
        }
    } else {
        ErrorReport::from_log(log_bound.min(prior.rho1().ln()), Method::ClosedForm)
    };
    Ok(FullyBiasedError {
        report,
        condition_holds,
    })
}

/// Error probability as one channel's `alpha` moves along its rate line.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasSweep {
    pub channel_index: usize,
    pub rate: f64,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub p_error_at: Vec<f64>,
    /// `(r_k - rho1) / (rho0 - rho1)` when `r_k >= rho1`; always a grid member.
    pub local_max_alpha: Option<f64>,
}

impl BiasSweep {
    /// Twice the gap between each interior value and the chord through its
    /// neighbours; reduces to `p[j-1] - 2 p[j] + p[j+1]` on a uniform grid.
    /// Non-positive everywhere for a concave profile.
    pub fn second_differences(&self) -> Vec<f64> {
        let (x, p) = (&self.alpha_grid, &self.p_error_at);
        (1..x.len().saturating_sub(1))
            .map(|j| {
                let (hl, hr) = (x[j] - x[j - 1], x[j + 1] - x[j]);
                let span = hl + hr;
                if span <= 0.0 {
                    return 0.0;
                }
                let chord = (hr * p[j - 1] + hl * p[j + 1]) / span;
                2.0 * (chord - p[j])
            })
            .collect()
    }

    /// Largest second difference, or `-inf` for a grid without interior points.
    pub fn max_second_difference(&self) -> f64 {
        self.second_differences().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_concave(&self, tol: f64) -> bool {
        self.max_second_difference() <= tol
    }

    /// The smallest value on the grid is matched, within `tol`, at an endpoint.
    pub fn min_at_endpoint(&self, tol: f64) -> bool {
        let p = &self.p_error_at;
        let min = p.iter().copied().fold(f64::INFINITY, f64::min);
        let ends = p[0].min(p[p.len() - 1]);
        ends <= min + tol
    }

    pub fn local_max_index(&self) -> Option<usize> {
        let target = self.local_max_alpha?;
        self.alpha_grid.iter().position(|&a| a == target)
    }

    /// Writes `alpha_k,beta_k,p_error` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["alpha_k", "beta_k", "p_error"])?;
        for ((a, b), p) in self.alpha_grid.iter().zip(&self.beta_grid).zip(&self.p_error_at) {
            w.write_record([crate::sig17(*a), crate::sig17(*b), crate::sig17(*p)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn require_canonical_system(system: &SystemSpec) -> Result<()> {
    system.prior().require_canonical()?;
    match system.rates().iter().find(|&r| r > 0.5) {
        Some(rate) => Err(Error::InvalidRate {
            rate,
            range: "[0, 1/2]",
        }),
        None => Ok(()),
    }
}

/// System with channel `k` moved to `alpha`, its rate held fixed.
pub fn with_bias(system: &SystemSpec, k: usize, alpha: f64) -> Result<SystemSpec> {
    let prior = system.prior();
    let r = system.channel(k)?.error_rate(prior);
    let (lo, hi) = feasible_alpha_range(prior, r);
    if alpha < lo - 1e-12 || alpha > hi + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "alpha {alpha} lies outside the feasible interval [{lo}, {hi}]"
        )));
    }
    system.with_channel(k, Channel::new(alpha.clamp(lo, hi), beta_for_rate(prior, r, alpha))?)
}

/// Minimum error probability with channel `k` moved to `alpha` at fixed rate.
pub fn error_at_bias(system: &SystemSpec, k: usize, alpha: f64) -> Result<f64> {
    Ok(exact_error_probability(&with_bias(system, k, alpha)?)?.p_error)
}

/// Sweeps `alpha_k` over its feasible interval with `grid_size` evenly spaced
/// points; the interior local maximum, when defined, is inserted as an extra point.
pub fn bias_sweep(system: &SystemSpec, k: usize, grid_size: usize) -> Result<BiasSweep> {
    require_canonical_system(system)?;
    if system.n() > SWEEP_LIMIT {
        return Err(Error::SizeGuard {
            n: system.n(),
            limit: SWEEP_LIMIT,
        });
    }
    if grid_size < 3 {
        return Err(Error::InvalidArgument(format!(
            "grid_size must be at least 3, got {grid_size}"
        )));
    }
    let prior = *system.prior();
    let r = system.channel(k)?.error_rate(&prior);
    let (lo, hi) = feasible_alpha_range(&prior, r);

    let local_max_alpha = if r >= prior.rho1() {
        if prior.rho0() == prior.rho1() {
            return Err(Error::UndefinedLocalMax);
        }
        Some(((r - prior.rho1()) / (prior.rho0() - prior.rho1())).clamp(lo, hi))
    } else {
        None
    };

    let last = (grid_size - 1) as f64;
    let mut alpha_grid: Vec<f64> = (0..grid_size)
        .map(|j| {
            if j + 1 == grid_size {
                hi
            } else {
                lo + (hi - lo) * j as f64 / last
            }
        })
        .collect();
    if let Some(peak) = local_max_alpha {
        match alpha_grid.iter().position(|&a| (a - peak).abs() <= 1e-12) {
            Some(i) => alpha_grid[i] = peak,
            None => {
                let at = alpha_grid.partition_point(|&a| a < peak);
                alpha_grid.insert(at, peak);
            }
        }
    }

    let beta_grid: Vec<f64> = alpha_grid.iter().map(|&a| beta_for_rate(&prior, r, a)).collect();
    let p_error_at = alpha_grid
        .iter()
        .zip(&beta_grid)
        .map(|(&a, &b)| {
            let moved = system.with_channel(k, Channel::new(a, b)?)?;
            Ok(exact_error_probability(&moved)?.p_error)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BiasSweep {
        channel_index: k,
        rate: r,
        alpha_grid,
        beta_grid,
        p_error_at,
        local_max_alpha,
    })
}

/// Derivative of `ln(A(y) / B(y))` in `alpha_k` when `beta_k` follows the rate
/// constraint `d beta_k / d alpha_k = -rho0 / rho1`.
///
/// Only channel `k`'s own factor depends on `alpha_k`, so the value is
/// `(rho1 - r_k) / (rho1 alpha_k (1 - beta_k))` for `y_k = 1` and
/// `(rho0 - r_k) / (rho1 beta_k (1 - alpha_k))` for `y_k = 0`.
pub fn llr_rate_constrained_derivative(system: &SystemSpec, k: usize, y: &OutcomeVector) -> Result<f64> {
    if y.len() != system.n() {
        return Err(Error::LengthMismatch {
            expected: system.n(),
            actual: y.len(),
        });
    }
    let prior = system.prior();
    let c = system.channel(k)?;
    let (alpha, beta) = (c.alpha(), c.beta());
    let interior = |v: f64| v > 0.0 && v < 1.0;
    if !(interior(alpha) && interior(beta)) {
        return Err(Error::BoundaryParameter(format!(
            "channel {k} has alpha = {alpha}, beta = {beta}; both must lie in (0, 1)"
        )));
    }
    let r = c.error_rate(prior);
    let (rho0, rho1) = (prior.rho0(), prior.rho1());
    Ok(if y.bits()[k] {
        (rho1 - r) / (rho1 * alpha * (1.0 - beta))
    } else {
        (rho0 - r) / (rho1 * beta * (1.0 - alpha))
    })
}
