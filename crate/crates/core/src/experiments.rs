//! Batch jobs reproducing the error histogram at a fixed rate and the gain
//! convergence data, plus the calculator report used by `biasfusion pe`.

use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    exact_error_probability, fully_biased_error, identical_error_probability, log_identical_sum, ErrorReport, Method,
};
use crate::error::{Error, Result};
use crate::gains::{claim1_check, Claim1};
use crate::model::{canonicalize, random_system_with_rates, Prior, RateVector, SystemSpec};

/// Largest `n` accepted by [`error_histogram`].
pub const HIST_LIMIT: usize = 12;

/// Identical-channel systems above this size use the log-domain sum.
const DIRECT_BINOMIAL_LIMIT: usize = 1000;

/// Parameters and provenance of one emitted artifact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub output: Option<String>,
    pub seed: Option<u64>,
    pub version: String,
}

impl ExperimentManifest {
    pub fn new(command: &str, params: serde_json::Value, output: Option<String>, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            params,
            output,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Minimum error of an arbitrary system via the cheapest exact route.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeReport {
    pub n: usize,
    pub p_error: f64,
    pub log_p_error: f64,
    pub method: Method,
    /// `rho0 * prod(r_i / rho0) <= rho1` after canonicalization.
    pub product_condition: bool,
}

/// Canonicalizes, then uses the closed form for all-S systems, the binomial
/// sum for identical channels and enumeration otherwise.
pub fn error_report(system: &SystemSpec) -> Result<PeReport> {
    let canonical = canonicalize(system).system;
    let prior = *canonical.prior();
    let rates = canonical.rates();
    let bound = fully_biased_error(&prior, &rates)?;
    let report = if canonical.all_s_channels() {
        bound.report
    } else if let Some(c) = canonical.identical_channel() {
        let n = canonical.n();
        if n <= DIRECT_BINOMIAL_LIMIT {
            identical_error_probability(n, &prior, c.alpha(), c.beta())?
        } else {
            let log_p = log_identical_sum(n, &prior, c.alpha(), c.beta());
            ErrorReport {
                p_error: log_p.exp(),
                log_p_error: log_p,
                method: Method::LogBinomial,
            }
        }
    } else {
        exact_error_probability(&canonical)?
    };
    Ok(PeReport {
        n: canonical.n(),
        p_error: report.p_error,
        log_p_error: report.log_p_error,
        method: report.method,
        product_condition: bound.condition_holds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistReport {
    pub n: usize,
    pub rho0: f64,
    pub r: f64,
    pub samples: u64,
    pub seed: u64,
    pub min: f64,
    pub max: f64,
    /// Error of the all-S system: the floor of the histogram range.
    pub fully_biased: f64,
    /// Error of the all-unbiased system.
    pub unbiased: f64,
    pub bins: Vec<HistBin>,
}

impl HistReport {
    /// Writes `bin_lo,bin_hi,count` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_lo", "bin_hi", "count"])?;
        for b in &self.bins {
            w.write_record([crate::sig17(b.lo), crate::sig17(b.hi), b.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact minimum error of `samples` random systems sharing the rate `r`,
/// binned over the fixed range `[fully-biased error, rho1]`.
pub fn error_histogram(n: usize, prior: Prior, r: f64, samples: u64, seed: u64, bins: usize) -> Result<HistReport> {
    if n > HIST_LIMIT {
        return Err(Error::SizeGuard { n, limit: HIST_LIMIT });
    }
    if samples == 0 || bins == 0 {
        return Err(Error::InvalidArgument("samples and bins must be positive".into()));
    }
    let rates = RateVector::uniform(n, r)?;
    let floor = fully_biased_error(&prior, &rates)?.report.p_error;
    let unbiased = identical_error_probability(n, &prior, r, r)?.p_error;

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..samples).map(|_| master.next_u64()).collect();
    let values = seeds
        .par_iter()
        .map(|&s| Ok(exact_error_probability(&random_system_with_rates(prior, &rates, s)?)?.p_error))
        .collect::<Result<Vec<f64>>>()?;

    let ceiling = prior.rho1();
    let width = (ceiling - floor) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in &values {
        let idx = if width > 0.0 {
            ((v - floor) / width).floor()
        } else {
            0.0
        };
        counts[(idx.max(0.0) as usize).min(bins - 1)] += 1;
    }
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistBin {
            lo: floor + width * i as f64,
            hi: if i + 1 == bins {
                ceiling
            } else {
                floor + width * (i + 1) as f64
            },
            count,
        })
        .collect();

    Ok(HistReport {
        n,
        rho0: prior.rho0(),
        r,
        samples,
        seed,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        fully_biased: floor,
        unbiased,
        bins,
    })
}

/// Claim checks for `m = 1..=m_max`.
pub fn claim1_table(m_max: u32) -> Result<Vec<Claim1>> {
    (1..=m_max).map(claim1_check).collect()
}

pub fn write_claim1_csv<W: Write>(rows: &[Claim1], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "inequality", "identity"])?;
    for row in rows {
        w.write_record([row.m.to_string(), row.inequality.to_string(), row.identity.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
