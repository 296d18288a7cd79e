//! Seeded simulation of the source and channels.
//!
//! Every trial draws `X` and then `Y_1..Y_n`, each from one uniform variate.
//! Variates come from ChaCha8 seeded with `seed_from_u64(seed)`; trial `t`
//! reads the `n + 1` consecutive 64-bit outputs starting at output
//! `t * (n + 1)`. Because the stream is addressed by trial number, any split
//! of the trials into shards reproduces the same draws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decision::DecisionPolicy;
use crate::error::{Error, Result};
use crate::model::SystemSpec;

/// Identity of the random source recorded in every [`SimResult`].
pub const GENERATOR: &str = "chacha8/seed_from_u64/u64-per-draw";

/// Trials per shard when the caller does not choose.
pub const DEFAULT_SHARD_TRIALS: u64 = 1 << 15;

/// Largest `n` for which per-outcome counts are kept.
pub const HISTOGRAM_LIMIT: usize = 16;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub system: SystemSpec,
}

impl SimConfig {
    pub fn new(system: SystemSpec, trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if system.n() > 63 {
            return Err(Error::SizeGuard {
                n: system.n(),
                limit: 63,
            });
        }
        Ok(Self { trials, seed, system })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub trials: u64,
    pub errors: u64,
    pub empirical_error: f64,
    pub std_error: f64,
    pub seed: u64,
    #[serde(skip)]
    pub generator: &'static str,
    /// Visits per outcome index, for `n <= 16`.
    #[serde(skip)]
    pub per_outcome_counts: Option<Vec<u64>>,
}

impl SimResult {
    fn from_counts(trials: u64, errors: u64, seed: u64, per_outcome_counts: Option<Vec<u64>>) -> Self {
        let p = errors as f64 / trials as f64;
        Self {
            trials,
            errors,
            empirical_error: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            seed,
            generator: GENERATOR,
            per_outcome_counts,
        }
    }

    /// `{"trials", "errors", "empirical_error", "std_error", "seed"}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

struct TrialStream {
    rng: ChaCha8Rng,
}

impl TrialStream {
    fn at(seed: u64, draws_per_trial: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // word position counts 32-bit words; every draw consumes two
        rng.set_word_pos(2 * u128::from(draws_per_trial) * u128::from(trial));
        Self { rng }
    }

    #[inline]
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Source bit and integer-encoded channel outputs of the next trial.
    #[inline]
    fn next_trial(&mut self, system: &SystemSpec) -> (u8, u64) {
        let x = u8::from(self.uniform() < system.prior().rho1());
        let mut y = 0u64;
        for (i, c) in system.channels().iter().enumerate() {
            let u = self.uniform();
            let one = if x == 0 { u < c.alpha() } else { u >= c.beta() };
            y |= u64::from(one) << i;
        }
        (x, y)
    }
}

struct ShardCounts {
    errors: Vec<u64>,
    outcomes: Option<Vec<u64>>,
}

fn run_shard(config: &SimConfig, policies: &[&DecisionPolicy], start: u64, end: u64) -> ShardCounts {
    let n = config.system.n();
    let draws = n as u64 + 1;
    let mut stream = TrialStream::at(config.seed, draws, start);
    let mut errors = vec![0u64; policies.len()];
    let mut outcomes = (n <= HISTOGRAM_LIMIT).then(|| vec![0u64; 1 << n]);
    for _ in start..end {
        let (x, y) = stream.next_trial(&config.system);
        for (count, policy) in errors.iter_mut().zip(policies) {
            *count += u64::from(policy.decide_index(y) != x);
        }
        if let Some(h) = outcomes.as_mut() {
            h[y as usize] += 1;
        }
    }
    ShardCounts { errors, outcomes }
}

fn run(config: &SimConfig, policies: &[&DecisionPolicy], shard_trials: u64) -> Result<Vec<SimResult>> {
    if policies.is_empty() {
        return Err(Error::InvalidArgument("at least one policy is required".into()));
    }
    for p in policies {
        if p.system() != &config.system {
            return Err(Error::LengthMismatch {
                expected: config.system.n(),
                actual: p.system().n(),
            });
        }
    }
    let shard_trials = shard_trials.max(1);
    let shards = config.trials.div_ceil(shard_trials);
    let counts: Vec<ShardCounts> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let start = s * shard_trials;
            run_shard(config, policies, start, (start + shard_trials).min(config.trials))
        })
        .collect();

    let mut errors = vec![0u64; policies.len()];
    let mut outcomes: Option<Vec<u64>> = None;
    for shard in counts {
        errors.iter_mut().zip(&shard.errors).for_each(|(t, e)| *t += e);
        if let Some(h) = shard.outcomes {
            match outcomes.as_mut() {
                Some(total) => total.iter_mut().zip(&h).for_each(|(t, c)| *t += c),
                None => outcomes = Some(h),
            }
        }
    }
    Ok(errors
        .into_iter()
        .map(|e| SimResult::from_counts(config.trials, e, config.seed, outcomes.clone()))
        .collect())
}

/// Empirical error of `policy` over `config.trials` seeded trials.
pub fn simulate(config: &SimConfig, policy: &DecisionPolicy) -> Result<SimResult> {
    simulate_sharded(config, policy, DEFAULT_SHARD_TRIALS)
}

/// As [`simulate`], with an explicit shard size. The result does not depend on it.
pub fn simulate_sharded(config: &SimConfig, policy: &DecisionPolicy, shard_trials: u64) -> Result<SimResult> {
    Ok(run(config, &[policy], shard_trials)?.remove(0))
}

/// Evaluates every policy on the same stream of `(X, Y)` draws.
pub fn simulate_policy_comparison(config: &SimConfig, policies: &[DecisionPolicy]) -> Result<Vec<SimResult>> {
    let refs: Vec<&DecisionPolicy> = policies.iter().collect();
    run(config, &refs, DEFAULT_SHARD_TRIALS)
}
