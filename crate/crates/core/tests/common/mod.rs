//! Test-only oracles and generators, independent of the library's calculators.

#![allow(dead_code)]

use biasfusion::model::{canonicalize, Channel, Prior, SystemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `P(y | X = x)` for raw `(alpha, beta)` pairs, straight from the channel definition.
pub fn likelihood(params: &[(f64, f64)], y: u64, x: u8) -> f64 {
    params
        .iter()
        .enumerate()
        .map(|(i, &(alpha, beta))| {
            let one = (y >> i) & 1 == 1;
            match (x, one) {
                (0, true) => alpha,
                (0, false) => 1.0 - alpha,
                (_, true) => 1.0 - beta,
                (_, false) => beta,
            }
        })
        .product()
}

pub fn params(system: &SystemSpec) -> Vec<(f64, f64)> {
    system.channels().iter().map(|c| (c.alpha(), c.beta())).collect()
}

/// `sum_y min(rho0 A, rho1 B)` by a plain loop.
pub fn brute_min_error(rho0: f64, params: &[(f64, f64)]) -> f64 {
    let rho1 = 1.0 - rho0;
    (0..(1u64 << params.len()))
        .map(|y| f64::min(rho0 * likelihood(params, y, 0), rho1 * likelihood(params, y, 1)))
        .sum()
}

/// Error of an explicit decision table: wrong on `X = 1` where it says 0, and vice versa.
pub fn brute_policy_error(rho0: f64, params: &[(f64, f64)], decide: impl Fn(u64) -> u8) -> f64 {
    let rho1 = 1.0 - rho0;
    (0..(1u64 << params.len()))
        .map(|y| {
            if decide(y) == 0 {
                rho1 * likelihood(params, y, 1)
            } else {
                rho0 * likelihood(params, y, 0)
            }
        })
        .sum()
}

/// `ln(A(y) / B(y))` from raw parameters.
pub fn log_ratio(params: &[(f64, f64)], y: u64) -> f64 {
    (likelihood(params, y, 0) / likelihood(params, y, 1)).ln()
}

/// Random system with `rho0` in `[0.5, 0.95]` and arbitrary channels, canonicalized.
pub fn random_canonical_system(rng: &mut ChaCha8Rng, n: usize) -> SystemSpec {
    let rho0 = rng.gen_range(0.5..0.95);
    let channels = (0..n)
        .map(|_| Channel::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)).unwrap())
        .collect();
    let raw = SystemSpec::new(Prior::new(rho0).unwrap(), channels).unwrap();
    canonicalize(&raw).system
}

/// Random system whose parameters all lie strictly inside `(lo, 1 - lo)`.
pub fn random_interior_system(rng: &mut ChaCha8Rng, n: usize, lo: f64) -> SystemSpec {
    let rho0 = rng.gen_range(0.5..0.95);
    let channels = (0..n)
        .map(|_| Channel::new(rng.gen_range(lo..1.0 - lo), rng.gen_range(lo..1.0 - lo)).unwrap())
        .collect();
    canonicalize(&SystemSpec::new(Prior::new(rho0).unwrap(), channels).unwrap()).system
}

/// `C(n, k)` as a float by the multiplicative formula.
pub fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
