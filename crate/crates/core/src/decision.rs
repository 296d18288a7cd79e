//! The error-optimal (MAP) fusion rule.
//!
//! For an outcome `y` the consumer compares `rho0 * A(y)` against
//! `rho1 * B(y)`, where `A(y) = P(y | X = 0)` and `B(y) = P(y | X = 1)`, and
//! decides `1` only when the second is strictly larger. Ties go to `0`, the
//! a-priori likely value for canonical priors.
//!
//! Likelihoods are products of probabilities, never sums of logs, so the
//! exact zeros produced by S- and Z-channels survive unchanged.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Channel, Prior, SystemSpec};

/// Largest `n` for which a full table over `{0,1}^n` is materialized.
pub const TABLE_LIMIT: usize = 24;

/// Channels folded into the low half of an outcome index.
const LOW_BITS: usize = 12;

/// A realization of the channel outputs.
///
/// The integer encoding used throughout has bit `i` equal to `y_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OutcomeVector {
    bits: Vec<bool>,
}

impl OutcomeVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_index(index: u64, n: usize) -> Self {
        Self {
            bits: (0..n).map(|i| i < 64 && (index >> i) & 1 == 1).collect(),
        }
    }

    pub fn all_ones(n: usize) -> Self {
        Self { bits: vec![true; n] }
    }

    /// Integer encoding; only meaningful for `n <= 64`.
    pub fn index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0u64, |acc, (i, _)| acc | (1u64 << i))
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            bits: perm.iter().map(|&p| self.bits[p]).collect(),
        }
    }
}

/// `A(y) = P(y | X = 0)` and `B(y) = P(y | X = 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LikelihoodPair {
    pub a: f64,
    pub b: f64,
}

/// The likelihood ratio `A / B`, including its degenerate forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LikelihoodRatio {
    Finite(f64),
    /// `b = 0 < a`.
    Infinite,
    /// `a = b = 0`: the outcome is impossible under both hypotheses.
    Undefined,
}

impl LikelihoodPair {
    pub fn delta(&self) -> f64 {
        self.a - self.b
    }

    pub fn ratio(&self) -> LikelihoodRatio {
        match (self.a, self.b) {
            (a, b) if b > 0.0 => LikelihoodRatio::Finite(a / b),
            (a, _) if a > 0.0 => LikelihoodRatio::Infinite,
            _ => LikelihoodRatio::Undefined,
        }
    }

    /// MAP decision under `prior`, ties toward 0.
    pub fn decide(&self, prior: &Prior) -> u8 {
        decide_pair(prior, self.a, self.b)
    }
}

#[inline]
pub(crate) fn decide_pair(prior: &Prior, a: f64, b: f64) -> u8 {
    u8::from(prior.rho0() * a < prior.rho1() * b)
}

fn fold_likelihoods(channels: &[Channel], bit: impl Fn(usize) -> bool) -> (f64, f64) {
    channels.iter().enumerate().fold((1.0, 1.0), |(a, b), (i, c)| {
        (a * c.likelihood(bit(i), 0), b * c.likelihood(bit(i), 1))
    })
}

/// Products grouped as (first `LOW_BITS` channels) x (rest), matching
/// `OutcomeLikelihoods` so tables and pointwise calls agree bit for bit.
fn grouped_likelihoods(channels: &[Channel], bit: impl Fn(usize) -> bool) -> (f64, f64) {
    let split = channels.len().min(LOW_BITS);
    let (low, high) = channels.split_at(split);
    let (a_lo, b_lo) = fold_likelihoods(low, &bit);
    let (a_hi, b_hi) = fold_likelihoods(high, |i| bit(i + split));
    (a_lo * a_hi, b_lo * b_hi)
}

fn check_len(system: &SystemSpec, y: &OutcomeVector) -> Result<()> {
    if y.len() == system.n() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: system.n(),
            actual: y.len(),
        })
    }
}

/// Per-outcome likelihoods as exact products in the probability domain.
pub fn likelihoods(system: &SystemSpec, y: &OutcomeVector) -> Result<LikelihoodPair> {
    check_len(system, y)?;
    let (a, b) = grouped_likelihoods(system.channels(), |i| y.bits()[i]);
    Ok(LikelihoodPair { a, b })
}

/// MAP decision: `1` iff `rho0 * A(y) < rho1 * B(y)`.
pub fn map_decide(system: &SystemSpec, y: &OutcomeVector) -> Result<u8> {
    Ok(likelihoods(system, y)?.decide(system.prior()))
}

/// Likelihoods for every outcome of a system, factored into a low table over
/// the first channels and a high table over the rest.
pub(crate) struct OutcomeLikelihoods {
    low_bits: usize,
    a_low: Vec<f64>,
    b_low: Vec<f64>,
    a_high: Vec<f64>,
    b_high: Vec<f64>,
}

fn product_table(channels: &[Channel], x: u8) -> Vec<f64> {
    let mut table = Vec::with_capacity(1 << channels.len());
    table.push(1.0);
    for c in channels {
        let (p0, p1) = (c.likelihood(false, x), c.likelihood(true, x));
        let len = table.len();
        for j in 0..len {
            let v = table[j];
            table[j] = v * p0;
            table.push(v * p1);
        }
    }
    table
}

impl OutcomeLikelihoods {
    pub(crate) fn new(system: &SystemSpec) -> Self {
        let low_bits = system.n().min(LOW_BITS);
        let (low, high) = system.channels().split_at(low_bits);
        Self {
            low_bits,
            a_low: product_table(low, 0),
            b_low: product_table(low, 1),
            a_high: product_table(high, 0),
            b_high: product_table(high, 1),
        }
    }

    /// Number of outcomes sharing one high-table entry.
    pub(crate) fn chunk_len(&self) -> usize {
        self.a_low.len()
    }

    pub(crate) fn chunks(&self) -> usize {
        self.a_high.len()
    }

    /// Calls `f(index, a, b)` for every outcome in chunk `h`, in index order.
    #[inline]
    pub(crate) fn for_each_in_chunk(&self, h: usize, mut f: impl FnMut(usize, f64, f64)) {
        let (ah, bh) = (self.a_high[h], self.b_high[h]);
        let base = h << self.low_bits;
        for (j, (al, bl)) in self.a_low.iter().zip(&self.b_low).enumerate() {
            f(base | j, al * ah, bl * bh);
        }
    }
}

/// Additive log-likelihood contribution of one channel reading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogWeight {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
    /// `0 / 0`: the reading is impossible under both hypotheses.
    Indeterminate,
}

impl LogWeight {
    fn ln_ratio(num: f64, den: f64) -> Self {
        match (num > 0.0, den > 0.0) {
            (true, true) => LogWeight::Finite((num / den).ln()),
            (true, false) => LogWeight::PlusInfinity,
            (false, true) => LogWeight::MinusInfinity,
            (false, false) => LogWeight::Indeterminate,
        }
    }
}

/// `ln(A_i / B_i)` for each possible reading of channel `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LlrWeight {
    /// `ln(alpha / (1 - beta))`
    pub on_one: LogWeight,
    /// `ln((1 - alpha) / beta)`
    pub on_zero: LogWeight,
}

impl LlrWeight {
    pub fn for_reading(&self, y: bool) -> LogWeight {
        if y {
            self.on_one
        } else {
            self.on_zero
        }
    }
}

pub fn llr_weights(system: &SystemSpec) -> Vec<LlrWeight> {
    system
        .channels()
        .iter()
        .map(|c| LlrWeight {
            on_one: LogWeight::ln_ratio(c.alpha(), 1.0 - c.beta()),
            on_zero: LogWeight::ln_ratio(1.0 - c.alpha(), c.beta()),
        })
        .collect()
}

/// Decision from the additive LLR form: `1` iff `sum w_i(y_i) < ln(rho1 / rho0)`.
///
/// A `-inf` term forces `1` and a `+inf` term forces `0`. When both appear, or
/// a term is indeterminate, the probability-domain rule decides.
pub fn llr_decide(system: &SystemSpec, weights: &[LlrWeight], y: &OutcomeVector) -> Result<u8> {
    check_len(system, y)?;
    if weights.len() != system.n() {
        return Err(Error::LengthMismatch {
            expected: system.n(),
            actual: weights.len(),
        });
    }
    let (mut sum, mut plus, mut minus) = (0.0, false, false);
    for (w, &bit) in weights.iter().zip(y.bits()) {
        match w.for_reading(bit) {
            LogWeight::Finite(v) => sum += v,
            LogWeight::PlusInfinity => plus = true,
            LogWeight::MinusInfinity => minus = true,
            LogWeight::Indeterminate => return map_decide(system, y),
        }
    }
    match (plus, minus) {
        (true, true) => map_decide(system, y),
        (true, false) => Ok(0),
        (false, true) => Ok(1),
        (false, false) => {
            let prior = system.prior();
            Ok(u8::from(sum < (prior.rho1() / prior.rho0()).ln()))
        }
    }
}

/// Decision bits over `{0,1}^n`, one bit per outcome index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyTable {
    n: usize,
    bytes: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct PolicyTableJson {
    n: usize,
    bits: String,
}

impl PolicyTable {
    fn byte_len(n: usize) -> usize {
        (1usize << n).div_ceil(8)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        if n > TABLE_LIMIT {
            return Err(Error::SizeGuard { n, limit: TABLE_LIMIT });
        }
        Ok(Self {
            n,
            bytes: vec![0; Self::byte_len(n)],
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(u64) -> u8) -> Result<Self> {
        let mut table = Self::zeros(n)?;
        for idx in 0..(1u64 << n) {
            table.set(idx, f(idx));
        }
        Ok(table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, index: u64) -> u8 {
        (self.bytes[(index / 8) as usize] >> (index % 8)) & 1
    }

    pub fn set(&mut self, index: u64, decision: u8) {
        let byte = &mut self.bytes[(index / 8) as usize];
        let mask = 1u8 << (index % 8);
        if decision == 0 {
            *byte &= !mask;
        } else {
            *byte |= mask;
        }
    }

    pub fn count_ones(&self) -> u64 {
        // padding bits are always zero
        self.bytes.iter().map(|b| u64::from(b.count_ones())).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len() as u64).filter(|&i| self.get(i) == 1)
    }

    /// `{"n": n, "bits": base64(little-endian bit string)}`; bit `j` of the
    /// string is byte `j / 8`, bit `j % 8`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PolicyTableJson {
            n: self.n,
            bits: BASE64.encode(&self.bytes),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PolicyTableJson = serde_json::from_str(text)?;
        if raw.n > TABLE_LIMIT {
            return Err(Error::SizeGuard {
                n: raw.n,
                limit: TABLE_LIMIT,
            });
        }
        let bytes = BASE64
            .decode(raw.bits.as_bytes())
            .map_err(|e| Error::MalformedTable(e.to_string()))?;
        if bytes.len() != Self::byte_len(raw.n) {
            return Err(Error::MalformedTable(format!(
                "expected {} bytes for n = {}, got {}",
                Self::byte_len(raw.n),
                raw.n,
                bytes.len()
            )));
        }
        let mut table = Self { n: raw.n, bytes };
        // clear padding
        if raw.n < 3 {
            table.bytes[0] &= (1u8 << (1 << raw.n)) - 1;
        }
        Ok(table)
    }
}

#[derive(Clone, Debug)]
enum Rule {
    Map,
    Table(PolicyTable),
}

/// A decision rule bound to the system it was built for.
#[derive(Clone, Debug)]
pub struct DecisionPolicy {
    system: SystemSpec,
    rule: Rule,
}

impl DecisionPolicy {
    /// The MAP comparator, evaluated on demand.
    pub fn map(system: &SystemSpec) -> Self {
        Self {
            system: system.clone(),
            rule: Rule::Map,
        }
    }

    pub fn from_table(system: &SystemSpec, table: PolicyTable) -> Result<Self> {
        if table.n() != system.n() {
            return Err(Error::LengthMismatch {
                expected: system.n(),
                actual: table.n(),
            });
        }
        Ok(Self {
            system: system.clone(),
            rule: Rule::Table(table),
        })
    }

    /// Ignores the channels and always answers `decision`.
    pub fn constant(system: &SystemSpec, decision: u8) -> Result<Self> {
        let table = PolicyTable::from_fn(system.n(), |_| decision)?;
        Self::from_table(system, table)
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn table(&self) -> Option<&PolicyTable> {
        match &self.rule {
            Rule::Table(t) => Some(t),
            Rule::Map => None,
        }
    }

    pub fn decide(&self, y: &OutcomeVector) -> Result<u8> {
        check_len(&self.system, y)?;
        match &self.rule {
            Rule::Map => map_decide(&self.system, y),
            Rule::Table(t) => Ok(t.get(y.index())),
        }
    }

    /// Decision for an integer-encoded outcome; requires `n <= 64`.
    pub fn decide_index(&self, index: u64) -> u8 {
        match &self.rule {
            Rule::Table(t) => t.get(index),
            Rule::Map => {
                let (a, b) = grouped_likelihoods(self.system.channels(), |i| (index >> i) & 1 == 1);
                decide_pair(self.system.prior(), a, b)
            }
        }
    }
}

/// Materializes the MAP rule over every outcome (`n <= TABLE_LIMIT`).
pub fn policy_table(system: &SystemSpec) -> Result<DecisionPolicy> {
    policy_table_with_limit(system, TABLE_LIMIT)
}

pub fn policy_table_with_limit(system: &SystemSpec, limit: usize) -> Result<DecisionPolicy> {
    let limit = limit.min(TABLE_LIMIT);
    if system.n() > limit {
        return Err(Error::SizeGuard { n: system.n(), limit });
    }
    let mut table = PolicyTable::zeros(system.n())?;
    let lik = OutcomeLikelihoods::new(system);
    let prior = *system.prior();
    let chunk_bytes = lik.chunk_len().div_ceil(8);
    table
        .bytes
        .par_chunks_mut(chunk_bytes)
        .enumerate()
        .for_each(|(h, bytes)| {
            let base = h * lik.chunk_len();
            lik.for_each_in_chunk(h, |idx, a, b| {
                let local = idx - base;
                bytes[local / 8] |= decide_pair(&prior, a, b) << (local % 8);
            });
        });
    DecisionPolicy::from_table(system, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_fully_biased_system, make_unbiased_system, RateVector};

    fn s_system(n: usize, rho0: f64, r: f64) -> SystemSpec {
        make_fully_biased_system(Prior::new(rho0).unwrap(), &RateVector::uniform(n, r).unwrap()).unwrap()
    }

    fn y(bits: &[u8]) -> OutcomeVector {
        OutcomeVector::new(bits.iter().map(|&b| b == 1).collect())
    }

    #[test]
    fn likelihood_examples() {
        let s = s_system(2, 0.6, 0.3);
        assert_eq!(
            likelihoods(&s, &y(&[1, 1])).unwrap(),
            LikelihoodPair { a: 0.25, b: 1.0 }
        );
        assert_eq!(
            likelihoods(&s, &y(&[0, 1])).unwrap(),
            LikelihoodPair { a: 0.25, b: 0.0 }
        );
        let u = make_unbiased_system(1, Prior::new(0.6).unwrap(), 0.3).unwrap();
        let p = likelihoods(&u, &y(&[1])).unwrap();
        assert!((p.a - 0.3).abs() < 1e-15 && (p.b - 0.7).abs() < 1e-15);
        assert!(likelihoods(&u, &y(&[1, 0])).is_err());
    }

    #[test]
    fn ratio_degenerate_forms() {
        assert_eq!(LikelihoodPair { a: 0.25, b: 0.0 }.ratio(), LikelihoodRatio::Infinite);
        assert_eq!(LikelihoodPair { a: 0.0, b: 0.0 }.ratio(), LikelihoodRatio::Undefined);
        assert_eq!(LikelihoodPair { a: 0.25, b: 0.5 }.ratio(), LikelihoodRatio::Finite(0.5));
        assert_eq!(LikelihoodPair { a: 0.25, b: 0.5 }.delta(), -0.25);
    }

    #[test]
    fn s_system_uses_product_rule() {
        for n in 1..=6 {
            let s = s_system(n, 0.6, 0.3);
            for idx in 0..(1u64 << n) {
                let out = OutcomeVector::from_index(idx, n);
                let expected = u8::from(out.ones() == n);
                assert_eq!(map_decide(&s, &out).unwrap(), expected, "n={n} y={idx:b}");
            }
        }
    }

    #[test]
    fn single_unbiased_channel_follows_reading() {
        let u = make_unbiased_system(1, Prior::new(0.6).unwrap(), 0.3).unwrap();
        // 0.6 * 0.3 = 0.18 < 0.4 * 0.7 = 0.28
        assert_eq!(map_decide(&u, &y(&[0])).unwrap(), 0);
        assert_eq!(map_decide(&u, &y(&[1])).unwrap(), 1);
    }

    #[test]
    fn llr_weight_examples() {
        let u = make_unbiased_system(1, Prior::new(0.6).unwrap(), 0.3).unwrap();
        let w = llr_weights(&u)[0];
        match (w.on_one, w.on_zero) {
            (LogWeight::Finite(a), LogWeight::Finite(b)) => {
                assert!((a + 0.8472978603872037).abs() < 1e-12);
                assert!((a + b).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        let s = s_system(1, 0.6, 0.3);
        let w = llr_weights(&s)[0];
        assert_eq!(w.on_zero, LogWeight::PlusInfinity);
        assert!(matches!(w.on_one, LogWeight::Finite(v) if (v - 0.5f64.ln()).abs() < 1e-15));
        let dead = SystemSpec::from_params(0.6, &[0.0], &[1.0]).unwrap();
        assert_eq!(llr_weights(&dead)[0].on_one, LogWeight::Indeterminate);
    }

    #[test]
    fn llr_infinite_markers_decide() {
        // S-channel reading 0 is impossible under X = 1; Z-channel reading 1 impossible under X = 0.
        let sys = SystemSpec::from_params(0.6, &[0.5, 0.0], &[0.0, 0.4]).unwrap();
        let w = llr_weights(&sys);
        for idx in 0..4 {
            let out = OutcomeVector::from_index(idx, 2);
            assert_eq!(llr_decide(&sys, &w, &out).unwrap(), map_decide(&sys, &out).unwrap());
        }
    }

    #[test]
    fn table_matches_pointwise_decisions() {
        let s = s_system(3, 0.6, 0.3);
        let t = policy_table(&s).unwrap();
        let table = t.table().unwrap();
        assert_eq!(table.count_ones(), 1);
        assert_eq!(table.get(0b111), 1);

        let u = make_unbiased_system(2, Prior::new(0.6).unwrap(), 0.3).unwrap();
        let t = policy_table(&u).unwrap();
        let bits: Vec<u8> = (0..4).map(|i| t.table().unwrap().get(i)).collect();
        assert_eq!(bits, vec![0, 0, 0, 1]);
    }

    #[test]
    fn tie_breaks_toward_zero() {
        let sys = SystemSpec::from_params(0.9, &[0.1], &[0.1]).unwrap();
        let t = policy_table(&sys).unwrap();
        assert_eq!(t.table().unwrap().count_ones(), 0);
        // exact tie in binary floating point
        let tie = SystemSpec::from_params(0.5, &[0.25], &[0.75]).unwrap();
        assert_eq!(map_decide(&tie, &y(&[1])).unwrap(), 0);
        assert_eq!(map_decide(&tie, &y(&[0])).unwrap(), 0);
    }

    #[test]
    fn table_size_guard() {
        let u = make_unbiased_system(25, Prior::new(0.6).unwrap(), 0.3).unwrap();
        assert!(matches!(policy_table(&u), Err(Error::SizeGuard { n: 25, limit: 24 })));
        let small = make_unbiased_system(5, Prior::new(0.6).unwrap(), 0.3).unwrap();
        assert!(matches!(
            policy_table_with_limit(&small, 4),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn table_json_round_trip() {
        let u = make_unbiased_system(5, Prior::new(0.6).unwrap(), 0.3).unwrap();
        let t = policy_table(&u).unwrap();
        let json = t.table().unwrap().to_json().unwrap();
        assert_eq!(&PolicyTable::from_json(&json).unwrap(), t.table().unwrap());
        let s = s_system(2, 0.6, 0.3);
        let json = policy_table(&s).unwrap().table().unwrap().to_json().unwrap();
        // only index 3 set: byte 0b0000_1000
        assert_eq!(json, r#"{"n":2,"bits":"CA=="}"#);
        assert!(PolicyTable::from_json(r#"{"n":4,"bits":"CA=="}"#).is_err());
        assert!(PolicyTable::from_json(r#"{"n":2,"bits":"!!"}"#).is_err());
    }

    #[test]
    fn policy_decide_index_agrees_with_table() {
        let sys = SystemSpec::from_params(0.7, &[0.1, 0.3, 0.05], &[0.4, 0.2, 0.6]).unwrap();
        let map = DecisionPolicy::map(&sys);
        let table = policy_table(&sys).unwrap();
        for idx in 0..8 {
            let out = OutcomeVector::from_index(idx, 3);
            assert_eq!(map.decide_index(idx), table.decide(&out).unwrap());
            assert_eq!(map.decide(&out).unwrap(), table.decide_index(idx));
        }
        let constant = DecisionPolicy::constant(&sys, 1).unwrap();
        assert_eq!(constant.table().unwrap().count_ones(), 8);
        let other = make_unbiased_system(2, Prior::new(0.6).unwrap(), 0.3).unwrap();
        assert!(DecisionPolicy::from_table(&other, table.table().unwrap().clone()).is_err());
    }

    #[test]
    fn outcome_index_encoding() {
        let out = y(&[1, 0, 1]);
        assert_eq!(out.index(), 0b101);
        assert_eq!(OutcomeVector::from_index(0b101, 3), out);
        assert_eq!(out.ones(), 2);
    }
}
