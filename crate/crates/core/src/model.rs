//! Priors, channels and systems of independent binary channels.
//!
//! A [`SystemSpec`] is the object every calculator in this crate consumes:
//! a source prior `(rho0, rho1)` plus one `(alpha, beta)` pair per channel,
//! where `alpha = P(Y = 1 | X = 0)` and `beta = P(Y = 0 | X = 1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decision::OutcomeVector;
use crate::error::{Error, Result};

/// Tolerance used when checking that rates and priors are reproduced.
pub const RATE_TOL: f64 = 1e-12;

fn check_prob(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::prob(name, value))
    }
}

/// Distribution of the source bit `X`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prior {
    rho0: f64,
    rho1: f64,
}

impl Prior {
    /// Builds the prior `(rho0, 1 - rho0)`.
    pub fn new(rho0: f64) -> Result<Self> {
        let rho0 = check_prob("rho0", rho0)?;
        Ok(Self { rho0, rho1: 1.0 - rho0 })
    }

    pub fn from_pair(rho0: f64, rho1: f64) -> Result<Self> {
        check_prob("rho0", rho0)?;
        check_prob("rho1", rho1)?;
        if (rho0 + rho1 - 1.0).abs() > RATE_TOL {
            return Err(Error::InvalidPrior { rho0, rho1 });
        }
        Ok(Self { rho0, rho1 })
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn rho1(&self) -> f64 {
        self.rho1
    }

    /// Mass of source value `x`.
    pub fn mass(&self, x: u8) -> f64 {
        if x == 0 {
            self.rho0
        } else {
            self.rho1
        }
    }

    /// `rho0 >= rho1`.
    pub fn is_canonical(&self) -> bool {
        self.rho0 >= self.rho1
    }

    /// One of the two source values has zero mass.
    pub fn is_degenerate(&self) -> bool {
        self.rho0 == 0.0 || self.rho1 == 0.0
    }

    /// The prior seen after relabeling `X <-> 1 - X`.
    pub fn swapped(&self) -> Self {
        Self {
            rho0: self.rho1,
            rho1: self.rho0,
        }
    }

    pub(crate) fn require_canonical(&self) -> Result<()> {
        if self.is_canonical() {
            Ok(())
        } else {
            Err(Error::NonCanonicalPrior { rho0: self.rho0 })
        }
    }
}

/// One binary channel, described by its two crossover probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Channel {
    alpha: f64,
    beta: f64,
}

impl Channel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Ok(Self {
            alpha: check_prob("alpha", alpha)?,
            beta: check_prob("beta", beta)?,
        })
    }

    /// Symmetric channel flipping either input with probability `p`.
    pub fn unbiased(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    /// Channel that never flips a `1` (`beta = 0`).
    pub fn s_channel(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0)
    }

    /// Channel that never flips a `0` (`alpha = 0`).
    pub fn z_channel(beta: f64) -> Result<Self> {
        Self::new(0.0, beta)
    }

    /// `P(Y = 1 | X = 0)`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `P(Y = 0 | X = 1)`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_unbiased(&self) -> bool {
        self.alpha == self.beta
    }

    pub fn is_s_channel(&self) -> bool {
        self.beta == 0.0
    }

    pub fn is_z_channel(&self) -> bool {
        self.alpha == 0.0
    }

    pub fn is_fully_biased(&self) -> bool {
        self.is_s_channel() || self.is_z_channel()
    }

    /// `P(Y = y | X = x)`.
    pub fn likelihood(&self, y: bool, x: u8) -> f64 {
        match (x, y) {
            (0, true) => self.alpha,
            (0, false) => 1.0 - self.alpha,
            (_, true) => 1.0 - self.beta,
            (_, false) => self.beta,
        }
    }

    pub fn error_rate(&self, prior: &Prior) -> f64 {
        error_rate(self, prior)
    }

    /// Same channel with its output bit inverted.
    pub fn output_flipped(&self) -> Self {
        Self {
            alpha: 1.0 - self.alpha,
            beta: 1.0 - self.beta,
        }
    }

    /// Same channel with both input and output labels swapped.
    pub fn relabeled(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }
}

/// Prior-weighted flip probability `rho0 * alpha + rho1 * beta`.
pub fn error_rate(channel: &Channel, prior: &Prior) -> f64 {
    prior.rho0 * channel.alpha + prior.rho1 * channel.beta
}

/// Per-channel error rates.
#[derive(Clone, Debug, PartialEq)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::EmptySystem);
        }
        for &r in &rates {
            check_prob("rate", r)?;
        }
        Ok(Self(rates))
    }

    pub fn uniform(n: usize, r: f64) -> Result<Self> {
        Self::new(vec![r; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }

    fn require_at_most_half(&self) -> Result<()> {
        match self.0.iter().find(|&&r| r > 0.5) {
            Some(&rate) => Err(Error::InvalidRate {
                rate,
                range: "[0, 1/2]",
            }),
            None => Ok(()),
        }
    }
}

/// A prior together with an ordered list of independent channels.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    prior: Prior,
    channels: Vec<Channel>,
}

impl SystemSpec {
    /// Rejects empty channel lists and priors where one source value has no mass.
    pub fn new(prior: Prior, channels: Vec<Channel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::EmptySystem);
        }
        if prior.is_degenerate() {
            return Err(Error::DegeneratePrior { rho0: prior.rho0 });
        }
        Ok(Self { prior, channels })
    }

    pub fn from_params(rho0: f64, alpha: &[f64], beta: &[f64]) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::LengthMismatch {
                expected: alpha.len(),
                actual: beta.len(),
            });
        }
        let channels = alpha
            .iter()
            .zip(beta)
            .map(|(&a, &b)| Channel::new(a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(Prior::new(rho0)?, channels)
    }

    pub fn n(&self) -> usize {
        self.channels.len()
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, k: usize) -> Result<&Channel> {
        self.channels
            .get(k)
            .ok_or(Error::ChannelIndex { index: k, n: self.n() })
    }

    pub fn rates(&self) -> RateVector {
        RateVector(self.channels.iter().map(|c| error_rate(c, &self.prior)).collect())
    }

    /// `rho0 >= rho1` and every channel rate is at most one half.
    pub fn is_canonical(&self) -> bool {
        self.prior.is_canonical() && self.rates().iter().all(|r| r <= 0.5)
    }

    /// The shared channel when all channels are identical.
    pub fn identical_channel(&self) -> Option<Channel> {
        let first = self.channels[0];
        self.channels.iter().all(|c| *c == first).then_some(first)
    }

    pub fn all_s_channels(&self) -> bool {
        self.channels.iter().all(Channel::is_s_channel)
    }

    /// Copy of the system with channel `k` replaced.
    pub fn with_channel(&self, k: usize, channel: Channel) -> Result<Self> {
        self.channel(k)?;
        let mut channels = self.channels.clone();
        channels[k] = channel;
        Ok(Self {
            prior: self.prior,
            channels,
        })
    }

    /// Reorders channels so that new channel `i` is old channel `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: perm.len(),
            });
        }
        let channels = perm
            .iter()
            .map(|&p| self.channel(p).copied())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            prior: self.prior,
            channels,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SystemJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<SystemJson>(text)?.try_into()
    }
}

/// Wire form of a system: `{"n", "rho0", "alpha", "beta"}` in that order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemJson {
    pub n: usize,
    pub rho0: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl From<&SystemSpec> for SystemJson {
    fn from(system: &SystemSpec) -> Self {
        Self {
            n: system.n(),
            rho0: system.prior.rho0,
            alpha: system.channels.iter().map(Channel::alpha).collect(),
            beta: system.channels.iter().map(Channel::beta).collect(),
        }
    }
}

impl TryFrom<SystemJson> for SystemSpec {
    type Error = Error;

    fn try_from(raw: SystemJson) -> Result<Self> {
        for len in [raw.alpha.len(), raw.beta.len()] {
            if len != raw.n {
                return Err(Error::LengthMismatch {
                    expected: raw.n,
                    actual: len,
                });
            }
        }
        SystemSpec::from_params(raw.rho0, &raw.alpha, &raw.beta)
    }
}

/// Record of the relabelings applied by [`canonicalize`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transform {
    /// Source labels (and therefore every output label) were swapped.
    pub labels_swapped: bool,
    /// Channels whose output was inverted after any label swap.
    pub flipped: Vec<usize>,
}

impl Transform {
    pub fn is_identity(&self) -> bool {
        !self.labels_swapped && self.flipped.is_empty()
    }

    /// Maps an outcome of the original system to the canonical system.
    pub fn map_outcome(&self, y: &OutcomeVector) -> OutcomeVector {
        let mut bits: Vec<bool> = y.bits().to_vec();
        if self.labels_swapped {
            bits.iter_mut().for_each(|b| *b = !*b);
        }
        for &i in &self.flipped {
            bits[i] = !bits[i];
        }
        OutcomeVector::new(bits)
    }

    /// Maps a decision about the canonical source back to the original labels.
    pub fn map_decision(&self, decision: u8) -> u8 {
        if self.labels_swapped {
            1 - decision
        } else {
            decision
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Canonical {
    pub system: SystemSpec,
    pub transform: Transform,
}

/// Relabels a system so that `rho0 >= rho1` and every rate is at most one half.
///
/// Swapping the source labels swaps `alpha` and `beta` of every channel (both
/// input and output are renamed); a channel whose rate still exceeds one half
/// then has its output inverted, which maps its rate `r` to `1 - r`.
pub fn canonicalize(system: &SystemSpec) -> Canonical {
    let mut transform = Transform::default();
    let mut prior = system.prior;
    let mut channels = system.channels.clone();
    if !prior.is_canonical() {
        transform.labels_swapped = true;
        prior = prior.swapped();
        channels.iter_mut().for_each(|c| *c = c.relabeled());
    }
    for (i, c) in channels.iter_mut().enumerate() {
        if error_rate(c, &prior) > 0.5 {
            *c = c.output_flipped();
            transform.flipped.push(i);
        }
    }
    Canonical {
        system: SystemSpec { prior, channels },
        transform,
    }
}

/// `n` symmetric channels with crossover `r`.
pub fn make_unbiased_system(n: usize, prior: Prior, r: f64) -> Result<SystemSpec> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(Error::InvalidRate {
            rate: r,
            range: "(0, 1/2]",
        });
    }
    SystemSpec::new(prior, vec![Channel::unbiased(r)?; n])
}

/// One S-channel per rate, with `alpha_i = r_i / rho0`.
pub fn make_fully_biased_system(prior: Prior, rates: &RateVector) -> Result<SystemSpec> {
    prior.require_canonical()?;
    let channels = rates
        .iter()
        .map(|r| {
            let alpha = r / prior.rho0;
            if alpha > 1.0 {
                return Err(Error::InvalidRate {
                    rate: r,
                    range: "[0, rho0]",
                });
            }
            Channel::s_channel(alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    SystemSpec::new(prior, channels)
}

/// Range of `alpha` keeping `beta = (r - rho0 alpha) / rho1` inside `[0, 1]`.
pub fn feasible_alpha_range(prior: &Prior, r: f64) -> (f64, f64) {
    let lo = ((r - prior.rho1) / prior.rho0).max(0.0);
    let hi = (r / prior.rho0).min(1.0);
    (lo, hi)
}

/// The `beta` that holds the rate at `r` for a given `alpha`.
pub fn beta_for_rate(prior: &Prior, r: f64, alpha: f64) -> f64 {
    ((r - prior.rho0 * alpha) / prior.rho1).clamp(0.0, 1.0)
}

/// Random channels with prescribed rates.
///
/// Each `alpha_i` is uniform on its feasible interval and `beta_i` is solved
/// from the rate. Identical seeds give identical systems.
pub fn random_system_with_rates(prior: Prior, rates: &RateVector, seed: u64) -> Result<SystemSpec> {
    prior.require_canonical()?;
    if prior.rho1 == 0.0 {
        return Err(Error::DegeneratePrior { rho0: prior.rho0 });
    }
    rates.require_at_most_half()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channels = rates
        .iter()
        .map(|r| {
            let (lo, hi) = feasible_alpha_range(&prior, r);
            let alpha = rng.gen_range(lo..=hi);
            Channel::new(alpha, beta_for_rate(&prior, r, alpha))
        })
        .collect::<Result<Vec<_>>>()?;
    SystemSpec::new(prior, channels)
}
