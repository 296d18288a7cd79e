//! How much a consumer gains from fully-biased over unbiased channels.
//!
//! Both systems share a common rate `r`: the unbiased one has `n` channels
//! `(r, r)`, the fully-biased one `n` S-channels `(r / rho0, 0)`. With
//! `m = floor(n / 2)` and `c = 1/r - 1`, the log of the error ratio satisfies
//!
//! ```text
//! m ln(4 rho0^2 c) - ln(4m / rho1)  <=  ln(Pu / Pf)  <=  m ln(4 rho0^2 c) + ln(2(m+1) / rho0)
//! ```
//!
//! so the per-channel exponent tends to `ln(4 rho0^2 c) / 2`.

use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::analysis::{
    exact_error_probability, fully_biased_error, identical_error_probability, log_identical_error_probability,
    ENUMERATION_LIMIT,
};
use crate::error::{Error, Result};
use crate::model::{make_fully_biased_system, make_unbiased_system, Prior, RateVector};

/// Relative agreement demanded between enumeration and the formula paths.
pub const CROSS_CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GainBounds {
    pub n: usize,
    pub m: usize,
    /// `1/r - 1`
    pub c: f64,
    pub log_gain_lower: f64,
    pub log_gain_upper: f64,
    /// `ln(4 rho0^2 c) / 2`
    pub asymptotic_rate: f64,
    pub exact_log_gain: f64,
}

impl GainBounds {
    pub fn brackets_exact(&self, tol: f64) -> bool {
        self.log_gain_lower - tol <= self.exact_log_gain && self.exact_log_gain <= self.log_gain_upper + tol
    }
}

fn check_common_rate(prior: &Prior, r: f64) -> Result<()> {
    prior.require_canonical()?;
    if prior.is_degenerate() {
        return Err(Error::DegeneratePrior { rho0: prior.rho0() });
    }
    if !(r > 0.0 && r <= 0.5) {
        return Err(Error::InvalidRate {
            rate: r,
            range: "(0, 1/2]",
        });
    }
    Ok(())
}

/// `ln(4 rho0^2 (1/r - 1)) / 2`.
pub fn asymptotic_rate(prior: &Prior, r: f64) -> f64 {
    0.5 * (4.0 * prior.rho0().powi(2) * (1.0 / r - 1.0)).ln()
}

/// `ln(Pu / Pf)` through the formula paths: the binomial sum and closed form
/// for `n <= 24`, their log-domain counterparts above that.
fn formula_log_gain(n: usize, prior: &Prior, r: f64) -> Result<f64> {
    let fully = fully_biased_error(prior, &RateVector::uniform(n, r)?)?
        .report
        .log_p_error;
    let unbiased = if n <= ENUMERATION_LIMIT {
        identical_error_probability(n, prior, r, r)?.p_error.ln()
    } else {
        log_identical_error_probability(n, prior, r)?.log_p_error
    };
    Ok(unbiased - fully)
}

pub fn gain_bounds(n: usize, prior: &Prior, r: f64) -> Result<GainBounds> {
    check_common_rate(prior, r)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("gain bounds need n >= 2, got {n}")));
    }
    let m = n / 2;
    let c = 1.0 / r - 1.0;
    let lead = m as f64 * (4.0 * prior.rho0().powi(2) * c).ln();
    Ok(GainBounds {
        n,
        m,
        c,
        log_gain_lower: lead - (4.0 * m as f64 / prior.rho1()).ln(),
        log_gain_upper: lead + (2.0 * (m + 1) as f64 / prior.rho0()).ln(),
        asymptotic_rate: asymptotic_rate(prior, r),
        exact_log_gain: formula_log_gain(n, prior, r)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GainRatio {
    pub n: usize,
    pub log_gain: f64,
    /// `exp(log_gain)`; infinite once the ratio leaves double range.
    pub ratio: f64,
}

/// `Pu / Pf` for a common rate `r`.
///
/// Up to the enumeration limit both systems are also enumerated and must
/// agree with the formula paths to a relative `1e-9`.
pub fn exact_gain_ratio(n: usize, prior: &Prior, r: f64) -> Result<GainRatio> {
    check_common_rate(prior, r)?;
    if n == 0 {
        return Err(Error::EmptySystem);
    }
    let log_gain = formula_log_gain(n, prior, r)?;
    if n <= ENUMERATION_LIMIT {
        let pu = exact_error_probability(&make_unbiased_system(n, *prior, r)?)?.p_error;
        let pf = exact_error_probability(&make_fully_biased_system(*prior, &RateVector::uniform(n, r)?)?)?.p_error;
        let enumerated = pu / pf;
        let formula = log_gain.exp();
        if ((enumerated - formula) / formula).abs() > CROSS_CHECK_TOL {
            return Err(Error::PathMismatch(format!(
                "gain ratio for n = {n}: enumeration {enumerated}, formula {formula}"
            )));
        }
    }
    Ok(GainRatio {
        n,
        log_gain,
        ratio: log_gain.exp(),
    })
}

/// Per-channel exponents for one `(rho0, r)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub rate_exact: f64,
    pub rate_lower: f64,
    pub rate_upper: f64,
    pub rate_asymptotic: f64,
}

pub fn convergence_table(prior: &Prior, r: f64, n_values: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n values must be strictly increasing".into()));
    }
    n_values
        .iter()
        .map(|&n| {
            let g = gain_bounds(n, prior, r)?;
            let nf = n as f64;
            Ok(ConvergenceRow {
                n,
                rate_exact: g.exact_log_gain / nf,
                rate_lower: g.log_gain_lower / nf,
                rate_upper: g.log_gain_upper / nf,
                rate_asymptotic: g.asymptotic_rate,
            })
        })
        .collect()
}

/// Writes `n,rate_exact,rate_lower,rate_upper,rate_asymptotic` rows.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "rate_exact", "rate_lower", "rate_upper", "rate_asymptotic"])?;
    for row in rows {
        w.write_record([
            row.n.to_string(),
            crate::sig17(row.rate_exact),
            crate::sig17(row.rate_lower),
            crate::sig17(row.rate_upper),
            crate::sig17(row.rate_asymptotic),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Outcome of checking the two central-binomial facts for one `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Claim1 {
    pub m: u32,
    /// `C(2m+1, m) < 2 C(2m, m)`
    pub inequality: bool,
    /// `C(2m, m) = 4^m prod_{j=1..m} (1 - 1/(2j))`
    pub identity: bool,
}

pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Exact check in big-integer and big-rational arithmetic.
pub fn claim1_check(m: u32) -> Result<Claim1> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let central = binomial(2 * m, m);
    let inequality = binomial(2 * m + 1, m) < BigUint::from(2u8) * &central;

    let product = (1..=m).fold(BigRational::one(), |acc, j| {
        acc * BigRational::new(BigInt::from(2 * j - 1), BigInt::from(2 * j))
    });
    let four_m = BigRational::from_integer(BigInt::from(4u8).pow(m));
    let lhs = BigRational::from_integer(BigInt::from(central));
    let identity = four_m * product == lhs && !lhs.is_zero();
    Ok(Claim1 {
        m,
        inequality,
        identity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prior(rho0: f64) -> Prior {
        Prior::new(rho0).unwrap()
    }

    #[test]
    fn bounds_spot_value() {
        let g = gain_bounds(4, &prior(0.6), 0.3).unwrap();
        assert_eq!(g.m, 2);
        assert!((g.log_gain_upper - 4.7264).abs() < 1e-4, "{}", g.log_gain_upper);
        assert!((g.log_gain_lower + 0.5719).abs() < 1e-4, "{}", g.log_gain_lower);
        // ln(0.18954 / 0.0375)
        assert!((g.exact_log_gain - 1.6202591510656836).abs() < 1e-12);
        assert!(g.brackets_exact(1e-9));
    }

    #[test]
    fn no_gain_at_half() {
        for n in [2, 3, 10, 50] {
            let g = gain_bounds(n, &prior(0.5), 0.5).unwrap();
            assert!(g.asymptotic_rate.abs() < 1e-15);
            assert!(g.exact_log_gain.abs() < 1e-9);
        }
    }

    #[test]
    fn asymptotic_constant() {
        assert!((asymptotic_rate(&prior(0.6), 0.3) - 0.5 * 3.36f64.ln()).abs() < 1e-15);
        assert!((asymptotic_rate(&prior(0.6), 0.3) - 0.6060).abs() < 1e-4);
    }

    #[test]
    fn ratio_examples() {
        let p = prior(0.6);
        assert!((exact_gain_ratio(5, &p, 0.3).unwrap().ratio - 8.6976).abs() < 1e-9);
        assert!((exact_gain_ratio(1, &p, 0.3).unwrap().ratio - 1.0).abs() < 1e-12);
        assert!((exact_gain_ratio(4, &p, 0.3).unwrap().ratio - 5.0544).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(gain_bounds(1, &prior(0.6), 0.3).is_err());
        assert!(gain_bounds(4, &prior(0.4), 0.3).is_err());
        assert!(gain_bounds(4, &prior(0.6), 0.0).is_err());
        assert!(gain_bounds(4, &prior(0.6), 0.55).is_err());
        assert!(convergence_table(&prior(0.6), 0.3, &[10, 5]).is_err());
        assert!(claim1_check(0).is_err());
    }

    #[test]
    fn claim1_small_cases() {
        // C(3,1) = 3 < 4 and C(2,1) = 2 = 4 * 1/2; C(5,2) = 10 < 12 and C(4,2) = 6 = 16 * 3/8
        assert_eq!(binomial(3, 1), BigUint::from(3u8));
        assert_eq!(binomial(5, 2), BigUint::from(10u8));
        assert_eq!(binomial(4, 2), BigUint::from(6u8));
        for m in 1..=2 {
            let c = claim1_check(m).unwrap();
            assert!(c.inequality && c.identity);
        }
    }

    #[test]
    fn binomial_matches_factorials() {
        let fact = |k: u32| (1..=k).fold(BigUint::one(), |acc, i| acc * i);
        for n in 0..40u32 {
            for k in 0..=n {
                assert_eq!(binomial(n, k), fact(n) / (fact(k) * fact(n - k)));
            }
        }
    }

    #[test]
    fn convergence_csv_layout() {
        let rows = convergence_table(&prior(0.6), 0.3, &[2, 4]).unwrap();
        let mut buf = Vec::new();
        write_convergence_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,rate_exact,rate_lower,rate_upper,rate_asymptotic\n2,"));
        assert_eq!(text.lines().count(), 3);
    }
}
