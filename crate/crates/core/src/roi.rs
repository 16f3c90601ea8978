//! Conversion to the benchmark multiple and the back-of-envelope break-even.

use crate::error::{Error, Result};

/// Annual global science spending, in dollars.
pub const SCIENCE_SPEND: f64 = 357e9;
/// Income whose marginal dollar defines the benchmark.
pub const BENCHMARK_INCOME: f64 = 50_000.0;

/// Utility per science dollar relative to $1 given to someone earning `benchmark_income`.
pub fn to_op_multiple(delta_utils: f64, science_spend: f64, benchmark_income: f64) -> Result<f64> {
    if !(science_spend > 0.0) {
        return Err(Error::param("science_spend", "must be positive"));
    }
    Ok(delta_utils * benchmark_income / science_spend)
}

/// Multiple under the default spend and benchmark income.
pub fn op_multiple(delta_utils: f64) -> f64 {
    delta_utils * BENCHMARK_INCOME / SCIENCE_SPEND
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackOfEnvelope {
    pub x: f64,
    pub y: f64,
    pub d_star: f64,
}

/// Peril rate at which a year of science gives descendants over `generations`
/// as much as it takes from them.
pub fn back_of_envelope(
    income_gain: f64,
    life_exp: f64,
    le_gain: f64,
    science_share: f64,
    generations: u32,
) -> Result<BackOfEnvelope> {
    if generations < 2 {
        return Err(Error::param("generations", "must be at least 2"));
    }
    if !(life_exp > science_share * le_gain) {
        return Err(Error::param(
            "life_exp",
            "must exceed the science-attributable gain",
        ));
    }
    let x = income_gain.ln_1p() / 2.0;
    let y = life_exp / (life_exp - science_share * le_gain) - 1.0;
    let n = f64::from(generations);
    Ok(BackOfEnvelope {
        x,
        y,
        d_star: (n - 1.0) * (x + y) / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_multiple() {
        let m = to_op_multiple(357e9 / 50_000.0, SCIENCE_SPEND, BENCHMARK_INCOME).unwrap();
        assert!((m - 1.0).abs() < 1e-15);
        assert_eq!(op_multiple(0.0), 0.0);
    }

    #[test]
    fn spend_must_be_positive() {
        assert!(to_op_multiple(1.0, 0.0, BENCHMARK_INCOME).is_err());
    }

    #[test]
    fn no_gains_no_breakeven() {
        assert_eq!(
            back_of_envelope(0.0, 72.8, 0.0, 0.56, 2).unwrap().d_star,
            0.0
        );
    }
}
