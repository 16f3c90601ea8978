//! Civilization-ending risk `dx` during the time of perils.
//!
//! Extinction forfeits the value of the post-regime future, `E[V*] = lambda W`,
//! where `W` is one year of present world utility.

use crate::core_model::{impact_decomposition, ModelParams};
use crate::error::{Error, Result};
use crate::realistic_health::{realistic_impact, RealisticSetup};
use crate::solve;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtinctionParams {
    /// Annual extinction probability during the time of perils.
    pub dx: f64,
    /// One year of world utility.
    pub w: f64,
    /// Value of the post-regime future in multiples of `w`.
    pub lambda: f64,
}

impl ExtinctionParams {
    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        if !(self.dx >= 0.0 && self.dx < 1.0) {
            return Err(Error::param("dx", "must lie in [0, 1)"));
        }
        if params.d > 0.0 && self.dx >= params.d {
            return Err(Error::param("dx", "must be below d"));
        }
        if !(self.w > 0.0) {
            return Err(Error::param("W", "must be positive"));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::param("lambda", "must be nonnegative"));
        }
        Ok(())
    }
}

/// Which welfare model supplies `V_SQ - V_PS`.
#[derive(Debug, Clone, Copy)]
pub enum WelfareModel<'a> {
    Simplified,
    Realistic(&'a RealisticSetup),
}

impl WelfareModel<'_> {
    pub fn gain(&self, params: &ModelParams) -> Result<f64> {
        match self {
            WelfareModel::Simplified => Ok(impact_decomposition(params)?.total),
            WelfareModel::Realistic(setup) => {
                Ok(realistic_impact(params, setup)?.decomposition.total)
            }
        }
    }
}

/// Expected loss of the post-regime future from one extra year of perils.
pub fn extinction_penalty(p: f64, dx: f64, lambda_w: f64) -> f64 {
    dx * (1.0 - p) / (1.0 - p * (1.0 - dx)) * lambda_w
}

pub fn extinction_adjusted_impact(params: &ModelParams, ext: &ExtinctionParams) -> Result<f64> {
    ext.validate(params)?;
    let gain = impact_decomposition(params)?.total;
    Ok(gain - extinction_penalty(params.p, ext.dx, ext.lambda * ext.w))
}

/// `lambda` at which the adjusted impact is zero, given the welfare gain.
pub fn breakeven_lambda_from_gain(gain: f64, p: f64, dx: f64, w: f64) -> Result<f64> {
    if !(dx > 0.0) {
        return Err(Error::Domain(
            "break-even lambda is undefined without extinction risk (dx = 0)".into(),
        ));
    }
    Ok(gain / w * (1.0 - p * (1.0 - dx)) / (dx * (1.0 - p)))
}

pub fn breakeven_lambda(
    params: &ModelParams,
    dx: f64,
    w: f64,
    model: WelfareModel<'_>,
) -> Result<f64> {
    breakeven_lambda_from_gain(model.gain(params)?, params.p, dx, w)
}

/// `E[V*] / W` for a perpetual stream discounted by `rho` with growth `G`.
pub fn future_multiple(rho: f64, growth: f64) -> f64 {
    let x = 1.0 - rho;
    1.0 / x + 0.5 * growth * rho / (x * x)
}

/// Discount factor whose perpetual stream is worth `lambda` years of world utility.
pub fn rho_for_lambda(lambda: f64, growth: f64) -> Result<f64> {
    if !(lambda > 1.0) {
        return Err(Error::NoRoot(format!(
            "lambda {lambda} must exceed 1 for a discount factor in (0, 1)"
        )));
    }
    if !(growth >= 0.0) {
        return Err(Error::param("G", "must be nonnegative"));
    }
    // Bisect to machine precision: near rho = 1 the multiple is steep, so a
    // looser stopping rule leaves a visible error in lambda.
    solve::bisect(
        |rho| Ok(future_multiple(rho, growth) - lambda),
        0.0,
        1.0 - f64::EPSILON,
        0.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_extinction_channel() {
        let p = ModelParams::default().with_d(0.000385);
        let base = impact_decomposition(&p).unwrap().total;
        let e = ExtinctionParams {
            dx: 0.0,
            w: 16e9,
            lambda: 1e6,
        };
        assert_eq!(extinction_adjusted_impact(&p, &e).unwrap(), base);
        let e = ExtinctionParams {
            dx: 0.0002,
            w: 16e9,
            lambda: 0.0,
        };
        assert_eq!(extinction_adjusted_impact(&p, &e).unwrap(), base);
    }

    #[test]
    fn lambda_undefined_without_dx() {
        assert!(breakeven_lambda_from_gain(1.0, 0.98, 0.0, 16e9).is_err());
    }

    #[test]
    fn zero_gain_zero_lambda() {
        assert_eq!(
            breakeven_lambda_from_gain(0.0, 0.98, 1e-4, 16e9).unwrap(),
            0.0
        );
    }

    #[test]
    fn rho_without_growth() {
        let r = rho_for_lambda(100.0, 0.0).unwrap();
        assert!((r - 0.99).abs() < 1e-12);
    }

    #[test]
    fn rho_rejects_small_lambda() {
        assert!(rho_for_lambda(1.0, 0.01).is_err());
    }
}
