//! Better science: an extra effective year of science that also lowers the
//! peril rate from `d` to `d_bar` (and `dx` to `dx_bar` in proportion).

use crate::core_model::PERIL_TOLERANCE;
use crate::core_model::{
    direct_difference, impact_decomposition, ImpactDecomposition, ModelParams, PathSpec,
};
use crate::error::{Error, Result};
use crate::solve;

/// Anchors for the peril-rate reduction: life expectancy and the yearly
/// life-expectancy gain attributable to science.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionAnchors {
    pub life_expectancy: f64,
    pub science_gain: f64,
}

impl Default for ReductionAnchors {
    fn default() -> Self {
        ReductionAnchors {
            life_expectancy: 72.8,
            science_gain: 0.19,
        }
    }
}

impl ReductionAnchors {
    /// Builds the anchors from the yearly life-expectancy gain and the share due to science.
    pub fn from_components(life_expectancy: f64, le_gain: f64, science_share: f64) -> Self {
        ReductionAnchors {
            life_expectancy,
            science_gain: le_gain * science_share,
        }
    }

    pub fn factor(&self) -> f64 {
        self.life_expectancy / (self.life_expectancy + self.science_gain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetterScienceParams {
    pub d_bar: f64,
    pub dx_bar: f64,
    /// `dx_bar / dx`.
    pub lambda_x: f64,
    /// Share of new capabilities that are safe.
    pub s_share: f64,
    /// Share of new capabilities that are offensive.
    pub o_share: f64,
    /// Fraction of frontier capabilities leaked to small actors.
    pub x_leak: f64,
}

/// Treats a constant mortality risk as the inverse of life expectancy.
pub fn reduced_peril(d: f64, anchors: &ReductionAnchors) -> Result<f64> {
    if !(0.0..1.0).contains(&d) {
        return Err(Error::param("d", "must lie in [0, 1)"));
    }
    Ok(anchors.factor() * d)
}

fn check_d_bar(params: &ModelParams, d_bar: f64) -> Result<()> {
    if !(d_bar >= 0.0 && d_bar <= params.d) {
        return Err(Error::param("d_bar", "must satisfy 0 <= d_bar <= d"));
    }
    Ok(())
}

/// `V_BS - V_PS`, with the peril rate `params.d` in the pause scenario.
pub fn better_science_impact(params: &ModelParams, d_bar: f64) -> Result<f64> {
    params.validate()?;
    check_d_bar(params, d_bar)?;
    let (big_g, small_g) = params.utility_steps();
    let d = params.d;
    let ps = params.p * (1.0 + params.s);
    let t1 = params.t1;
    let mut delta_bar = 0.0;
    for t in t1 + 1..=params.lag {
        let tf = f64::from(t);
        let ahead = (1.0 - d_bar).powi((t - t1) as i32);
        let behind = (1.0 - d).powi((t - t1 - 1) as i32);
        delta_bar += ps.powi(t as i32) * (2.0 + tf * big_g) * (ahead - behind);
    }
    let t2 = params.t2() as i32;
    let n_t = params.n0 * ps.powi(params.lag as i32) * (1.0 - d).powi(t2);
    let n_t_bs = params.n0 * ps.powi(params.lag as i32) * (1.0 - d_bar).powi(t2);
    let u = 2.0 + f64::from(params.lag + 1) * big_g;
    let l = crate::core_model::life_years_factor(params.p, params.s, d_bar)?;
    let lb = crate::core_model::life_years_factor(params.p, params.s_bar, d)?;
    Ok(params.n0 * delta_bar + n_t_bs * l * (u + big_g * l)
        - n_t / (1.0 - d) * lb * (u - (big_g - small_g) + lb * big_g))
}

/// Direct summation of `V_BS - V_PS`.
pub fn brute_force_better_science(
    params: &ModelParams,
    d_bar: f64,
    horizon: usize,
) -> Result<ImpactDecomposition> {
    params.validate()?;
    check_d_bar(params, d_bar)?;
    let bs = PathSpec {
        d: d_bar,
        ..PathSpec::status_quo(params)
    };
    direct_difference(params, bs, PathSpec::paused(params), horizon)
}

/// Peril rate at which better science and the pause give equal welfare,
/// with `d_bar` tied to `d` through `anchors`.
pub fn better_science_breakeven(params: &ModelParams, anchors: &ReductionAnchors) -> Result<f64> {
    params.with_d(0.0).validate()?;
    let objective = |d: f64| -> Result<f64> {
        let q = params.with_d(d);
        better_science_impact(&q, reduced_peril(d, anchors)?)
    };
    let (lo, hi) = solve::bracket_decreasing(objective, 0.0, 1e-3, 1.0 - 1e-9)?;
    solve::bisect(objective, lo, hi, PERIL_TOLERANCE)
}

/// Returns to better science relative to the baseline returns.
pub fn utility_scaling(params: &ModelParams, d_bar: f64) -> Result<f64> {
    let base = impact_decomposition(params)?.total;
    if base == 0.0 {
        return Err(Error::Domain(
            "baseline impact is zero; the ratio is undefined at break-even".into(),
        ));
    }
    Ok(better_science_impact(params, d_bar)? / base)
}

/// True when a proportional cut `lambda_x` in extinction risk outweighs the
/// extra year spent in the time of perils.
pub fn extinction_improvement_condition(p: f64, dx: f64, lambda_x: f64) -> bool {
    p / (1.0 - p * dx) > lambda_x
}

/// Bracketed extinction term of the better-science break-even.
pub fn extinction_bracket(p: f64, dx: f64, dx_bar: f64) -> f64 {
    (1.0 + p * dx) / (1.0 - p * (1.0 - dx)) - 1.0 / (1.0 - p * (1.0 - dx_bar))
}

/// Extinction-adjusted better-science impact for `E[V*] = lambda_w`.
pub fn better_extinction_adjusted_impact(
    gain: f64,
    p: f64,
    dx: f64,
    dx_bar: f64,
    lambda_w: f64,
) -> f64 {
    gain - (1.0 - p) * lambda_w * extinction_bracket(p, dx, dx_bar)
}

/// Break-even `lambda` when better science also cuts extinction risk.
///
/// `gain` is the welfare difference placed in the numerator; see
/// [`BetterGain`] for the two choices.
pub fn breakeven_lambda_better(gain: f64, p: f64, dx: f64, dx_bar: f64, w: f64) -> Result<f64> {
    let bracket = extinction_bracket(p, dx, dx_bar);
    if !(bracket > 0.0) {
        return Err(Error::NoRoot(
            "extinction term is net positive; no finite break-even lambda".into(),
        ));
    }
    Ok(gain / w / (1.0 - p) / bracket)
}

/// Welfare difference used as the numerator of the better-science break-even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetterGain {
    /// Baseline `V_SQ(d) - V_PS(d)`; reproduces the published table.
    #[default]
    Baseline,
    /// `V_SQ(d_bar) - V_PS(d)`, the literal break-even condition.
    Reduced,
}

/// Defensive-to-offensive capability ratio after lag `T`.
///
/// With leakage `x`, small actors see `a_t + x (A_t - a_t)` capabilities.
pub fn capability_ratio(s_share: f64, o_share: f64, g: f64, lag: f64, x_leak: f64) -> Result<f64> {
    if !(o_share > 0.0) {
        return Err(Error::param("o", "must be positive"));
    }
    if !(g > -1.0) {
        return Err(Error::param("g", "must exceed -1"));
    }
    if !(0.0..=1.0).contains(&x_leak) {
        return Err(Error::param("x", "must lie in [0, 1]"));
    }
    Ok(s_share / (o_share * ((1.0 - x_leak) / (1.0 + g).powf(lag) + x_leak)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_rate_matches_baseline() {
        let p = ModelParams::default().with_d(0.000385);
        let base = impact_decomposition(&p).unwrap().total;
        let bs = better_science_impact(&p, p.d).unwrap();
        assert!((bs - base).abs() <= 1e-9 * base.abs());
    }

    #[test]
    fn factor_is_anchor_ratio() {
        assert_eq!(ReductionAnchors::default().factor(), 72.8 / 72.99);
        assert_eq!(
            reduced_peril(0.0, &ReductionAnchors::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn capability_limits() {
        assert_eq!(capability_ratio(0.5, 0.5, 0.0, 20.0, 0.0).unwrap(), 1.0);
        assert_eq!(capability_ratio(0.3, 0.6, 0.05, 20.0, 1.0).unwrap(), 0.5);
        let r = capability_ratio(0.5, 0.5, 0.02, 20.0, 0.0).unwrap();
        assert!((r - 1.02f64.powi(20)).abs() < 1e-12);
    }

    #[test]
    fn improvement_condition_cases() {
        assert!(!extinction_improvement_condition(0.98, 1.6e-6, 0.9974));
        assert!(extinction_improvement_condition(0.98, 1.6e-6, 0.0));
        assert!(!extinction_improvement_condition(0.98, 1e-6, 1.0));
    }

    #[test]
    fn bracket_sign_error() {
        assert!(breakeven_lambda_better(1.0, 0.98, 1e-4, 1e-6, 16e9).is_err());
    }
}
