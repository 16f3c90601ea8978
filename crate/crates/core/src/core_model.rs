//! Closed-form baseline: status quo versus a one-year pause in science.
//!
//! Periods are years with `t = 0` in 2023. The pause lowers income growth
//! from `G` to `g` for one year and population growth from `s` to `s_bar`,
//! both after the lag `T`, and delays the onset of the time of perils by one
//! year. Utility terms for the post-regime world cancel in every difference
//! computed here and are never evaluated.

use crate::error::{Error, Result};
use crate::realistic_health::{self, RealisticSetup};
use crate::solve;

/// Absolute tolerance on `d` for the break-even solvers.
pub const PERIL_TOLERANCE: f64 = 1e-12;

/// Relative tail bound a brute-force horizon must meet.
pub const BRUTE_FORCE_TAIL: f64 = 1e-9;

/// How a year of income growth enters flow utility `2 + ln(y_t / y_0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IncomeForm {
    /// Each year of growth adds `ln(1 + G)`.
    #[default]
    LogGrowth,
    /// Each year of growth adds `G`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Annual probability of remaining in the current regime.
    pub p: f64,
    /// Status-quo income growth attributable to the frontier (`G`).
    pub growth: f64,
    /// Income growth in the paused year (`g`).
    pub paused_growth: f64,
    /// Lag in years between science and its impact (`T`).
    pub lag: u32,
    /// Years until the time of perils begins.
    pub t1: u32,
    pub n0: f64,
    pub s: f64,
    pub s_bar: f64,
    /// Annual excess mortality during the time of perils.
    pub d: f64,
    pub income: IncomeForm,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            p: 0.98,
            growth: 0.01,
            paused_growth: 0.0075,
            lag: 74,
            t1: 15,
            n0: 8.05e9,
            s: 0.006,
            s_bar: 0.005967,
            d: 0.0,
            income: IncomeForm::LogGrowth,
        }
    }
}

impl ModelParams {
    pub fn with_d(self, d: f64) -> Self {
        ModelParams { d, ..self }
    }

    pub fn with_t1(self, t1: u32) -> Self {
        ModelParams { t1, ..self }
    }

    /// Per-year utility increments `(G, g)` after applying the income form.
    pub fn utility_steps(&self) -> (f64, f64) {
        match self.income {
            IncomeForm::LogGrowth => (self.growth.ln_1p(), self.paused_growth.ln_1p()),
            IncomeForm::Linear => (self.growth, self.paused_growth),
        }
    }

    /// Length of the peril window before the benefits of science arrive.
    pub fn t2(&self) -> u32 {
        self.lag - self.t1
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("p", self.p),
            ("G", self.growth),
            ("g", self.paused_growth),
            ("n0", self.n0),
            ("s", self.s),
            ("s_bar", self.s_bar),
            ("d", self.d),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::param("p", "must lie in (0, 1)"));
        }
        if !(self.paused_growth >= 0.0 && self.paused_growth <= self.growth) {
            return Err(Error::param("g", "must satisfy 0 <= g <= G"));
        }
        if !(self.s_bar >= 0.0 && self.s_bar <= self.s) {
            return Err(Error::param("s_bar", "must satisfy 0 <= s_bar <= s"));
        }
        if !(self.d >= 0.0 && self.d < 1.0) {
            return Err(Error::param("d", "must lie in [0, 1)"));
        }
        if self.n0 <= 0.0 {
            return Err(Error::param("n0", "must be positive"));
        }
        if self.lag < 1 {
            return Err(Error::param("T", "must be at least 1"));
        }
        if self.t1 > self.lag {
            return Err(Error::param("t1", "must not exceed T"));
        }
        let ratio = self.p * (1.0 + self.s) * (1.0 - self.d);
        if ratio >= 1.0 {
            return Err(Error::Divergence { ratio });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelTerms {
    /// Expected future life-years per person alive, `L(s, d)`.
    pub l: f64,
    /// Same under the paused population growth, `L(s_bar, d)`.
    pub l_bar: f64,
    /// Utility flow over the peril window before science pays off.
    pub delta: f64,
    /// Expected survivors at period `T`.
    pub n_t: f64,
    /// Flow utility per person at `T + 1`.
    pub u_t1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactDecomposition {
    pub pure_peril: f64,
    pub pure_income: f64,
    pub pure_health: f64,
    pub health_income: f64,
    pub total: f64,
}

impl ImpactDecomposition {
    pub fn new(pure_peril: f64, pure_income: f64, pure_health: f64, health_income: f64) -> Self {
        ImpactDecomposition {
            pure_peril,
            pure_income,
            pure_health,
            health_income,
            total: pure_peril + pure_income + pure_health + health_income,
        }
    }

    pub fn components(&self) -> [f64; 4] {
        [
            self.pure_peril,
            self.pure_income,
            self.pure_health,
            self.health_income,
        ]
    }

    /// Applies `f` to each component and re-sums the total.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ImpactDecomposition::new(
            f(self.pure_peril),
            f(self.pure_income),
            f(self.pure_health),
            f(self.health_income),
        )
    }
}

/// `L(s, d) = r / (1 - r)` with `r = p (1 + s) (1 - d)`.
pub fn life_years_factor(p: f64, s: f64, d: f64) -> Result<f64> {
    let r = p * (1.0 + s) * (1.0 - d);
    if r >= 1.0 {
        return Err(Error::Divergence { ratio: r });
    }
    Ok(r / (1.0 - r))
}

pub fn model_terms(params: &ModelParams) -> Result<ModelTerms> {
    params.validate()?;
    let (big_g, _) = params.utility_steps();
    let ps = params.p * (1.0 + params.s);
    let r = ps * (1.0 - params.d);
    let head = 2.0 + f64::from(params.t1 + 1) * big_g;
    let mut delta = 0.0;
    let mut rk = 1.0;
    for k in 0..params.t2() {
        delta += rk * (head + f64::from(k) * big_g);
        rk *= r;
    }
    delta *= ps.powi(params.t1 as i32 + 1);
    Ok(ModelTerms {
        l: life_years_factor(params.p, params.s, params.d)?,
        l_bar: life_years_factor(params.p, params.s_bar, params.d)?,
        delta,
        n_t: params.n0 * ps.powi(params.lag as i32) * (1.0 - params.d).powi(params.t2() as i32),
        u_t1: 2.0 + f64::from(params.lag + 1) * big_g,
    })
}

pub fn impact_decomposition(params: &ModelParams) -> Result<ImpactDecomposition> {
    let m = model_terms(params)?;
    let (big_g, small_g) = params.utility_steps();
    let survive = 1.0 / (1.0 - params.d);
    Ok(ImpactDecomposition::new(
        -params.d * params.n0 * m.delta,
        m.n_t * survive * m.l_bar * (big_g - small_g),
        m.n_t * m.u_t1 * (m.l - survive * m.l_bar),
        m.n_t * big_g * (m.l * m.l - survive * m.l_bar * m.l_bar),
    ))
}

/// Variant where the time of perils has already begun in both scenarios.
pub fn too_late_impact(params: &ModelParams) -> Result<ImpactDecomposition> {
    params.validate()?;
    let (big_g, small_g) = params.utility_steps();
    let r = params.p * (1.0 + params.s) * (1.0 - params.d);
    let n = params.n0 * r.powi(params.lag as i32);
    let l = life_years_factor(params.p, params.s, params.d)?;
    let lb = life_years_factor(params.p, params.s_bar, params.d)?;
    let u = 2.0 + f64::from(params.lag + 1) * big_g;
    Ok(ImpactDecomposition::new(
        0.0,
        n * lb * (big_g - small_g),
        n * u * (l - lb),
        n * big_g * (l * l - lb * lb),
    ))
}

/// One scenario's population and utility path for direct summation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PathSpec {
    /// Population growth after `T`.
    pub growth_after: f64,
    /// Utility increment for the year at `T`.
    pub step_at_lag: f64,
    pub d: f64,
    /// Perils multiply survival by `1 - d` each period after this one.
    pub onset: u32,
}

impl PathSpec {
    pub fn status_quo(params: &ModelParams) -> Self {
        PathSpec {
            growth_after: params.s,
            step_at_lag: params.utility_steps().0,
            d: params.d,
            onset: params.t1,
        }
    }

    pub fn paused(params: &ModelParams) -> Self {
        PathSpec {
            growth_after: params.s_bar,
            step_at_lag: params.utility_steps().1,
            d: params.d,
            onset: params.t1 + 1,
        }
    }
}

/// Geometric tail bound for one scenario summed past `horizon`.
fn tail_bound(params: &ModelParams, horizon: usize) -> Result<f64> {
    let (big_g, _) = params.utility_steps();
    let r = params.p * (1.0 + params.s.max(params.s_bar));
    if r >= 1.0 {
        return Err(Error::Divergence { ratio: r });
    }
    let h1 = horizon as f64 + 1.0;
    let lead = params.n0 * r.powf(h1);
    Ok(lead * ((2.0 + h1 * big_g) / (1.0 - r) + big_g * r / ((1.0 - r) * (1.0 - r))))
}

/// Smallest horizon whose tail is below `rel_tol` of the first period's utility.
pub fn required_horizon(params: &ModelParams, rel_tol: f64) -> Result<usize> {
    let floor = rel_tol * 2.0 * params.n0;
    let mut h = 64usize;
    while tail_bound(params, h)? > floor {
        h *= 2;
        if h > 1 << 24 {
            return Err(Error::HorizonTooSmall {
                horizon: h,
                tail: tail_bound(params, h)?,
            });
        }
    }
    let (mut lo, mut hi) = (h / 2, h);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if tail_bound(params, mid)? > floor {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Term-by-term difference of two scenarios, split into the four channels:
/// peril over `t <= T`, and income, health at `U_{T+1}`, and their
/// interaction after `T`.
pub(crate) fn direct_difference(
    params: &ModelParams,
    sq: PathSpec,
    ps: PathSpec,
    horizon: usize,
) -> Result<ImpactDecomposition> {
    let (big_g, _) = params.utility_steps();
    let lag = params.lag as usize;
    let u_t1 = 2.0 + (lag as f64 + 1.0) * big_g;
    let mut parts = [0.0f64; 4];
    let mut magnitude = 0.0;
    let mut weight = 1.0;
    let mut pop_sq = 1.0;
    let mut pop_ps = 1.0;
    for t in 0..=horizon {
        if t > 0 {
            weight *= params.p;
            let (gs, gp) = if t <= lag {
                (params.s, params.s)
            } else {
                (sq.growth_after, ps.growth_after)
            };
            pop_sq *= 1.0 + gs;
            pop_ps *= 1.0 + gp;
            if t > sq.onset as usize {
                pop_sq *= 1.0 - sq.d;
            }
            if t > ps.onset as usize {
                pop_ps *= 1.0 - ps.d;
            }
        }
        let n_sq = params.n0 * weight * pop_sq;
        let n_ps = params.n0 * weight * pop_ps;
        let tf = t as f64;
        if t <= lag {
            let u = 2.0 + tf * big_g;
            parts[0] += (n_sq - n_ps) * u;
            magnitude += (n_sq + n_ps) * u;
        } else {
            let u_sq = 2.0 + (tf - 1.0) * big_g + sq.step_at_lag;
            let u_ps = 2.0 + (tf - 1.0) * big_g + ps.step_at_lag;
            parts[1] += n_ps * (u_sq - u_ps);
            parts[2] += (n_sq - n_ps) * u_t1;
            parts[3] += (n_sq - n_ps) * (tf - lag as f64 - 1.0) * big_g;
            magnitude += n_sq * u_sq + n_ps * u_ps;
        }
    }
    let tail = 2.0 * tail_bound(params, horizon)?;
    if tail > BRUTE_FORCE_TAIL * magnitude {
        return Err(Error::HorizonTooSmall { horizon, tail });
    }
    Ok(ImpactDecomposition::new(
        parts[0], parts[1], parts[2], parts[3],
    ))
}

/// Direct finite summation of the status-quo minus pause difference.
pub fn brute_force_impact(params: &ModelParams, horizon: usize) -> Result<ImpactDecomposition> {
    params.validate()?;
    direct_difference(
        params,
        PathSpec::status_quo(params),
        PathSpec::paused(params),
        horizon,
    )
}

/// Direct summation for the variant with perils active from the first period.
pub fn brute_force_too_late(params: &ModelParams, horizon: usize) -> Result<ImpactDecomposition> {
    params.validate()?;
    let sq = PathSpec {
        onset: 0,
        ..PathSpec::status_quo(params)
    };
    let ps = PathSpec {
        onset: 0,
        ..PathSpec::paused(params)
    };
    direct_difference(params, sq, ps, horizon)
}

#[derive(Debug, Clone, Copy)]
pub enum PerilVariant<'a> {
    Baseline,
    /// Baseline with the time of perils starting next year (`t1 = 1`).
    ImmediateOnset,
    Realistic(&'a RealisticSetup),
}

/// Peril rate at which the status quo and the pause give equal welfare.
pub fn breakeven_peril(params: &ModelParams, variant: PerilVariant<'_>) -> Result<f64> {
    let base = match variant {
        PerilVariant::ImmediateOnset => params.with_t1(1),
        _ => *params,
    };
    base.with_d(0.0).validate()?;
    let objective = |d: f64| -> Result<f64> {
        let q = base.with_d(d);
        match variant {
            PerilVariant::Realistic(setup) => Ok(realistic_health::realistic_impact(&q, setup)?
                .decomposition
                .total),
            _ => Ok(impact_decomposition(&q)?.total),
        }
    };
    let cap = 1.0 - 1e-9;
    let (lo, hi) = solve::bracket_decreasing(objective, 0.0, 1e-3, cap)?;
    solve::bisect(objective, lo, hi, PERIL_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_is_one_at_half() {
        // p (1 + s) (1 - d) = 0.5
        assert_eq!(life_years_factor(0.5, 0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn u_t1_default() {
        let p = ModelParams {
            income: IncomeForm::Linear,
            ..ModelParams::default()
        };
        assert!((model_terms(&p).unwrap().u_t1 - 2.75).abs() < 1e-12);
    }

    #[test]
    fn divergent_params_rejected() {
        let p = ModelParams {
            p: 0.999,
            s: 0.01,
            ..ModelParams::default()
        };
        assert!(matches!(model_terms(&p), Err(Error::Divergence { .. })));
    }

    #[test]
    fn total_is_sum_of_components() {
        let d = impact_decomposition(&ModelParams::default().with_d(0.000385)).unwrap();
        let [a, b, c, e] = d.components();
        assert_eq!(d.total, a + b + c + e);
    }

    #[test]
    fn identical_scenarios_give_zero() {
        let p = ModelParams {
            paused_growth: 0.01,
            s_bar: 0.006,
            ..ModelParams::default()
        };
        let bf = brute_force_impact(&p, 4000).unwrap();
        assert_eq!(bf.total, 0.0);
    }

    #[test]
    fn empty_peril_window() {
        let p = ModelParams::default().with_d(0.001).with_t1(74);
        assert_eq!(impact_decomposition(&p).unwrap().pure_peril, 0.0);
    }

    #[test]
    fn short_horizon_rejected() {
        let p = ModelParams::default();
        assert!(matches!(
            brute_force_impact(&p, 100),
            Err(Error::HorizonTooSmall { .. })
        ));
    }

    #[test]
    fn breakeven_needs_positive_start() {
        let p = ModelParams {
            paused_growth: 0.01,
            s_bar: 0.006,
            ..ModelParams::default()
        };
        assert!(breakeven_peril(&p, PerilVariant::Baseline).is_err());
    }
}
