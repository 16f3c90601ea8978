//! Turns cumulative tournament forecasts into annual model rates.
//!
//! Forecasts "by year Y" are treated as cumulative probabilities over
//! `Y - 2023` years. Conditioning on the current regime divides by the
//! probability of staying in it over the same span.

use std::collections::BTreeMap;

use crate::error::{Error, Result, StageExt};
use crate::solve;

pub const FORECAST_EPOCH: u32 = 2023;
pub const FORECAST_END: u32 = 2100;
pub const PERILS_HORIZON: u32 = 2050;
pub const CATASTROPHE_SHARE_TOLERANCE: f64 = 1e-10;
/// Mortality in the 0-1%, 1-10%, 10-99.9% and 100% buckets.
pub const DEFAULT_SEVERITIES: [f64; 4] = [0.0, 0.02, 0.20, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Superforecasters,
    DomainExperts,
    Custom,
}

impl Group {
    pub fn label(&self) -> &'static str {
        match self {
            Group::Superforecasters => "Superforecasters",
            Group::DomainExperts => "Domain experts",
            Group::Custom => "Custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSet {
    pub group: Group,
    /// Engineered pandemic killing >1%, cumulative by horizon year.
    pub pandemic_by: BTreeMap<u32, f64>,
    /// Natural pandemic killing >1%, cumulative by horizon year.
    pub natural_pandemic_by: BTreeMap<u32, f64>,
    /// Engineered-pathogen catastrophe (>10% killed) by 2100.
    pub catastrophe_by_2100: f64,
    /// Catastrophe from any cause by 2100.
    pub total_catastrophe_by_2100: f64,
    /// Engineered-pathogen extinction by 2100.
    pub extinction_by_2100: f64,
    /// Extinction from any cause by 2100.
    pub total_extinction_by_2100: f64,
    /// Biological extinction by 2100, removed from the total to leave non-bio risk.
    pub bio_extinction_by_2100: f64,
    /// Probability of a year with at least 15% world GDP growth by 2100.
    pub tai_prob: f64,
}

impl ForecastSet {
    pub fn zero() -> Self {
        ForecastSet {
            group: Group::Custom,
            pandemic_by: [(2030, 0.0), (2050, 0.0), (2100, 0.0)].into(),
            natural_pandemic_by: BTreeMap::new(),
            catastrophe_by_2100: 0.0,
            total_catastrophe_by_2100: 0.0,
            extinction_by_2100: 0.0,
            total_extinction_by_2100: 0.0,
            bio_extinction_by_2100: 0.0,
            tai_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [
            ("catastrophe_by_2100", self.catastrophe_by_2100),
            ("total_catastrophe_by_2100", self.total_catastrophe_by_2100),
            ("extinction_by_2100", self.extinction_by_2100),
            ("total_extinction_by_2100", self.total_extinction_by_2100),
            ("bio_extinction_by_2100", self.bio_extinction_by_2100),
            ("tai_prob", self.tai_prob),
        ];
        for (name, v) in scalars {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, "must be a probability"));
            }
        }
        for (name, map) in [
            ("pandemic_by", &self.pandemic_by),
            ("natural_pandemic_by", &self.natural_pandemic_by),
        ] {
            let mut last = 0.0;
            for (&year, &v) in map {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::param(name, format!("{year}: must be a probability")));
                }
                if year <= FORECAST_EPOCH {
                    return Err(Error::param(
                        name,
                        format!("{year}: must follow {FORECAST_EPOCH}"),
                    ));
                }
                if v < last {
                    return Err(Error::param(
                        name,
                        "must be nondecreasing in the horizon year",
                    ));
                }
                last = v;
            }
        }
        Ok(())
    }

    fn pandemic(&self, year: u32) -> Result<f64> {
        self.pandemic_by
            .get(&year)
            .copied()
            .ok_or_else(|| Error::param("pandemic_by", format!("missing horizon {year}")))
    }
}

pub fn annualize_cumulative(p: f64, years: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "cumulative probability {p} must lie in [0, 1)"
        )));
    }
    if years == 0 {
        return Err(Error::Domain("period must span at least one year".into()));
    }
    Ok(1.0 - (1.0 - p).powf(1.0 / f64::from(years)))
}

/// Annual rate between two cumulative forecasts.
pub fn interval_annual_rate(p_early: f64, p_late: f64, y_early: u32, y_late: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&p_early) || !(0.0..1.0).contains(&p_late) {
        return Err(Error::Domain(
            "cumulative probabilities must lie in [0, 1)".into(),
        ));
    }
    if p_late < p_early {
        return Err(Error::Domain(format!(
            "later cumulative {p_late} is below earlier {p_early}"
        )));
    }
    if y_late <= y_early {
        return Err(Error::Domain(
            "later year must follow the earlier one".into(),
        ));
    }
    let ratio = (1.0 - p_late) / (1.0 - p_early);
    Ok(1.0 - ratio.powf(1.0 / f64::from(y_late - y_early)))
}

/// Which events count as leaving the current regime, besides transformative AI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegimeGate {
    #[default]
    Extinction,
    Catastrophe,
}

/// Annual probability of staying in the current regime, using non-bio extinction.
pub fn regime_survival_annual(forecasts: &ForecastSet, horizon_years: u32) -> Result<f64> {
    regime_survival_gated(forecasts, horizon_years, RegimeGate::Extinction)
}

pub fn regime_survival_gated(
    forecasts: &ForecastSet,
    horizon_years: u32,
    gate: RegimeGate,
) -> Result<f64> {
    let (total, bio) = match gate {
        RegimeGate::Extinction => (
            forecasts.total_extinction_by_2100,
            forecasts.bio_extinction_by_2100,
        ),
        RegimeGate::Catastrophe => (
            forecasts.total_catastrophe_by_2100,
            forecasts.catastrophe_by_2100,
        ),
    };
    if bio >= 1.0 {
        return Err(Error::Domain("biological risk must be below 1".into()));
    }
    if horizon_years == 0 {
        return Err(Error::Domain("horizon must span at least one year".into()));
    }
    let non_bio = 1.0 - (1.0 - total) / (1.0 - bio);
    // Extinction and transformative AI are treated as mutually exclusive.
    let exit = non_bio + forecasts.tai_prob;
    if exit >= 1.0 {
        return Err(Error::Domain(format!(
            "regime exit probability {exit} is not below 1"
        )));
    }
    Ok((1.0 - exit).powf(1.0 / f64::from(horizon_years)))
}

/// Probability conditional on remaining in the current regime for `horizon_years`.
pub fn condition_on_regime(p_uncond: f64, p_annual: f64, horizon_years: u32) -> Result<f64> {
    if !(p_annual > 0.0 && p_annual <= 1.0) {
        return Err(Error::Domain(format!(
            "annual regime probability {p_annual} must lie in (0, 1]"
        )));
    }
    let out = p_uncond / p_annual.powi(horizon_years as i32);
    if out > 1.0 {
        return Err(Error::Domain(format!(
            "conditional probability {out} exceeds 1; inputs are inconsistent"
        )));
    }
    Ok(out)
}

/// Time-of-perils pandemic rate matching the conditional 2050 forecast.
pub fn solve_perils_rate(q0: f64, p_cond_2050: f64, onset_year: u32) -> Result<f64> {
    if !(onset_year > FORECAST_EPOCH && onset_year < PERILS_HORIZON) {
        return Err(Error::Domain(format!(
            "onset year {onset_year} must lie strictly between {FORECAST_EPOCH} and {PERILS_HORIZON}"
        )));
    }
    let before = (1.0 - q0).powi((onset_year - FORECAST_EPOCH) as i32);
    let none = 1.0 - p_cond_2050;
    if before < none {
        return Err(Error::Domain(
            "baseline rate alone exceeds the 2050 forecast; implied q1 would be negative".into(),
        ));
    }
    Ok(1.0 - (none / before).powf(1.0 / f64::from(PERILS_HORIZON - onset_year)))
}

/// Annual extinction risk during perils, with none before onset.
pub fn annual_extinction_rate(p_cond_ext_2100: f64, onset_year: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&p_cond_ext_2100) {
        return Err(Error::Domain(
            "extinction probability must lie in [0, 1)".into(),
        ));
    }
    if onset_year >= FORECAST_END {
        return Err(Error::Domain(format!(
            "onset year {onset_year} must precede {FORECAST_END}"
        )));
    }
    Ok(1.0 - (1.0 - p_cond_ext_2100).powf(1.0 / f64::from(FORECAST_END - onset_year)))
}

/// Share `c` of >1% pandemics that reach >10% mortality, solving
/// `1 - P = (1 - c q0)^(onset - 2023) (1 - c qhat1 - x)^(2100 - onset)`.
pub fn solve_catastrophe_share(
    p_cat_cond: f64,
    q0: f64,
    qhat1: f64,
    x: f64,
    onset_year: u32,
) -> Result<f64> {
    for (name, v) in [
        ("P_cat", p_cat_cond),
        ("q0", q0),
        ("qhat1", qhat1),
        ("x", x),
    ] {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} = {v} must lie in [0, 1)")));
        }
    }
    if !(onset_year > FORECAST_EPOCH && onset_year < FORECAST_END) {
        return Err(Error::Domain(format!(
            "onset year {onset_year} out of range"
        )));
    }
    let n_before = (onset_year - FORECAST_EPOCH) as i32;
    let n_after = (FORECAST_END - onset_year) as i32;
    let target = 1.0 - p_cat_cond;
    let f = |c: f64| -> Result<f64> {
        let late = 1.0 - c * qhat1 - x;
        if late <= 0.0 {
            return Ok(-target);
        }
        Ok((1.0 - c * q0).powi(n_before) * late.powi(n_after) - target)
    };
    solve::bisect(f, 0.0, 1.0, CATASTROPHE_SHARE_TOLERANCE).map_err(|e| match e {
        Error::NoRoot(_) => {
            Error::NoRoot("no catastrophe share in [0, 1] matches the conditional forecast".into())
        }
        other => other,
    })
}

/// Probability-weighted mortality over the four severity buckets.
pub fn expected_annual_mortality(bucket_probs: &[f64; 4], severities: &[f64; 4]) -> Result<f64> {
    let sum: f64 = bucket_probs.iter().sum();
    if (sum - 1.0).abs() > 1e-12 || bucket_probs.iter().any(|&b| b < 0.0) {
        return Err(Error::Domain(format!(
            "bucket probabilities sum to {sum}, not 1"
        )));
    }
    if severities.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::Domain("severities must lie in [0, 1]".into()));
    }
    Ok(bucket_probs
        .iter()
        .zip(severities)
        .map(|(p, s)| p * s)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Carry full precision through every stage.
    #[default]
    Exact,
    /// Round `q0`, `q1` to 0.01 percentage points and `c` to 0.01 before use.
    Preferred,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    pub onset_year: u32,
    pub severities: [f64; 4],
    pub rounding: Rounding,
    /// Replaces the solved `q1` when set.
    pub q1_override: Option<f64>,
    pub gate: RegimeGate,
}

impl CalibrationOptions {
    pub fn new(onset_year: u32) -> Self {
        CalibrationOptions {
            onset_year,
            severities: DEFAULT_SEVERITIES,
            rounding: Rounding::Exact,
            q1_override: None,
            gate: RegimeGate::Extinction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalForecasts {
    pub pandemic_2030: f64,
    pub pandemic_2050: f64,
    pub pandemic_2100: f64,
    pub catastrophe_2100: f64,
    pub extinction_2100: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerilCalibration {
    pub p_regime_annual: f64,
    pub conditional: ConditionalForecasts,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub onset_year: u32,
    pub x_annual: f64,
    pub c: f64,
    pub baseline_buckets: [f64; 4],
    pub perils_buckets: [f64; 4],
    pub d_baseline: f64,
    pub d_perils: f64,
    pub d_excess: f64,
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

/// Probabilities of the 0-1%, 1-10%, 10-99.9% and 100% buckets for a year
/// with pandemic rate `q`, non-extinction rate `qhat` and extinction rate `x`.
fn buckets(q: f64, qhat: f64, x: f64, c: f64) -> [f64; 4] {
    let cat = c * qhat;
    [1.0 - q, q - cat - x, cat, x]
}

pub fn calibrate(forecasts: &ForecastSet, opts: &CalibrationOptions) -> Result<PerilCalibration> {
    forecasts.validate().stage("forecasts")?;
    let onset = opts.onset_year;
    let years = |y: u32| y - FORECAST_EPOCH;
    let p = regime_survival_gated(forecasts, years(FORECAST_END), opts.gate).stage("regime")?;

    let cond = |v: f64, year: u32| condition_on_regime(v, p, years(year));
    let conditional = ConditionalForecasts {
        pandemic_2030: cond(forecasts.pandemic(2030)?, 2030).stage("conditioning")?,
        pandemic_2050: cond(forecasts.pandemic(PERILS_HORIZON)?, PERILS_HORIZON)
            .stage("conditioning")?,
        pandemic_2100: cond(forecasts.pandemic(FORECAST_END)?, FORECAST_END)
            .stage("conditioning")?,
        catastrophe_2100: cond(forecasts.catastrophe_by_2100, FORECAST_END)
            .stage("conditioning")?,
        extinction_2100: cond(forecasts.extinction_by_2100, FORECAST_END).stage("conditioning")?,
    };

    let mut q0 =
        annualize_cumulative(conditional.pandemic_2030, years(2030)).stage("baseline rate")?;
    let mut q1 = solve_perils_rate(q0, conditional.pandemic_2050, onset).stage("perils rate")?;
    let q2 = interval_annual_rate(
        conditional.pandemic_2050,
        conditional.pandemic_2100,
        PERILS_HORIZON,
        FORECAST_END,
    )
    .stage("post-2050 rate")?;
    if opts.rounding == Rounding::Preferred {
        q0 = round_to(q0, 1e-4);
        q1 = round_to(q1, 1e-4);
    }
    if let Some(v) = opts.q1_override {
        q1 = v;
    }

    let x = annual_extinction_rate(conditional.extinction_2100, onset).stage("extinction rate")?;
    let qhat1 = q1 - x;
    if qhat1 < 0.0 {
        return Err(Error::Domain(
            "extinction rate exceeds the perils pandemic rate".into(),
        ))
        .stage("catastrophe share");
    }
    let mut c = solve_catastrophe_share(conditional.catastrophe_2100, q0, qhat1, x, onset)
        .stage("catastrophe share")?;
    if opts.rounding == Rounding::Preferred {
        c = round_to(c, 0.01);
    }

    let baseline_buckets = buckets(q0, q0, 0.0, c);
    let perils_buckets = buckets(q1, qhat1, x, c);
    let d_baseline = expected_annual_mortality(&baseline_buckets, &opts.severities)
        .stage("baseline mortality")?;
    let d_perils =
        expected_annual_mortality(&perils_buckets, &opts.severities).stage("perils mortality")?;

    Ok(PerilCalibration {
        p_regime_annual: p,
        conditional,
        q0,
        q1,
        q2,
        onset_year: onset,
        x_annual: x,
        c,
        baseline_buckets,
        perils_buckets,
        d_baseline,
        d_perils,
        d_excess: d_perils - d_baseline,
    })
}

/// Annual rates over 2023-2030, 2030-2050 and 2050-2100 implied by a
/// cumulative forecast map with those horizons.
pub fn period_rates(cumulative: &BTreeMap<u32, f64>) -> Result<[f64; 3]> {
    let get = |y: u32| {
        cumulative
            .get(&y)
            .copied()
            .ok_or_else(|| Error::param("forecast", format!("missing horizon {y}")))
    };
    let (a, b, c) = (get(2030)?, get(2050)?, get(2100)?);
    Ok([
        annualize_cumulative(a, 2030 - FORECAST_EPOCH)?,
        interval_annual_rate(a, b, 2030, 2050)?,
        interval_annual_rate(b, c, 2050, 2100)?,
    ])
}

/// Parses a probability written as a fraction or with a `%` suffix.
pub fn parse_probability(raw: &str) -> Result<f64> {
    let raw = raw.trim();
    let (num, scale) = match raw.strip_suffix('%') {
        Some(n) => (n.trim(), 0.01),
        None => (raw, 1.0),
    };
    num.parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| Error::Data(format!("not a number: {raw:?}")))
}

/// Reads a forecast file of `key,value` rows. Blank lines and `#` comments
/// are skipped; unknown keys are rejected.
pub fn parse_forecast_file(text: &str) -> Result<ForecastSet> {
    let mut set = ForecastSet::zero();
    set.pandemic_by.clear();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let (key, value) = line
            .split_once(',')
            .ok_or_else(|| Error::Data(format!("line {lineno}: expected key,value")))?;
        let key = key.trim();
        let value = value.trim();
        if key == "group" {
            set.group = match value {
                "superforecasters" => Group::Superforecasters,
                "domain_experts" => Group::DomainExperts,
                "custom" => Group::Custom,
                other => {
                    return Err(Error::Data(format!(
                        "line {lineno}: unknown group {other:?}"
                    )))
                }
            };
            continue;
        }
        let v = parse_probability(value).map_err(|e| Error::Data(format!("line {lineno}: {e}")))?;
        let year_of = |prefix: &str| -> Option<Result<u32>> {
            key.strip_prefix(prefix).map(|y| {
                y.parse::<u32>()
                    .map_err(|_| Error::Data(format!("line {lineno}: bad year in {key:?}")))
            })
        };
        if let Some(year) = year_of("natural_pandemic_by_") {
            set.natural_pandemic_by.insert(year?, v);
            continue;
        }
        if let Some(year) = year_of("pandemic_by_") {
            set.pandemic_by.insert(year?, v);
            continue;
        }
        let slot = match key {
            "catastrophe_by_2100" => &mut set.catastrophe_by_2100,
            "total_catastrophe_by_2100" => &mut set.total_catastrophe_by_2100,
            "extinction_by_2100" => &mut set.extinction_by_2100,
            "total_extinction_by_2100" => &mut set.total_extinction_by_2100,
            "bio_extinction_by_2100" => &mut set.bio_extinction_by_2100,
            "tai_prob" => &mut set.tai_prob,
            other => return Err(Error::Data(format!("line {lineno}: unknown key {other:?}"))),
        };
        *slot = v;
    }
    set.validate()?;
    Ok(set)
}

/// Writes a forecast set in the format read by [`parse_forecast_file`].
pub fn format_forecast_file(set: &ForecastSet) -> String {
    let group = match set.group {
        Group::Superforecasters => "superforecasters",
        Group::DomainExperts => "domain_experts",
        Group::Custom => "custom",
    };
    let mut out = format!("group,{group}\n");
    for (y, v) in &set.pandemic_by {
        out += &format!("pandemic_by_{y},{v}\n");
    }
    for (y, v) in &set.natural_pandemic_by {
        out += &format!("natural_pandemic_by_{y},{v}\n");
    }
    for (k, v) in [
        ("catastrophe_by_2100", set.catastrophe_by_2100),
        ("total_catastrophe_by_2100", set.total_catastrophe_by_2100),
        ("extinction_by_2100", set.extinction_by_2100),
        ("total_extinction_by_2100", set.total_extinction_by_2100),
        ("bio_extinction_by_2100", set.bio_extinction_by_2100),
        ("tai_prob", set.tai_prob),
    ] {
        out += &format!("{k},{v}\n");
    }
    out
}
