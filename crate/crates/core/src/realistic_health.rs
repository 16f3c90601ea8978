//! Cohort simulator with constant births and logistic survival curves.
//!
//! Survival shares follow
//! `1 / (1 + exp(-(a + b * age + c * ln(birth_year - 1800))))`, fitted to
//! US cohort tables. World cohorts are indexed into the US curve by
//! subtracting `birth_offset` years from the birth year.

use std::io::Read;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::core_model::{ImpactDecomposition, ModelParams};
use crate::error::{Error, Result};

pub const AGE_CAP: u32 = 120;
pub const DEFAULT_BIRTH_OFFSET: f64 = 24.0;
pub const BIRTH_YEAR_ORIGIN: f64 = 1800.0;
pub const BASE_YEAR: f64 = 2023.0;
pub const DEFAULT_SETBACK: f64 = 0.5625;
pub const SHARE_CLAMP: f64 = 1e-6;
const TAIL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub age_cap: u32,
    pub birth_offset: f64,
}

impl SurvivalModel {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        SurvivalModel {
            a,
            b,
            c,
            age_cap: AGE_CAP,
            birth_offset: DEFAULT_BIRTH_OFFSET,
        }
    }

    /// Checks the monotonicity signs: `b < 0` and `c > 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.b < 0.0) {
            return Err(Error::param("b", "survival must decline with age (b < 0)"));
        }
        if !(self.c > 0.0) {
            return Err(Error::param(
                "c",
                "survival must improve with birth year (c > 0)",
            ));
        }
        Ok(())
    }

    #[inline]
    fn logistic(&self, birth_year: f64, age: f64) -> f64 {
        let eta = self.a + self.b * age + self.c * (birth_year - BIRTH_YEAR_ORIGIN).ln();
        1.0 / (1.0 + (-eta).exp())
    }
}

pub fn survival_share(model: &SurvivalModel, birth_year: f64, age: f64) -> Result<f64> {
    if !(birth_year > BIRTH_YEAR_ORIGIN) {
        return Err(Error::Domain(format!(
            "birth year {birth_year} must be after {BIRTH_YEAR_ORIGIN}"
        )));
    }
    if !(age >= 0.0) {
        return Err(Error::Domain(format!("age {age} must be nonnegative")));
    }
    if age > f64::from(model.age_cap) {
        return Ok(0.0);
    }
    Ok(model.logistic(birth_year, age))
}

/// Sum of survival shares over ages `0..=age_cap` for a US-indexed cohort.
pub fn life_expectancy(model: &SurvivalModel, birth_year: f64) -> Result<f64> {
    (0..=model.age_cap).try_fold(0.0, |acc, age| {
        Ok(acc + survival_share(model, birth_year, f64::from(age))?)
    })
}

/// Life expectancy of a world cohort, read off the US curve `birth_offset` years earlier.
pub fn world_life_expectancy(model: &SurvivalModel, birth_year: f64) -> Result<f64> {
    life_expectancy(model, birth_year - model.birth_offset)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalRecord {
    pub birth_year: f64,
    pub age: f64,
    pub share: f64,
}

/// Reads `birth_year,age,share_alive` rows.
pub fn read_actuarial_csv<R: Read>(reader: R) -> Result<Vec<SurvivalRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Data(e.to_string()))?
        .clone();
    let expected = ["birth_year", "age", "share_alive"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::Data(format!(
            "expected header `birth_year,age,share_alive`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Data(e.to_string()))?;
        let field = |j: usize| -> Result<f64> {
            row[j].parse::<f64>().map_err(|_| {
                Error::Data(format!("row {}: bad {} `{}`", i + 2, expected[j], &row[j]))
            })
        };
        out.push(SurvivalRecord {
            birth_year: field(0)?,
            age: field(1)?,
            share: field(2)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitObjective {
    /// Ordinary least squares on clamped logits of the shares.
    #[default]
    LogitLeastSquares,
    /// Binomial likelihood on the shares, fitted by iteratively reweighted least squares.
    Binomial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub model: SurvivalModel,
    /// Root mean squared error on the share scale.
    pub rmse: f64,
    pub observations: usize,
    pub objective: FitObjective,
}

fn check_table(table: &[SurvivalRecord]) -> Result<()> {
    let mut years: Vec<f64> = table.iter().map(|r| r.birth_year).collect();
    years.sort_by(f64::total_cmp);
    years.dedup();
    let mut ages: Vec<f64> = table.iter().map(|r| r.age).collect();
    ages.sort_by(f64::total_cmp);
    ages.dedup();
    if years.len() < 2 || ages.len() < 10 {
        return Err(Error::Data(format!(
            "need at least 2 birth years and 10 ages, found {} and {}",
            years.len(),
            ages.len()
        )));
    }
    for r in table {
        if !(r.birth_year > BIRTH_YEAR_ORIGIN) {
            return Err(Error::Data(format!(
                "birth year {} not after 1800",
                r.birth_year
            )));
        }
        if !(0.0..=1.0).contains(&r.share) {
            return Err(Error::Data(format!("share {} outside [0, 1]", r.share)));
        }
    }
    let first = table[0].share;
    if table.iter().all(|r| r.share == first) {
        return Err(Error::Data("all survival shares are equal".into()));
    }
    Ok(())
}

fn design(table: &[SurvivalRecord]) -> DMatrix<f64> {
    DMatrix::from_fn(table.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => table[i].age,
        _ => (table[i].birth_year - BIRTH_YEAR_ORIGIN).ln(),
    })
}

fn logit_least_squares(x: &DMatrix<f64>, table: &[SurvivalRecord]) -> Result<Vector3<f64>> {
    let z = DVector::from_iterator(
        table.len(),
        table.iter().map(|r| {
            let y = r.share.clamp(SHARE_CLAMP, 1.0 - SHARE_CLAMP);
            (y / (1.0 - y)).ln()
        }),
    );
    let svd = x.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * max_sv {
        return Err(Error::Data("design matrix is rank deficient".into()));
    }
    let beta = svd
        .solve(&z, 1e-12 * max_sv)
        .map_err(|e| Error::Data(e.to_string()))?;
    Ok(Vector3::new(beta[0], beta[1], beta[2]))
}

fn binomial_irls(
    x: &DMatrix<f64>,
    table: &[SurvivalRecord],
    start: Vector3<f64>,
) -> Result<Vector3<f64>> {
    const MAX_ITER: usize = 200;
    let mut beta = start;
    for _ in 0..MAX_ITER {
        let mut xtwx = Matrix3::zeros();
        let mut xtwz = Vector3::zeros();
        for (i, r) in table.iter().enumerate() {
            let row = Vector3::new(x[(i, 0)], x[(i, 1)], x[(i, 2)]);
            let eta = row.dot(&beta);
            let mu = 1.0 / (1.0 + (-eta).exp());
            let w = (mu * (1.0 - mu)).max(1e-12);
            let z = eta + (r.share - mu) / w;
            xtwx += w * row * row.transpose();
            xtwz += w * z * row;
        }
        let next = xtwx
            .cholesky()
            .ok_or_else(|| Error::Data("weighted normal equations are singular".into()))?
            .solve(&xtwz);
        let step = (next - beta).amax();
        beta = next;
        if step <= 1e-11 * (1.0 + beta.amax()) {
            return Ok(beta);
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITER,
    })
}

pub fn fit_survival(table: &[SurvivalRecord], objective: FitObjective) -> Result<FitReport> {
    check_table(table)?;
    let x = design(table);
    let mut beta = logit_least_squares(&x, table)?;
    if objective == FitObjective::Binomial {
        beta = binomial_irls(&x, table, beta)?;
    }
    let model = SurvivalModel::new(beta[0], beta[1], beta[2]);
    let sse: f64 = table
        .iter()
        .map(|r| {
            let e = model.logistic(r.birth_year, r.age) - r.share;
            e * e
        })
        .sum();
    Ok(FitReport {
        model,
        rmse: (sse / table.len() as f64).sqrt(),
        observations: table.len(),
        objective,
    })
}

/// Parses a fitted-model file of `key=value` lines (`a`, `b`, `c`, `offset`,
/// `source`, optional `age_cap`); `#` starts a comment.
pub fn parse_model_file(text: &str) -> Result<(SurvivalModel, String)> {
    let mut a = None;
    let mut b = None;
    let mut c = None;
    let mut offset = None;
    let mut cap = None;
    let mut source = String::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Data(format!("line {}: expected key=value", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::Data(format!("line {}: bad number `{value}`", n + 1)))
        };
        match key {
            "a" => a = Some(num()?),
            "b" => b = Some(num()?),
            "c" => c = Some(num()?),
            "offset" => offset = Some(num()?),
            "age_cap" => {
                cap =
                    Some(value.parse::<u32>().map_err(|_| {
                        Error::Data(format!("line {}: bad age cap `{value}`", n + 1))
                    })?)
            }
            "source" => source = value.to_string(),
            other => {
                return Err(Error::Data(format!(
                    "line {}: unknown key `{other}`",
                    n + 1
                )))
            }
        }
    }
    let missing = |k: &str| Error::Data(format!("model file lacks `{k}`"));
    let model = SurvivalModel {
        a: a.ok_or_else(|| missing("a"))?,
        b: b.ok_or_else(|| missing("b"))?,
        c: c.ok_or_else(|| missing("c"))?,
        age_cap: cap.unwrap_or(AGE_CAP),
        birth_offset: offset.unwrap_or(DEFAULT_BIRTH_OFFSET),
    };
    model.validate()?;
    Ok((model, source))
}

pub fn format_model_file(model: &SurvivalModel, source: &str) -> String {
    format!(
        "a={:.17e}\nb={:.17e}\nc={:.17e}\noffset={}\nage_cap={}\nsource={}\n",
        model.a, model.b, model.c, model.birth_offset, model.age_cap, source
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohortGrid {
    pub horizon: usize,
    pub births_per_year: f64,
}

impl Default for CohortGrid {
    fn default() -> Self {
        CohortGrid {
            horizon: 3000,
            births_per_year: 130e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealisticSetup {
    pub model: SurvivalModel,
    /// Share of a year's health progress lost when science pauses.
    pub h: f64,
    pub grid: CohortGrid,
}

impl RealisticSetup {
    pub fn new(model: SurvivalModel) -> Self {
        RealisticSetup {
            model,
            h: DEFAULT_SETBACK,
            grid: CohortGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealisticReport {
    pub decomposition: ImpactDecomposition,
    /// `V_SQ - V_PS` summed directly rather than by channel.
    pub direct_total: f64,
    /// Status-quo population by period, before regime weighting.
    pub population: Vec<f64>,
}

/// Survival under the pause: unchanged through `T`, fully set back for
/// cohorts born after `T`, and rescaled from their period-`T` share for
/// cohorts alive at `T`.
fn paused_share(
    t: usize,
    a: usize,
    lag: usize,
    s: &dyn Fn(usize, usize) -> f64,
    setback: &dyn Fn(usize, usize) -> f64,
) -> f64 {
    if t <= lag {
        s(t, a)
    } else if a < t && t - a > lag {
        setback(t, a)
    } else {
        let age_at_lag = a - (t - lag);
        s(lag, age_at_lag) * setback(t, a) / setback(lag, age_at_lag)
    }
}

/// Share of the cohort aged `age` in period `t` alive under the pause, with
/// setback weight `h` and lag `lag`.
pub fn paused_survival(model: &SurvivalModel, h: f64, lag: u32, t: u32, age: u32) -> Result<f64> {
    if age > model.age_cap {
        return Ok(0.0);
    }
    let share = |t: i64, a: usize| {
        let by = BASE_YEAR + t as f64 - a as f64 - model.birth_offset;
        survival_share(model, by, a as f64)
    };
    // Evaluate eagerly so domain errors surface before the closures run.
    share(i64::from(t) - 1, age as usize)?;
    let s = |t: usize, a: usize| share(t as i64, a).unwrap_or(f64::NAN);
    let setback = |t: usize, a: usize| {
        (1.0 - h) * share(t as i64, a).unwrap_or(f64::NAN)
            + h * share(t as i64 - 1, a).unwrap_or(f64::NAN)
    };
    let v = paused_share(t as usize, age as usize, lag as usize, &s, &setback);
    if v.is_nan() {
        return Err(Error::Domain(format!(
            "cohort at t={t}, age={age} precedes 1800"
        )));
    }
    Ok(v)
}

pub fn realistic_impact(params: &ModelParams, setup: &RealisticSetup) -> Result<RealisticReport> {
    params.validate()?;
    setup.model.validate()?;
    if !(0.0..=1.0).contains(&setup.h) {
        return Err(Error::param("h", "must lie in [0, 1]"));
    }
    let horizon = setup.grid.horizon;
    let lag = params.lag as usize;
    if horizon <= lag {
        return Err(Error::HorizonTooSmall {
            horizon,
            tail: f64::INFINITY,
        });
    }
    let model = &setup.model;
    let ages = model.age_cap as usize + 1;
    let earliest = BASE_YEAR - 1.0 - model.age_cap as f64 - model.birth_offset;
    if !(earliest > BIRTH_YEAR_ORIGIN) {
        return Err(Error::Domain(format!(
            "oldest cohort indexes birth year {earliest}, not after 1800"
        )));
    }

    // surv[t + 1][a] holds S(t, a) for t in -1..=horizon.
    let surv: Vec<Vec<f64>> = (0..=horizon + 1)
        .map(|row| {
            let t = row as f64 - 1.0;
            (0..ages)
                .map(|a| {
                    let by = BASE_YEAR + t - a as f64 - model.birth_offset;
                    model.logistic(by, a as f64)
                })
                .collect()
        })
        .collect();
    let s = |t: usize, a: usize| surv[t + 1][a];
    let setback = |t: usize, a: usize| (1.0 - setup.h) * surv[t + 1][a] + setup.h * surv[t][a];

    let keep: Vec<f64> = (0..ages).map(|k| (1.0 - params.d).powi(k as i32)).collect();
    let t1 = params.t1 as usize;
    let peril = |t: usize, a: usize, onset: usize| {
        if t <= onset {
            1.0
        } else {
            keep[(t - onset).min(a)]
        }
    };

    let (big_g, small_g) = params.utility_steps();
    let u_t1 = 2.0 + (lag as f64 + 1.0) * big_g;
    let births = setup.grid.births_per_year;
    let mut parts = [0.0f64; 4];
    let mut direct = 0.0;
    let mut level = 0.0;
    let mut population = Vec::with_capacity(horizon + 1);
    let mut weight = 1.0;
    let mut last_term = 0.0;

    for t in 0..=horizon {
        if t > 0 {
            weight *= params.p;
        }
        let mut pop_sq = 0.0;
        let mut pop_ps = 0.0;
        for a in 0..ages {
            pop_sq += peril(t, a, t1) * s(t, a);
            let s_bar = paused_share(t, a, lag, &s, &setback);
            pop_ps += peril(t, a, t1 + 1) * s_bar;
        }
        pop_sq *= births;
        pop_ps *= births;
        population.push(pop_sq);

        let tf = t as f64;
        let u_sq = 2.0 + tf * big_g;
        let u_ps = if t > lag {
            u_sq - big_g + small_g
        } else {
            u_sq
        };
        let diff = weight * (pop_sq - pop_ps);
        if t <= lag {
            parts[0] += diff * u_sq;
        } else {
            parts[1] += weight * pop_ps * (u_sq - u_ps);
            parts[2] += diff * u_t1;
            parts[3] += diff * (tf - lag as f64 - 1.0) * big_g;
        }
        direct += weight * (pop_sq * u_sq - pop_ps * u_ps);
        last_term = weight * pop_sq * u_sq;
        level += last_term;
    }

    // Population never exceeds births * ages and utility grows linearly.
    let p = params.p;
    let cap_pop = births * ages as f64;
    let h1 = horizon as f64 + 1.0;
    let tail = cap_pop
        * weight
        * p
        * ((2.0 + h1 * big_g) / (1.0 - p) + big_g * p / ((1.0 - p) * (1.0 - p)));
    if tail > TAIL_TOLERANCE * level || !last_term.is_finite() {
        return Err(Error::HorizonTooSmall { horizon, tail });
    }

    Ok(RealisticReport {
        decomposition: ImpactDecomposition::new(parts[0], parts[1], parts[2], parts[3]),
        direct_total: direct,
        population,
    })
}
