use std::path::{Path, PathBuf};

use perils_core::better_science::{
    better_extinction_adjusted_impact, better_science_breakeven, better_science_impact,
    breakeven_lambda_better, reduced_peril,
};
use perils_core::extinction_model::{
    breakeven_lambda_from_gain, extinction_penalty, rho_for_lambda,
};
use perils_core::forecast_calibration::parse_forecast_file;
use perils_core::realistic_health::{
    format_model_file, life_expectancy, parse_model_file, read_actuarial_csv, realistic_impact,
    world_life_expectancy,
};
use perils_core::{
    breakeven_peril, calibrate, fit_survival, impact_decomposition, op_multiple, presets, solve,
    too_late_impact, CalibrationOptions, FitObjective, ForecastSet, Group, ImpactDecomposition,
    PerilVariant, RealisticSetup, ReductionAnchors,
};

use crate::config::{ScenarioConfig, Variant, NUMERIC_KEYS};
use crate::error::{CliError, CliResult};
use crate::report::{Cell, Format, Report};

pub const DATA_ENV: &str = "PERILS_DATA_DIR";
pub const MODEL_FILE: &str = "survival_fit.txt";
pub const ACTUARIAL_FILE: &str = "ssa_cohort_survival.csv";

/// `PERILS_DATA_DIR`, else `./data` when it holds a fitted model, else the
/// repository's `data/` directory.
pub fn data_dir() -> PathBuf {
    if let Some(d) = std::env::var_os(DATA_ENV) {
        return d.into();
    }
    let local = PathBuf::from("data");
    if local.join(MODEL_FILE).exists() {
        return local;
    }
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_setup(cfg: &ScenarioConfig) -> CliResult<RealisticSetup> {
    let path = data_dir().join(MODEL_FILE);
    let (model, _) = parse_model_file(&read(&path)?)?;
    Ok(RealisticSetup {
        h: cfg.h,
        ..RealisticSetup::new(model)
    })
}

/// Result of one scenario: better science reports only a total.
pub enum Outcome {
    Decomposition(ImpactDecomposition),
    Total(f64),
}

impl Outcome {
    pub fn total(&self) -> f64 {
        match self {
            Outcome::Decomposition(d) => d.total,
            Outcome::Total(t) => *t,
        }
    }
}

pub fn evaluate_variant(
    cfg: &ScenarioConfig,
    setup: Option<&RealisticSetup>,
) -> CliResult<Outcome> {
    let params = cfg.model_params();
    Ok(match cfg.variant {
        Variant::Baseline | Variant::ImmediateOnset => {
            Outcome::Decomposition(impact_decomposition(&params)?)
        }
        Variant::TooLate => Outcome::Decomposition(too_late_impact(&params)?),
        Variant::Realistic => {
            let setup =
                setup.ok_or_else(|| CliError::Config("realistic model not loaded".into()))?;
            Outcome::Decomposition(realistic_impact(&params, setup)?.decomposition)
        }
        Variant::BetterScience => {
            let d_bar = reduced_peril(params.d, &ReductionAnchors::default())?;
            Outcome::Total(better_science_impact(&params, d_bar)?)
        }
    })
}

fn setup_for(cfg: &ScenarioConfig) -> CliResult<Option<RealisticSetup>> {
    match cfg.variant {
        Variant::Realistic => load_setup(cfg).map(Some),
        _ => Ok(None),
    }
}

/// Welfare gain entering the extinction break-even: the baseline-model
/// difference for better science, the variant's own total otherwise.
fn extinction_gain(cfg: &ScenarioConfig, outcome: &Outcome) -> CliResult<f64> {
    match cfg.variant {
        Variant::BetterScience => Ok(impact_decomposition(&cfg.model_params())?.total),
        _ => Ok(outcome.total()),
    }
}

fn breakeven_lambda_for(cfg: &ScenarioConfig, gain: f64, dx: f64) -> CliResult<f64> {
    let p = cfg.params.p;
    Ok(match cfg.variant {
        Variant::BetterScience => {
            let dx_bar = reduced_peril(dx, &ReductionAnchors::default())?;
            breakeven_lambda_better(gain, p, dx, dx_bar, cfg.w)?
        }
        _ => breakeven_lambda_from_gain(gain, p, dx, cfg.w)?,
    })
}

fn adjusted_total(cfg: &ScenarioConfig, outcome: &Outcome, dx: f64, lambda: f64) -> CliResult<f64> {
    let p = cfg.params.p;
    let lw = lambda * cfg.w;
    Ok(match cfg.variant {
        Variant::BetterScience => {
            let dx_bar = reduced_peril(dx, &ReductionAnchors::default())?;
            better_extinction_adjusted_impact(extinction_gain(cfg, outcome)?, p, dx, dx_bar, lw)
        }
        _ => outcome.total() - extinction_penalty(p, dx, lw),
    })
}

pub fn evaluate(cfg: &ScenarioConfig) -> CliResult<Report> {
    let setup = setup_for(cfg)?;
    let outcome = evaluate_variant(cfg, setup.as_ref())?;
    let params = cfg.model_params();
    let mut r = Report::new("Scenario evaluation", &["quantity", "value"]);
    r.push(vec![Cell::text("variant"), Cell::text(cfg.variant.name())]);
    r.push(vec![Cell::text("d"), Cell::Pct(params.d, 5)]);
    match &outcome {
        Outcome::Decomposition(dec) => {
            let m = dec.map(op_multiple);
            for (name, v) in [
                ("pure peril (multiple)", m.pure_peril),
                ("pure income (multiple)", m.pure_income),
                ("pure health (multiple)", m.pure_health),
                ("health-income (multiple)", m.health_income),
            ] {
                r.push(vec![Cell::text(name), Cell::Num(v, 2)]);
            }
        }
        Outcome::Total(_) => {
            let d_bar = reduced_peril(params.d, &ReductionAnchors::default())?;
            r.push(vec![Cell::text("d_bar"), Cell::Pct(d_bar, 5)]);
            let base = impact_decomposition(&params)?.total;
            if base != 0.0 {
                r.push(vec![
                    Cell::text("utility scaling"),
                    Cell::Num(outcome.total() / base, 4),
                ]);
            }
        }
    }
    r.push(vec![
        Cell::text("total (multiple)"),
        Cell::Num(op_multiple(outcome.total()), 2),
    ]);
    r.push(vec![
        Cell::text("total (utils)"),
        Cell::Num(outcome.total(), 0),
    ]);
    if let Some(dx) = cfg.dx.filter(|&dx| dx > 0.0) {
        let gain = extinction_gain(cfg, &outcome)?;
        r.push(vec![Cell::text("dx"), Cell::Pct(dx, 5)]);
        match breakeven_lambda_for(cfg, gain, dx) {
            Ok(l) => r.push(vec![Cell::text("break-even lambda"), Cell::Num(l, 1)]),
            Err(e) => r.note(format!("break-even lambda: {e}")),
        }
        if let Some(lambda) = cfg.lambda {
            let adj = adjusted_total(cfg, &outcome, dx, lambda)?;
            r.push(vec![Cell::text("lambda"), Cell::Num(lambda, 1)]);
            r.push(vec![
                Cell::text("extinction-adjusted total (multiple)"),
                Cell::Num(op_multiple(adj), 2),
            ]);
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    D,
    Lambda,
    Rho,
}

fn breakeven_d(cfg: &ScenarioConfig) -> CliResult<f64> {
    let params = cfg.params;
    Ok(match cfg.variant {
        Variant::Baseline => breakeven_peril(&params, PerilVariant::Baseline)?,
        Variant::ImmediateOnset => breakeven_peril(&params, PerilVariant::ImmediateOnset)?,
        Variant::Realistic => {
            let setup = load_setup(cfg)?;
            breakeven_peril(&params, PerilVariant::Realistic(&setup))?
        }
        Variant::BetterScience => better_science_breakeven(&params, &ReductionAnchors::default())?,
        Variant::TooLate => {
            // The gain decays towards zero but stays positive; an underflowed
            // zero near d = 1 is not a sign change.
            let objective = |d: f64| Ok(too_late_impact(&params.with_d(d))?.total);
            let cap = 1.0 - 1e-9;
            if objective(cap)? >= 0.0 {
                return Err(perils_core::Error::NoRoot(
                    "too-late gain stays nonnegative for every d < 1".into(),
                )
                .into());
            }
            let (lo, hi) = solve::bracket_decreasing(objective, 0.0, 1e-3, cap)?;
            solve::bisect(objective, lo, hi, perils_core::core_model::PERIL_TOLERANCE)?
        }
    })
}

fn breakeven_lambda(cfg: &ScenarioConfig) -> CliResult<f64> {
    let dx = cfg.dx.filter(|&dx| dx > 0.0).ok_or_else(|| {
        CliError::Config("break-even lambda needs dx > 0 (set dx or a preset)".into())
    })?;
    let setup = setup_for(cfg)?;
    let outcome = evaluate_variant(cfg, setup.as_ref())?;
    breakeven_lambda_for(cfg, extinction_gain(cfg, &outcome)?, dx)
}

pub fn breakeven(cfg: &ScenarioConfig, target: Target) -> CliResult<Report> {
    let mut r = Report::new("Break-even", &["target", "variant", "value"]);
    let variant = Cell::text(cfg.variant.name());
    match target {
        Target::D => r.push(vec![
            Cell::text("d"),
            variant,
            Cell::Pct(breakeven_d(cfg)?, 5),
        ]),
        Target::Lambda => r.push(vec![
            Cell::text("lambda"),
            variant,
            Cell::Num(breakeven_lambda(cfg)?, 1),
        ]),
        Target::Rho => {
            let lambda = match cfg.lambda {
                Some(l) => l,
                None => breakeven_lambda(cfg)?,
            };
            let rho = rho_for_lambda(lambda, cfg.params.growth)?;
            r.push(vec![
                Cell::text("lambda"),
                variant.clone(),
                Cell::Num(lambda, 1),
            ]);
            r.push(vec![Cell::text("rho"), variant, Cell::Num(rho, 8)]);
        }
    }
    Ok(r)
}

fn options_for(group: Group, cfg: &ScenarioConfig) -> CalibrationOptions {
    let mut opts = presets::calibration_options(group);
    if let Some(y) = cfg.onset_year {
        opts.onset_year = y;
    }
    opts
}

pub fn calibrate_report(cfg: &ScenarioConfig, forecasts: Option<&Path>) -> CliResult<Report> {
    let path = forecasts
        .map(Path::to_path_buf)
        .or_else(|| cfg.forecast_file.clone());
    let sets: Vec<ForecastSet> = match (path, cfg.group) {
        (Some(p), _) => vec![parse_forecast_file(&read(&p)?)?],
        (None, Some(g)) => vec![presets::forecasts(g)],
        (None, None) => vec![
            presets::forecasts(Group::Superforecasters),
            presets::forecasts(Group::DomainExperts),
        ],
    };
    let cals = sets
        .iter()
        .map(|s| calibrate(s, &options_for(s.group, cfg)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut headers = vec!["quantity"];
    headers.extend(sets.iter().map(|s| s.group.label()));
    let mut r = Report::new("Peril calibration", &headers);
    let mut row = |name: &str, f: &dyn Fn(&perils_core::PerilCalibration) -> Cell| {
        let mut cells = vec![Cell::text(name)];
        cells.extend(cals.iter().map(f));
        r.push(cells);
    };
    row("regime survival p", &|c| Cell::Pct(c.p_regime_annual, 3));
    row("conditional pandemic by 2030", &|c| {
        Cell::Pct(c.conditional.pandemic_2030, 2)
    });
    row("conditional pandemic by 2050", &|c| {
        Cell::Pct(c.conditional.pandemic_2050, 2)
    });
    row("conditional pandemic by 2100", &|c| {
        Cell::Pct(c.conditional.pandemic_2100, 2)
    });
    row("conditional catastrophe by 2100", &|c| {
        Cell::Pct(c.conditional.catastrophe_2100, 2)
    });
    row("conditional extinction by 2100", &|c| {
        Cell::Pct(c.conditional.extinction_2100, 3)
    });
    row("q0", &|c| Cell::Pct(c.q0, 2));
    row("q1", &|c| Cell::Pct(c.q1, 2));
    row("q2", &|c| Cell::Pct(c.q2, 2));
    row("onset year", &|c| Cell::text(c.onset_year.to_string()));
    row("annual extinction x", &|c| Cell::Pct(c.x_annual, 5));
    row("catastrophe share c", &|c| Cell::Num(c.c, 2));
    let names = ["0-1%", "1-10%", "10-99.9%", "100%"];
    for (i, name) in names.iter().enumerate() {
        row(&format!("baseline {name}"), &|c| {
            Cell::Pct(c.baseline_buckets[i], 4)
        });
    }
    for (i, name) in names.iter().enumerate() {
        row(&format!("perils {name}"), &|c| {
            Cell::Pct(c.perils_buckets[i], 4)
        });
    }
    row("expected mortality, baseline", &|c| {
        Cell::Pct(c.d_baseline, 4)
    });
    row("expected mortality, perils", &|c| Cell::Pct(c.d_perils, 4));
    row("excess mortality d", &|c| Cell::Pct(c.d_excess, 4));
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Objective {
    Logit,
    Binomial,
}

/// Fits the survival model and returns the model-file text (or one CSV row).
pub fn fit_survival_output(
    input: Option<&Path>,
    objective: Objective,
    source: Option<&str>,
    format: Format,
) -> CliResult<String> {
    let path = input
        .map(Path::to_path_buf)
        .unwrap_or_else(|| data_dir().join(ACTUARIAL_FILE));
    let file = std::fs::File::open(&path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let table = read_actuarial_csv(file)?;
    let objective = match objective {
        Objective::Logit => FitObjective::LogitLeastSquares,
        Objective::Binomial => FitObjective::Binomial,
    };
    let fit = fit_survival(&table, objective)?;
    let m = fit.model;
    let us = life_expectancy(&m, 2019.0)?;
    let world = world_life_expectancy(&m, 2019.0)?;
    if format == Format::Csv {
        let mut r = Report::new(
            "",
            &["a", "b", "c", "offset", "age_cap", "rmse", "observations"],
        );
        r.push(vec![
            Cell::Num(m.a, 0),
            Cell::Num(m.b, 0),
            Cell::Num(m.c, 0),
            Cell::Num(m.birth_offset, 0),
            Cell::Num(f64::from(m.age_cap), 0),
            Cell::Num(fit.rmse, 0),
            Cell::Num(fit.observations as f64, 0),
        ]);
        return Ok(r.to_csv());
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let source = source.map(str::to_string).unwrap_or(name);
    let objective_name = match objective {
        FitObjective::LogitLeastSquares => "logit least squares",
        FitObjective::Binomial => "binomial likelihood",
    };
    Ok(format!(
        "# logistic survival model, {objective_name} fit\n\
         # observations={} rmse={:.6}\n\
         # life expectancy: 2019 cohort {us:.2}, world 2019 {world:.2}\n{}",
        fit.observations,
        fit.rmse,
        format_model_file(&m, &source)
    ))
}

pub struct SweepSpec<'a> {
    pub param: &'a str,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

pub fn sweep(cfg: &ScenarioConfig, spec: &SweepSpec<'_>) -> CliResult<Report> {
    if !NUMERIC_KEYS.contains(&spec.param) {
        return Err(CliError::Config(format!(
            "cannot sweep `{}`; expected one of {}",
            spec.param,
            NUMERIC_KEYS.join(", ")
        )));
    }
    if spec.steps < 2 {
        return Err(CliError::Config("steps must be at least 2".into()));
    }
    if !(spec.from.is_finite() && spec.to.is_finite() && spec.from < spec.to) {
        return Err(CliError::Config(
            "sweep range needs finite from < to".into(),
        ));
    }
    let mut setup = setup_for(cfg)?;
    let ext = cfg.dx.is_some_and(|dx| dx > 0.0) || spec.param == "dx";
    let mut headers = vec![
        spec.param,
        "pure peril",
        "pure income",
        "pure health",
        "health-income",
        "total",
    ];
    if ext {
        headers.push("break-even lambda");
        if cfg.lambda.is_some() || spec.param == "lambda" {
            headers.push("adjusted total");
        }
    }
    let mut r = Report::new(
        format!(
            "Sweep of {} ({} variant, benchmark multiples)",
            spec.param,
            cfg.variant.name()
        ),
        &headers,
    );
    let n = spec.steps - 1;
    for i in 0..=n {
        let v = if i == n {
            spec.to
        } else {
            spec.from + (spec.to - spec.from) * i as f64 / n as f64
        };
        let mut point = cfg.clone();
        point.set_number(spec.param, v).map_err(CliError::Config)?;
        point.validate()?;
        if let Some(s) = setup.as_mut() {
            s.h = point.h;
        }
        let outcome = evaluate_variant(&point, setup.as_ref())?;
        let mut row = vec![Cell::Num(v, 6)];
        match &outcome {
            Outcome::Decomposition(dec) => row.extend(
                dec.map(op_multiple)
                    .components()
                    .iter()
                    .map(|&c| Cell::Num(c, 2)),
            ),
            Outcome::Total(_) => row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
        }
        row.push(Cell::Num(op_multiple(outcome.total()), 2));
        if ext {
            let dx = point.dx.unwrap_or(0.0);
            let gain = extinction_gain(&point, &outcome)?;
            row.push(match breakeven_lambda_for(&point, gain, dx) {
                Ok(l) => Cell::Num(l, 1),
                Err(_) => Cell::Empty,
            });
            if headers.len() == 8 {
                let lambda = point.lambda.unwrap_or(0.0);
                row.push(Cell::Num(
                    op_multiple(adjusted_total(&point, &outcome, dx, lambda)?),
                    2,
                ));
            }
        }
        r.push(row);
    }
    Ok(r)
}
