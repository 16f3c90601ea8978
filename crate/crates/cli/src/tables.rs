//! Regenerates the published tables from the built-in presets.

use perils_core::better_science::{
    better_science_breakeven, better_science_impact, breakeven_lambda_better, reduced_peril,
    utility_scaling,
};
use perils_core::extinction_model::breakeven_lambda_from_gain;
use perils_core::forecast_calibration::period_rates;
use perils_core::realistic_health::realistic_impact;
use perils_core::{
    breakeven_peril, calibrate, impact_decomposition, op_multiple, presets, too_late_impact, Group,
    ImpactDecomposition, PerilVariant, ReductionAnchors,
};

use crate::commands::load_setup;
use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};
use crate::report::{Cell, Report};

pub const TABLE_IDS: &[&str] = &["7", "8", "9", "10", "11", "12", "13", "A2", "A3.5", "A3.8"];

const GROUPS: [Group; 2] = [Group::Superforecasters, Group::DomainExperts];

fn scenarios() -> [(&'static str, f64); 3] {
    [
        ("No time of perils", 0.0),
        ("Superforecasters", presets::D_SUPERFORECASTERS),
        ("Domain experts", presets::D_EXPERTS),
    ]
}

const DECOMP_HEADERS: [&str; 7] = [
    "scenario",
    "d",
    "pure peril",
    "pure income",
    "pure health",
    "health-income",
    "total",
];

fn decomp_row(label: &str, d: f64, dec: &ImpactDecomposition) -> Vec<Cell> {
    let m = dec.map(op_multiple);
    vec![
        Cell::text(label),
        Cell::Pct(d, 4),
        Cell::Num(m.pure_peril, 0),
        Cell::Num(m.pure_income, 0),
        Cell::Num(m.pure_health, 0),
        Cell::Num(m.health_income, 0),
        Cell::Num(m.total, 0),
    ]
}

pub fn run_table(id: &str, cfg: &ScenarioConfig) -> CliResult<Report> {
    match id {
        "7" => table_7(cfg),
        "8" => table_8(cfg),
        "9" => table_9(cfg),
        "10" => table_10(cfg),
        "11" => table_11(cfg),
        "12" => table_12(cfg),
        "13" => table_13(cfg),
        "A2" | "a2" => table_a2(),
        "A3.5" | "a3.5" => table_a3_5(),
        "A3.8" | "a3.8" => table_a3_8(),
        other => Err(CliError::Config(format!(
            "unknown table `{other}`; expected one of {}",
            TABLE_IDS.join(", ")
        ))),
    }
}

fn table_7(cfg: &ScenarioConfig) -> CliResult<Report> {
    let base = cfg.params;
    let mut r = Report::new(
        "Impact of a year of science today (benchmark multiples)",
        &DECOMP_HEADERS,
    );
    for (label, d) in scenarios() {
        r.push(decomp_row(
            label,
            d,
            &impact_decomposition(&base.with_d(d))?,
        ));
    }
    let be = breakeven_peril(&base, PerilVariant::Baseline)?;
    r.push(decomp_row(
        "Break-even",
        be,
        &impact_decomposition(&base.with_d(be))?,
    ));
    Ok(r)
}

fn table_8(cfg: &ScenarioConfig) -> CliResult<Report> {
    let setup = load_setup(cfg)?;
    let base = cfg.params;
    let mut r = Report::new(
        "Impact of a year of science today, realistic health (benchmark multiples)",
        &DECOMP_HEADERS,
    );
    for (label, d) in scenarios() {
        let rep = realistic_impact(&base.with_d(d), &setup)?;
        r.push(decomp_row(label, d, &rep.decomposition));
    }
    let be = breakeven_peril(&base, PerilVariant::Realistic(&setup))?;
    let rep = realistic_impact(&base.with_d(be), &setup)?;
    r.push(decomp_row("Break-even", be, &rep.decomposition));
    Ok(r)
}

/// Scenario rates plus the immediate-onset and baseline break-evens.
fn onset_rows(cfg: &ScenarioConfig) -> CliResult<Vec<(String, f64)>> {
    let base = cfg.params;
    let mut rows: Vec<(String, f64)> = scenarios()
        .iter()
        .map(|(l, d)| (l.to_string(), *d))
        .collect();
    rows.push((
        "Immediate onset break-even".into(),
        breakeven_peril(&base, PerilVariant::ImmediateOnset)?,
    ));
    rows.push((
        format!("{} yr onset break-even", base.t1),
        breakeven_peril(&base, PerilVariant::Baseline)?,
    ));
    Ok(rows)
}

fn table_9(cfg: &ScenarioConfig) -> CliResult<Report> {
    let base = cfg.params;
    let later = format!("onset in {} yrs", base.t1);
    let mut r = Report::new(
        "Return to science by onset of the time of perils (benchmark multiples)",
        &["scenario", "d", &later, "immediate onset"],
    );
    for (label, d) in onset_rows(cfg)? {
        let a = impact_decomposition(&base.with_d(d))?.total;
        let b = impact_decomposition(&base.with_d(d).with_t1(1))?.total;
        r.push(vec![
            Cell::text(label),
            Cell::Pct(d, 4),
            Cell::Num(op_multiple(a), 0),
            Cell::Num(op_multiple(b), 0),
        ]);
    }
    Ok(r)
}

fn table_10(cfg: &ScenarioConfig) -> CliResult<Report> {
    let base = cfg.params;
    let mut r = Report::new(
        "Return to science if we are too late (benchmark multiples)",
        &["scenario", "d", "just in time", "too late"],
    );
    for (label, d) in onset_rows(cfg)? {
        let a = impact_decomposition(&base.with_d(d).with_t1(1))?.total;
        let b = too_late_impact(&base.with_d(d))?.total;
        r.push(vec![
            Cell::text(label),
            Cell::Pct(d, 4),
            Cell::Num(op_multiple(a), 0),
            Cell::Num(op_multiple(b), 0),
        ]);
    }
    Ok(r)
}

fn lambda_table(cfg: &ScenarioConfig, title: &str, better: bool) -> CliResult<Report> {
    let setup = load_setup(cfg)?;
    let anchors = ReductionAnchors::default();
    let base = cfg.params;
    let mut r = Report::new(title, &["forecast", "dx", "model", "break-even lambda"]);
    for group in GROUPS {
        let q = base.with_d(presets::peril_rate(group));
        let dx = presets::extinction_rate(group);
        let gains = [
            ("Simplified health", impact_decomposition(&q)?.total),
            (
                "Realistic health",
                realistic_impact(&q, &setup)?.decomposition.total,
            ),
        ];
        for (model, gain) in gains {
            let lambda = if better {
                let dx_bar = reduced_peril(dx, &anchors)?;
                breakeven_lambda_better(gain, q.p, dx, dx_bar, cfg.w)?
            } else {
                breakeven_lambda_from_gain(gain, q.p, dx, cfg.w)?
            };
            r.push(vec![
                Cell::text(group.label()),
                Cell::Pct(dx, 5),
                Cell::text(model),
                Cell::Num(lambda, 0),
            ]);
        }
    }
    r.note(format!("W = {:e} utils", cfg.w));
    Ok(r)
}

fn table_11(cfg: &ScenarioConfig) -> CliResult<Report> {
    lambda_table(
        cfg,
        "Break-even value of the next regime, in years of current world utility",
        false,
    )
}

fn table_13(cfg: &ScenarioConfig) -> CliResult<Report> {
    lambda_table(
        cfg,
        "Break-even value of the next regime when better science also cuts extinction risk",
        true,
    )
}

fn table_12(cfg: &ScenarioConfig) -> CliResult<Report> {
    let base = cfg.params;
    let anchors = ReductionAnchors::default();
    let mut r = Report::new(
        "Relative utility gains from better science",
        &["scenario", "d", "utility multiple"],
    );
    for (label, d) in scenarios() {
        let q = base.with_d(d);
        let ratio = utility_scaling(&q, reduced_peril(d, &anchors)?)?;
        r.push(vec![
            Cell::text(label),
            Cell::Pct(d, 4),
            Cell::Num(ratio, 2),
        ]);
    }
    let be = better_science_breakeven(&base, &anchors)?;
    let q = base.with_d(be);
    let ratio =
        better_science_impact(&q, reduced_peril(be, &anchors)?)? / impact_decomposition(&q)?.total;
    r.push(vec![
        Cell::text("Break-even"),
        Cell::Pct(be, 4),
        Cell::Num(ratio, 2),
    ]);
    Ok(r)
}

fn table_a2() -> CliResult<Report> {
    let mut r = Report::new(
        "Implied annual risks of pandemic events",
        &["forecast", "group", "2023-2030", "2030-2050", "2050-2100"],
    );
    for (kind, natural) in [
        ("Engineered pathogen >1%", false),
        ("Natural pathogen >1%", true),
    ] {
        for group in GROUPS {
            let f = presets::forecasts(group);
            let map = if natural {
                &f.natural_pandemic_by
            } else {
                &f.pandemic_by
            };
            let rates = period_rates(map)?;
            let mut row = vec![Cell::text(kind), Cell::text(group.label())];
            row.extend(rates.iter().map(|&v| Cell::Pct(v, 2)));
            r.push(row);
        }
    }
    Ok(r)
}

fn table_a3_5() -> CliResult<Report> {
    let mut r = Report::new(
        "Preferred engineered pandemic rates",
        &["rate", "Superforecasters", "Domain experts"],
    );
    let cals = GROUPS
        .iter()
        .map(|&g| calibrate(&presets::forecasts(g), &presets::calibration_options(g)))
        .collect::<Result<Vec<_>, _>>()?;
    r.push(vec![
        Cell::text("Baseline (q0)"),
        Cell::Pct(cals[0].q0, 2),
        Cell::Pct(cals[1].q0, 2),
    ]);
    r.push(vec![
        Cell::text("Time of perils (q1)"),
        Cell::Pct(cals[0].q1, 2),
        Cell::Pct(cals[1].q1, 2),
    ]);
    r.push(vec![
        Cell::text("Time of perils onset"),
        Cell::text(cals[0].onset_year.to_string()),
        Cell::text(cals[1].onset_year.to_string()),
    ]);
    Ok(r)
}

fn table_a3_8() -> CliResult<Report> {
    let mut r = Report::new(
        "Expected annual excess mortality",
        &[
            "group",
            "period",
            "0-1%",
            "1-10%",
            "10-99.9%",
            "100%",
            "expected mortality",
        ],
    );
    for group in GROUPS {
        let cal = calibrate(
            &presets::forecasts(group),
            &presets::calibration_options(group),
        )?;
        for (period, buckets, d) in [
            ("Baseline", cal.baseline_buckets, cal.d_baseline),
            ("Time of perils", cal.perils_buckets, cal.d_perils),
        ] {
            r.push(vec![
                Cell::text(group.label()),
                Cell::text(period),
                Cell::Pct(buckets[0], 2),
                Cell::Pct(buckets[1], 2),
                Cell::Pct(buckets[2], 4),
                Cell::Pct(buckets[3], 4),
                Cell::Pct(d, 4),
            ]);
        }
        r.push(vec![
            Cell::text(group.label()),
            Cell::text("Change"),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Pct(cal.d_excess, 4),
        ]);
    }
    Ok(r)
}
