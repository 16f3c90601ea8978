use proptest::prelude::*;

use crate::better_science::*;
use crate::core_model::*;
use crate::extinction_model::*;
use crate::forecast_calibration::*;
use crate::realistic_health::*;
use crate::roi::*;
use crate::{presets, Group};

fn params() -> impl Strategy<Value = ModelParams> {
    (
        0.5f64..0.99,
        0.001f64..0.03,
        0.0f64..=1.0,
        1u32..=100,
        0.0f64..=1.0,
        1e6f64..1e10,
        0.0f64..0.01,
        0.0f64..=1.0,
        prop_oneof![Just(0.0), 1e-6f64..0.05],
        prop_oneof![Just(IncomeForm::LogGrowth), Just(IncomeForm::Linear)],
    )
        .prop_map(
            |(p, growth, gf, lag, t1f, n0, s, sf, d, income)| ModelParams {
                p,
                growth,
                paused_growth: growth * gf,
                lag,
                t1: (t1f * f64::from(lag)).round() as u32,
                n0,
                s,
                s_bar: s * sf,
                d,
                income,
            },
        )
}

/// Relative agreement, with an absolute floor far below the decomposition's scale.
fn agree(closed: f64, direct: f64, scale: f64) -> bool {
    (closed - direct).abs() <= 1e-6 * closed.abs().max(direct.abs()) + 1e-12 * scale
}

fn scale(d: &ImpactDecomposition) -> f64 {
    d.components().iter().map(|c| c.abs()).sum::<f64>()
}

/// Channels after the lag can be tiny next to period zero, so the tail is
/// measured against the discount weight at the lag.
fn horizon(p: &ModelParams) -> usize {
    required_horizon(p, 1e-14 * p.p.powi(p.lag as i32 + 1)).unwrap()
}

fn shipped_model() -> SurvivalModel {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/survival_fit.txt"
    ))
    .unwrap();
    parse_model_file(&text).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_matches_direct_sum(p in params()) {
        let closed = impact_decomposition(&p).unwrap();
        let direct = brute_force_impact(&p, horizon(&p)).unwrap();
        let sc = scale(&closed);
        for (c, d) in closed.components().iter().zip(direct.components()) {
            prop_assert!(agree(*c, d, sc), "{closed:?} vs {direct:?}");
        }
        prop_assert!(agree(closed.total, direct.total, sc));
    }

    #[test]
    fn too_late_matches_direct_sum(p in params()) {
        let closed = too_late_impact(&p).unwrap();
        let direct = brute_force_too_late(&p, horizon(&p)).unwrap();
        let sc = scale(&closed);
        prop_assert_eq!(closed.pure_peril, 0.0);
        for (c, d) in closed.components().iter().zip(direct.components()) {
            prop_assert!(agree(*c, d, sc), "{closed:?} vs {direct:?}");
        }
    }

    #[test]
    fn better_science_matches_direct_sum(p in params(), frac in 0.0f64..=1.0) {
        let d_bar = p.d * frac;
        let closed = better_science_impact(&p, d_bar).unwrap();
        let direct = brute_force_better_science(&p, d_bar, horizon(&p)).unwrap();
        prop_assert!(agree(closed, direct.total, scale(&direct)), "{closed} vs {direct:?}");
    }
}

proptest! {
    #[test]
    fn total_is_exact_sum(p in params()) {
        for dec in [impact_decomposition(&p).unwrap(), too_late_impact(&p).unwrap()] {
            let [a, b, c, d] = dec.components();
            prop_assert_eq!(dec.total, a + b + c + d);
        }
    }

    #[test]
    fn sign_structure(p in params()) {
        let dec = impact_decomposition(&p).unwrap();
        prop_assert!(dec.pure_peril <= 0.0);
        prop_assert_eq!(dec.pure_peril == 0.0, p.d == 0.0 || p.t1 == p.lag);
        prop_assert!(dec.pure_income >= 0.0);
    }

    #[test]
    fn op_multiple_is_linear(a in -1e12f64..1e12, b in -1e12f64..1e12, k in -10.0f64..10.0) {
        let lhs = op_multiple(k * a + b);
        let rhs = k * op_multiple(a) + op_multiple(b);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (lhs.abs() + rhs.abs() + 1.0));
    }

    #[test]
    fn annualize_round_trip(p in 0.0f64..0.999, years in 1u32..200) {
        let q = annualize_cumulative(p, years).unwrap();
        let back = 1.0 - (1.0 - q).powi(years as i32);
        prop_assert!((back - p).abs() <= 1e-12);
    }

    #[test]
    fn piecewise_consistency(q0 in 0.0f64..0.005, extra in 0.0f64..0.2, onset in 2024u32..2050) {
        let before = 1.0 - (1.0 - q0).powi((onset - 2023) as i32);
        let p2050 = (before + extra).min(0.999);
        let q1 = solve_perils_rate(q0, p2050, onset).unwrap();
        let none = (1.0 - q0).powi((onset - 2023) as i32) * (1.0 - q1).powi((2050 - onset) as i32);
        prop_assert!((1.0 - none - p2050).abs() <= 1e-10);
    }

    #[test]
    fn conditioning_inflates(p in 0.0f64..0.05, annual in 0.99f64..=1.0, h in 1u32..100) {
        prop_assert!(condition_on_regime(p, annual, h).unwrap() >= p);
    }

    #[test]
    fn buckets_sum_to_one(onset in 2030u32..2050, sf in any::<bool>()) {
        let group = if sf { Group::Superforecasters } else { Group::DomainExperts };
        let opts = CalibrationOptions::new(onset);
        let cal = calibrate(&presets::forecasts(group), &opts).unwrap();
        for b in [cal.baseline_buckets, cal.perils_buckets] {
            prop_assert!((b.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(b.iter().all(|&x| x >= 0.0));
        }
        prop_assert_eq!(cal.d_excess, cal.d_perils - cal.d_baseline);
    }

    #[test]
    fn survival_bounds_and_monotonicity(
        a in -12.0f64..0.0,
        b in -0.2f64..-0.01,
        c in 0.5f64..4.0,
        by in 1850.0f64..2500.0,
        age in 0u32..120,
    ) {
        let m = SurvivalModel::new(a, b, c);
        let s = survival_share(&m, by, f64::from(age)).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!(survival_share(&m, by, f64::from(age + 1)).unwrap() <= s);
        prop_assert!(survival_share(&m, by + 100.0, f64::from(age)).unwrap() >= s);
    }

    #[test]
    fn breakeven_lambda_zeroes_adjusted_impact(d in 1e-5f64..1e-3, frac in 0.01f64..0.99) {
        let p = ModelParams::default().with_d(d);
        let dx = d * frac;
        let w = 16e9;
        let lambda = breakeven_lambda(&p, dx, w, WelfareModel::Simplified).unwrap();
        let ext = ExtinctionParams { dx, w, lambda };
        let adj = extinction_adjusted_impact(&p, &ext).unwrap();
        let base = impact_decomposition(&p).unwrap().total;
        prop_assert!(adj.abs() <= 1e-6 * base.abs());
    }

    #[test]
    fn rho_inverts_and_increases(lambda in 1.5f64..1e6, growth in 0.0f64..0.05) {
        let rho = rho_for_lambda(lambda, growth).unwrap();
        prop_assert!(rho > 0.0 && rho < 1.0);
        let back = future_multiple(rho, growth);
        prop_assert!((back - lambda).abs() <= 1e-8 * lambda);
        let higher = rho_for_lambda(lambda * 1.01, growth).unwrap();
        prop_assert!(higher > rho);
    }

    #[test]
    fn penalty_increases(dx in 1e-7f64..1e-2, lw in 1.0f64..1e15) {
        let p = 0.98;
        let base = extinction_penalty(p, dx, lw);
        prop_assert!(extinction_penalty(p, dx * 1.1, lw) > base);
        prop_assert!(extinction_penalty(p, dx, lw * 1.1) > base);
    }

    #[test]
    fn capability_increasing_in_growth(
        s in 0.01f64..1.0,
        o in 0.01f64..1.0,
        g in 0.0f64..0.1,
        lag in 1.0f64..50.0,
        x in 0.0f64..0.99,
    ) {
        let lo = capability_ratio(s, o, g, lag, x).unwrap();
        let hi = capability_ratio(s, o, g + 0.01, lag, x).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn utility_scaling_at_least_one(d in 1e-6f64..1e-3, frac in 0.0f64..1.0) {
        let p = ModelParams::default().with_d(d);
        prop_assume!(impact_decomposition(&p).unwrap().total > 0.0);
        prop_assert!(utility_scaling(&p, d * frac).unwrap() >= 1.0);
    }

    #[test]
    fn more_generations_raise_breakeven(n in 2u32..1000) {
        let a = back_of_envelope(0.0025, 72.8, 0.338, 0.56, n).unwrap();
        let b = back_of_envelope(0.0025, 72.8, 0.338, 0.56, n + 1).unwrap();
        prop_assert!(b.d_star > a.d_star);
        prop_assert!(b.d_star < a.x + a.y);
    }

    #[test]
    fn fit_recovers_exact_logistic(a in -10.0f64..-4.0, b in -0.15f64..-0.05, c in 1.5f64..3.5) {
        let truth = SurvivalModel::new(a, b, c);
        let table: Vec<SurvivalRecord> = [1900.0, 1950.0, 2000.0]
            .iter()
            .flat_map(|&by| (0..60).step_by(5).map(move |age| (by, age)))
            .map(|(by, age)| SurvivalRecord {
                birth_year: by,
                age: f64::from(age),
                share: survival_share(&truth, by, f64::from(age)).unwrap(),
            })
            // Shares inside the clamp band are not exact logistic values.
            .filter(|r| r.share > 1e-5 && r.share < 1.0 - 1e-5)
            .collect();
        prop_assume!(table.len() >= 12);
        let fit = fit_survival(&table, FitObjective::LogitLeastSquares).unwrap();
        prop_assert!(fit.rmse < 1e-6, "rmse {}", fit.rmse);
    }
}

#[test]
fn two_cohort_exact_interpolation() {
    let truth = SurvivalModel::new(-7.0, -0.1, 2.5);
    let table: Vec<SurvivalRecord> = [1900.0, 2000.0]
        .iter()
        .flat_map(|&by| (0..10).map(move |age| (by, age)))
        .map(|(by, age)| SurvivalRecord {
            birth_year: by,
            age: f64::from(age),
            share: survival_share(&truth, by, f64::from(age)).unwrap(),
        })
        .collect();
    for objective in [FitObjective::LogitLeastSquares, FitObjective::Binomial] {
        let m = fit_survival(&table, objective).unwrap().model;
        assert!((m.a - truth.a).abs() < 1e-6, "{objective:?} {m:?}");
        assert!((m.b - truth.b).abs() < 1e-8);
        assert!((m.c - truth.c).abs() < 1e-7);
    }
}

#[test]
fn total_decreasing_in_d() {
    let base = ModelParams::default();
    let totals: Vec<f64> = (0..100)
        .map(|i| {
            impact_decomposition(&base.with_d(0.01 * f64::from(i) / 99.0))
                .unwrap()
                .total
        })
        .collect();
    assert!(totals.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn breakeven_is_a_root_and_onset_ordered() {
    let base = ModelParams::default();
    let scale = impact_decomposition(&base).unwrap().total;
    let late = breakeven_peril(&base, PerilVariant::Baseline).unwrap();
    let early = breakeven_peril(&base, PerilVariant::ImmediateOnset).unwrap();
    for (d, p) in [(late, base), (early, base.with_t1(1))] {
        assert!(impact_decomposition(&p.with_d(d)).unwrap().total.abs() < 1e-8 * scale);
    }
    assert!(early < late);
}

#[test]
fn too_late_always_positive() {
    let base = ModelParams::default();
    for i in 0..=99 {
        let d = 0.99 * f64::from(i) / 99.0;
        assert!(
            too_late_impact(&base.with_d(d)).unwrap().total > 0.0,
            "d = {d}"
        );
    }
}

#[test]
fn q1_rises_with_onset() {
    for group in [Group::Superforecasters, Group::DomainExperts] {
        let f = presets::forecasts(group);
        let p = regime_survival_annual(&f, 77).unwrap();
        let p2030 = condition_on_regime(f.pandemic_by[&2030], p, 7).unwrap();
        let p2050 = condition_on_regime(f.pandemic_by[&2050], p, 27).unwrap();
        let q0 = annualize_cumulative(p2030, 7).unwrap();
        let q1: Vec<f64> = (2030..2050)
            .map(|y| solve_perils_rate(q0, p2050, y).unwrap())
            .collect();
        assert!(q1.windows(2).all(|w| w[1] >= w[0]), "{group:?}");
    }
}

#[test]
fn better_science_breakeven_above_baseline() {
    let base = ModelParams::default();
    let bs = better_science_breakeven(&base, &ReductionAnchors::default()).unwrap();
    assert!(bs > breakeven_peril(&base, PerilVariant::Baseline).unwrap());
}

#[test]
fn life_expectancy_gains_shrink() {
    let m = shipped_model();
    let le: Vec<f64> = (1950..=2100)
        .map(|y| life_expectancy(&m, f64::from(y)).unwrap())
        .collect();
    let steps: Vec<f64> = le.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.iter().all(|&s| s > 0.0));
    assert!(steps.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn paused_survival_continuous_at_lag() {
    let m = shipped_model();
    let (h, lag) = (DEFAULT_SETBACK, 74);
    for age in 1..=m.age_cap {
        let by = BASE_YEAR + f64::from(lag) - f64::from(age) - m.birth_offset;
        let at_lag = paused_survival(&m, h, lag, lag, age).unwrap();
        assert_eq!(at_lag, survival_share(&m, by, f64::from(age)).unwrap());
        // One period on, the cohort continues from its period-T share.
        if age < m.age_cap {
            let next = paused_survival(&m, h, lag, lag + 1, age + 1).unwrap();
            assert!(next <= at_lag && next > 0.0, "age {age}");
        }
    }
}

#[test]
fn realistic_decomposition_closes() {
    let setup = RealisticSetup::new(shipped_model());
    let rep = realistic_impact(&ModelParams::default().with_d(0.000385), &setup).unwrap();
    let total = rep.decomposition.total;
    assert!((total - rep.direct_total).abs() <= 1e-9 * total.abs());
}

#[test]
fn realistic_identical_scenarios_cancel() {
    let setup = RealisticSetup {
        h: 0.0,
        ..RealisticSetup::new(shipped_model())
    };
    let p = ModelParams {
        paused_growth: 0.01,
        ..ModelParams::default()
    };
    let rep = realistic_impact(&p, &setup).unwrap();
    assert!(
        rep.decomposition.total.abs() < 1e-3,
        "{:?}",
        rep.decomposition
    );
    assert!(matches!(
        breakeven_peril(&p, PerilVariant::Realistic(&setup)),
        Err(e) if e.is_solver_failure()
    ));
}

#[test]
fn realistic_breakeven_by_setback() {
    let base = ModelParams::default();
    let model = shipped_model();
    let be: Vec<f64> = [0.3, DEFAULT_SETBACK, 0.8]
        .iter()
        .map(|&h| {
            let setup = RealisticSetup {
                h,
                ..RealisticSetup::new(model)
            };
            breakeven_peril(&base, PerilVariant::Realistic(&setup)).unwrap()
        })
        .collect();
    // A larger setback makes the pause costlier, so perils must be worse to break even.
    assert!(be.windows(2).all(|w| w[1] > w[0]), "{be:?}");
}
