//! Published forecaster inputs and the rates derived from them.

use crate::forecast_calibration::{CalibrationOptions, ForecastSet, Group, Rounding};

/// Excess peril rate implied by the superforecaster calibration.
pub const D_SUPERFORECASTERS: f64 = 0.000021;
/// Excess peril rate implied by the domain-expert calibration.
pub const D_EXPERTS: f64 = 0.000385;
/// Annual extinction rate during perils, superforecasters.
pub const DX_SUPERFORECASTERS: f64 = 0.0000016;
/// Annual extinction rate during perils, domain experts.
pub const DX_EXPERTS: f64 = 0.0002286;
/// One year of world utility, rounded.
pub const W_ROUNDED: f64 = 16e9;

pub const ONSET_SUPERFORECASTERS: u32 = 2038;
pub const ONSET_EXPERTS: u32 = 2037;
/// Domain-expert perils pandemic rate used downstream.
pub const Q1_EXPERTS: f64 = 0.0058;

/// One year of world utility at two utils per person.
pub fn w_exact(n0: f64) -> f64 {
    2.0 * n0
}

pub fn forecasts(group: Group) -> ForecastSet {
    match group {
        Group::Superforecasters => ForecastSet {
            group,
            pandemic_by: [(2030, 0.0025), (2050, 0.015), (2100, 0.04)].into(),
            natural_pandemic_by: [(2030, 0.005), (2050, 0.0169), (2100, 0.0362)].into(),
            catastrophe_by_2100: 0.0085,
            total_catastrophe_by_2100: 0.0904,
            extinction_by_2100: 0.0001,
            total_extinction_by_2100: 0.01,
            bio_extinction_by_2100: 0.0001,
            tai_prob: 0.0275,
        },
        Group::DomainExperts => ForecastSet {
            group,
            pandemic_by: [(2030, 0.0122), (2050, 0.08), (2100, 0.1025)].into(),
            natural_pandemic_by: [(2030, 0.01), (2050, 0.05), (2100, 0.0814)].into(),
            catastrophe_by_2100: 0.04,
            total_catastrophe_by_2100: 0.20,
            extinction_by_2100: 0.01,
            total_extinction_by_2100: 0.06,
            bio_extinction_by_2100: 0.01,
            tai_prob: 0.25,
        },
        Group::Custom => ForecastSet::zero(),
    }
}

/// Onset years, rounding and overrides that reproduce the published calibration.
pub fn calibration_options(group: Group) -> CalibrationOptions {
    match group {
        Group::Superforecasters => CalibrationOptions {
            rounding: Rounding::Preferred,
            ..CalibrationOptions::new(ONSET_SUPERFORECASTERS)
        },
        Group::DomainExperts => CalibrationOptions {
            rounding: Rounding::Preferred,
            q1_override: Some(Q1_EXPERTS),
            ..CalibrationOptions::new(ONSET_EXPERTS)
        },
        Group::Custom => CalibrationOptions::new(ONSET_SUPERFORECASTERS),
    }
}

pub fn peril_rate(group: Group) -> f64 {
    match group {
        Group::Superforecasters => D_SUPERFORECASTERS,
        Group::DomainExperts => D_EXPERTS,
        Group::Custom => 0.0,
    }
}

pub fn extinction_rate(group: Group) -> f64 {
    match group {
        Group::Superforecasters => DX_SUPERFORECASTERS,
        Group::DomainExperts => DX_EXPERTS,
        Group::Custom => 0.0,
    }
}
