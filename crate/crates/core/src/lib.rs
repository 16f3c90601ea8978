//! Social returns to a marginal year of science when new capabilities also
//! open a time of perils.
//!
//! Every function is a pure function of its inputs. Utility differences are
//! in raw utils; [`roi::op_multiple`] converts them to benchmark multiples.

// `!(x >= a)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod better_science;
pub mod core_model;
pub mod error;
pub mod extinction_model;
pub mod forecast_calibration;
pub mod presets;
pub mod realistic_health;
pub mod roi;
pub mod solve;

pub use better_science::{BetterGain, BetterScienceParams, ReductionAnchors};
pub use core_model::{
    breakeven_peril, brute_force_impact, brute_force_too_late, impact_decomposition, model_terms,
    too_late_impact, ImpactDecomposition, IncomeForm, ModelParams, ModelTerms, PerilVariant,
};
pub use error::{Error, Result};
pub use extinction_model::{ExtinctionParams, WelfareModel};
pub use forecast_calibration::{
    calibrate, CalibrationOptions, ForecastSet, Group, PerilCalibration, RegimeGate, Rounding,
};
pub use realistic_health::{
    fit_survival, realistic_impact, CohortGrid, FitObjective, FitReport, RealisticReport,
    RealisticSetup, SurvivalModel,
};
pub use roi::op_multiple;

#[cfg(test)]
mod properties;
