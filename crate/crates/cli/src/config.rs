//! Scenario configuration: `key = value` lines with `#` comments.
//!
//! Defaults come first, then the preset, then the file. Percent-valued keys
//! accept a `%` suffix.

use std::path::{Path, PathBuf};

use perils_core::forecast_calibration::parse_probability;
use perils_core::realistic_health::DEFAULT_SETBACK;
use perils_core::{presets, Group, IncomeForm, ModelParams};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Superforecasters,
    Experts,
    None,
}

impl Preset {
    pub fn group(self) -> Option<Group> {
        match self {
            Preset::Superforecasters => Some(Group::Superforecasters),
            Preset::Experts => Some(Group::DomainExperts),
            Preset::None => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Baseline,
    /// Baseline with `t1 = 1`.
    ImmediateOnset,
    TooLate,
    Realistic,
    BetterScience,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::ImmediateOnset => "immediate_onset",
            Variant::TooLate => "too_late",
            Variant::Realistic => "realistic",
            Variant::BetterScience => "better_science",
        }
    }

    fn parse(raw: &str) -> Option<Self> {
        [
            Variant::Baseline,
            Variant::ImmediateOnset,
            Variant::TooLate,
            Variant::Realistic,
            Variant::BetterScience,
        ]
        .into_iter()
        .find(|v| v.name() == raw)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: ModelParams,
    pub dx: Option<f64>,
    pub w: f64,
    pub lambda: Option<f64>,
    pub h: f64,
    pub onset_year: Option<u32>,
    pub variant: Variant,
    pub forecast_file: Option<PathBuf>,
    pub group: Option<Group>,
}

/// Keys accepted by [`ScenarioConfig::set`] that hold numbers.
pub const NUMERIC_KEYS: &[&str] = &[
    "p",
    "G",
    "g",
    "T",
    "t1",
    "n0",
    "s",
    "s_bar",
    "d",
    "dx",
    "W",
    "lambda",
    "h",
    "onset_year",
];

impl ScenarioConfig {
    pub fn new(preset: Preset) -> Self {
        let group = preset.group();
        ScenarioConfig {
            params: ModelParams {
                d: group.map_or(0.0, presets::peril_rate),
                ..ModelParams::default()
            },
            dx: group.map(presets::extinction_rate),
            w: presets::W_ROUNDED,
            lambda: None,
            h: DEFAULT_SETBACK,
            onset_year: None,
            variant: Variant::Baseline,
            forecast_file: None,
            group,
        }
    }

    pub fn load(path: &Path, preset: Preset) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::new(preset);
        cfg.apply(&text, path.parent())?;
        Ok(cfg)
    }

    /// Applies config text; relative paths resolve against `base`.
    pub fn apply(&mut self, text: &str, base: Option<&Path>) -> CliResult<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", idx + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "variant" => {
                    self.variant = Variant::parse(value).ok_or_else(|| {
                        CliError::Config(format!("line {}: unknown variant `{value}`", idx + 1))
                    })?
                }
                "income" => {
                    self.params.income = match value {
                        "log" => IncomeForm::LogGrowth,
                        "linear" => IncomeForm::Linear,
                        _ => {
                            return Err(CliError::Config(format!(
                                "line {}: income must be `log` or `linear`",
                                idx + 1
                            )))
                        }
                    }
                }
                "forecast_file" => {
                    let p = PathBuf::from(value);
                    self.forecast_file = Some(match base {
                        Some(b) if p.is_relative() => b.join(p),
                        _ => p,
                    });
                }
                _ => self
                    .set(key, value)
                    .map_err(|e| CliError::Config(format!("line {}: {e}", idx + 1)))?,
            }
        }
        self.validate()
    }

    /// Sets one numeric key from its text form.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), String> {
        let int = || -> Result<u32, String> {
            raw.parse::<u32>()
                .map_err(|_| format!("`{key}` needs a nonnegative integer, got `{raw}`"))
        };
        let num = || -> Result<f64, String> {
            parse_probability(raw).map_err(|e| format!("`{key}`: {e}"))
        };
        self.set_value(key, &int, &num)
    }

    /// Sets one numeric key from a number; integer keys need integral values.
    pub fn set_number(&mut self, key: &str, v: f64) -> Result<(), String> {
        let int = || -> Result<u32, String> {
            if v.fract() == 0.0 && v >= 0.0 && v <= f64::from(u32::MAX) {
                Ok(v as u32)
            } else {
                Err(format!("`{key}` needs a nonnegative integer, got {v}"))
            }
        };
        let num = || -> Result<f64, String> { Ok(v) };
        self.set_value(key, &int, &num)
    }

    fn set_value(
        &mut self,
        key: &str,
        int: &dyn Fn() -> Result<u32, String>,
        num: &dyn Fn() -> Result<f64, String>,
    ) -> Result<(), String> {
        let p = &mut self.params;
        match key {
            "p" => p.p = num()?,
            "G" => p.growth = num()?,
            "g" => p.paused_growth = num()?,
            "T" => p.lag = int()?,
            "t1" => p.t1 = int()?,
            "n0" => p.n0 = num()?,
            "s" => p.s = num()?,
            "s_bar" => p.s_bar = num()?,
            "d" => p.d = num()?,
            "dx" => self.dx = Some(num()?),
            "W" => self.w = num()?,
            "lambda" => self.lambda = Some(num()?),
            "h" => self.h = num()?,
            "onset_year" => self.onset_year = Some(int()?),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        self.model_params()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.w > 0.0) {
            return Err(CliError::Config("W must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.h) {
            return Err(CliError::Config("h must lie in [0, 1]".into()));
        }
        if let Some(dx) = self.dx {
            if !(0.0..1.0).contains(&dx) {
                return Err(CliError::Config("dx must lie in [0, 1)".into()));
            }
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0) {
                return Err(CliError::Config("lambda must be nonnegative".into()));
            }
        }
        Ok(())
    }

    /// Parameters after applying the variant's parameterization.
    pub fn model_params(&self) -> ModelParams {
        match self.variant {
            Variant::ImmediateOnset => self.params.with_t1(1),
            _ => self.params,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_suffix() {
        let mut c = ScenarioConfig::new(Preset::None);
        c.apply("d = 0.0385%\nT = 70 # lag\n", None).unwrap();
        assert!((c.params.d - 0.000385).abs() < 1e-18);
        assert_eq!(c.params.lag, 70);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut c = ScenarioConfig::new(Preset::None);
        assert!(matches!(c.apply("q = 1", None), Err(CliError::Config(_))));
    }

    #[test]
    fn invalid_values_rejected() {
        let mut c = ScenarioConfig::new(Preset::None);
        assert!(c.apply("p = 1.5", None).is_err());
        let mut c = ScenarioConfig::new(Preset::None);
        assert!(c.apply("t1 = 2.5", None).is_err());
    }

    #[test]
    fn preset_rates() {
        let c = ScenarioConfig::new(Preset::Experts);
        assert_eq!(c.params.d, presets::D_EXPERTS);
        assert_eq!(c.dx, Some(presets::DX_EXPERTS));
    }
}
