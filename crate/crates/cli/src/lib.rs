//! Command-line front end: published tables, scenario evaluation, break-even
//! solving, calibration, survival fitting and parameter sweeps.

// `!(x >= a)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod tables;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use perils_core::forecast_calibration::parse_probability;

use crate::commands::{Objective, SweepSpec, Target};
use crate::config::{Preset, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::report::{render, Format};

#[derive(Debug, Parser)]
#[command(
    name = "perils",
    version,
    about = "Returns to science under a time of perils"
)]
pub struct Cli {
    /// Scenario file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Forecaster group supplying `d` and `dx`.
    #[arg(long, global = true, value_enum, default_value = "none")]
    pub preset: Preset,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regenerate a published table (7, 8, 9, 10, 11, 12, 13, A2, A3.5, A3.8).
    Table { id: String },
    /// Evaluate the configured scenario.
    Evaluate,
    /// Solve for a break-even value.
    Breakeven {
        #[arg(long, value_enum, default_value = "d")]
        target: Target,
    },
    /// Turn cumulative forecasts into annual peril rates.
    Calibrate {
        /// Forecast file of `key,value` rows; defaults to the preset groups.
        #[arg(long)]
        forecasts: Option<PathBuf>,
    },
    /// Fit the logistic survival model to an actuarial CSV.
    FitSurvival {
        /// Defaults to the actuarial table in the data directory.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "logit")]
        objective: Objective,
        /// Provenance written to the model file.
        #[arg(long)]
        source: Option<String>,
    },
    /// Evaluate over an evenly spaced grid of one parameter.
    Sweep {
        param: String,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long)]
        steps: usize,
    },
}

fn number(raw: &str) -> CliResult<f64> {
    parse_probability(raw).map_err(|e| CliError::Config(e.to_string()))
}

/// Runs the parsed command and returns its output.
pub fn run(cli: &Cli) -> CliResult<String> {
    let cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path, cli.preset)?,
        None => ScenarioConfig::new(cli.preset),
    };
    let reports = match &cli.command {
        Command::Table { id } => vec![tables::run_table(id, &cfg)?],
        Command::Evaluate => vec![commands::evaluate(&cfg)?],
        Command::Breakeven { target } => vec![commands::breakeven(&cfg, *target)?],
        Command::Calibrate { forecasts } => {
            vec![commands::calibrate_report(&cfg, forecasts.as_deref())?]
        }
        Command::FitSurvival {
            input,
            objective,
            source,
        } => {
            return commands::fit_survival_output(
                input.as_deref(),
                *objective,
                source.as_deref(),
                cli.format,
            )
        }
        Command::Sweep {
            param,
            from,
            to,
            steps,
        } => {
            let spec = SweepSpec {
                param,
                from: number(from)?,
                to: number(to)?,
                steps: *steps,
            };
            vec![commands::sweep(&cfg, &spec)?]
        }
    };
    Ok(render(&reports, cli.format))
}
