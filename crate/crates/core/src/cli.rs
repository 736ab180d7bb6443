//! Command-line surface for the `blended` binary.
//!
//! Subcommands:
//!
//! * `point` blends a single p-value with a prior bound.
//! * `table` writes the blended probability over a grid as CSV.
//! * `ttest` runs the same blend on a two-sided t-test.
//! * `game` checks projection against the brute-force maximin game for a
//!   JSON problem file.
//!
//! Records print as `key=value` lines or as one JSON object. Key names and
//! order are fixed per subcommand. Reals carry 10 significant digits.
//!
//! Exit status: 0 on success, 1 on I/O failure, 2 on invalid input, 3 when
//! the constraint set is infeasible.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::confidence::{two_sided_p, LocationModel};
use crate::distributions::FiniteDistribution;
use crate::projection::{i_projection, maximin_bruteforce, ConstraintSet};
use crate::testing::{blend_table, blended_null_probability, TableRow, TestInput};
use crate::Error;

pub const TABLE_HEADER: [&str; 6] = [
    "p",
    "pi0_lower",
    "sellke",
    "lfdr_lower",
    "blended",
    "maxent",
];
const SIGNIFICANT_DIGITS: usize = 10;
/// Brute-force and projection values may differ by this many grid steps.
pub const GAME_TOLERANCE_STEPS: f64 = 5.0;

#[derive(Debug, Parser)]
#[command(
    name = "blended",
    version,
    about = "Blend Bayesian and frequentist evidence about a point null hypothesis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Blended null probability for one p-value.
    Point {
        #[arg(long)]
        p: f64,
        #[arg(long = "pi0-lower")]
        pi0_lower: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// CSV table of blended probabilities over a p-value grid.
    Table {
        #[arg(long = "p-min", default_value_t = 0.005)]
        p_min: f64,
        #[arg(long = "p-max", default_value_t = 1.0)]
        p_max: f64,
        #[arg(long = "p-steps", default_value_t = 200)]
        p_steps: usize,
        /// Comma-separated prior bounds; defaults to 0, 0.05, ..., 1.
        #[arg(long = "pi0", value_delimiter = ',')]
        pi0_list: Vec<f64>,
        /// Output path, or `-` for standard output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-sided t-test followed by the blend.
    Ttest {
        #[arg(long, allow_hyphen_values = true)]
        estimate: f64,
        #[arg(long = "std-error")]
        std_error: f64,
        #[arg(long)]
        df: f64,
        #[arg(long = "pi0-lower")]
        pi0_lower: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare the projection with the brute-force maximin game.
    Game {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long = "grid-step", default_value_t = 1e-4)]
        grid_step: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{flag} = {value} is invalid: expected {expected}")]
    Flag {
        flag: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Core(Error::Infeasible { .. }) => 3,
            CliError::Core(Error::NoConvergence(_)) => 1,
            CliError::Flag { .. } | CliError::Core(_) | CliError::Parse { .. } => 2,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Real(f64),
    Text(String),
    Flag(bool),
}

/// Ordered key-value output of one subcommand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputRecord {
    fields: Vec<(String, Field)>,
}

impl OutputRecord {
    pub fn real(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.fields.push((key.into(), Field::Real(value)));
        self
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.fields.push((key.into(), Field::Text(value.into())));
        self
    }

    pub fn flag(&mut self, key: impl Into<String>, value: bool) -> &mut Self {
        self.fields.push((key.into(), Field::Flag(value)));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn keys(&self) -> Vec<&str> {
        self.fields.iter().map(|(k, _)| k.as_str()).collect()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut out = String::new();
                for (k, v) in &self.fields {
                    let v = match v {
                        Field::Real(x) => format_real(*x),
                        Field::Text(s) => s.clone(),
                        Field::Flag(b) => b.to_string(),
                    };
                    out.push_str(&format!("{k}={v}\n"));
                }
                out
            }
            Format::Json => {
                let mut map = Map::new();
                for (k, v) in &self.fields {
                    let v = match v {
                        Field::Real(x) => serde_json::Number::from_f64(round_significant(*x))
                            .map(Value::Number)
                            .unwrap_or_else(|| Value::String(format_real(*x))),
                        Field::Text(s) => Value::String(s.clone()),
                        Field::Flag(b) => Value::Bool(*b),
                    };
                    map.insert(k.clone(), v);
                }
                let mut s = Value::Object(map).to_string();
                s.push('\n');
                s
            }
        }
    }
}

fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest decimal that round-trips the value rounded to 10 significant
/// digits.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_significant(x);
    if r != 0.0 && (r.abs() < 1e-6 || r.abs() >= 1e15) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn check_flag(
    flag: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Flag {
            flag,
            value,
            expected,
        })
    }
}

fn check_pi0(pi0_lower: f64) -> Result<(), CliError> {
    check_flag(
        "--pi0-lower",
        pi0_lower,
        (0.0..=1.0).contains(&pi0_lower),
        "a value in [0, 1]",
    )
}

fn blend_fields(record: &mut OutputRecord, input: &TestInput) -> Result<(), CliError> {
    let b = blended_null_probability(input)?;
    record
        .real("p", input.p_value())
        .real("pi0_lower", input.pi0_lower())
        .real("sellke", b.bayes_factor_lower)
        .real("lfdr_lower", b.lfdr_lower)
        .real("blended", b.blended_null_prob)
        .real("maxent", (1.0 + b.lfdr_lower) / 2.0)
        .text("regime", b.regime.as_str());
    Ok(())
}

pub fn cmd_point(p: f64, pi0_lower: f64) -> Result<OutputRecord, CliError> {
    check_flag("--p", p, p > 0.0 && p <= 1.0, "a value in (0, 1]")?;
    check_pi0(pi0_lower)?;
    let mut record = OutputRecord::default();
    blend_fields(&mut record, &TestInput::new(p, pi0_lower)?)?;
    Ok(record)
}

/// `pi0` grid of Figures-style tables: 0, 0.05, ..., 1.
pub fn default_pi0_list() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

/// `steps + 1` evenly spaced p-values from `p_min` to exactly `p_max`.
pub fn p_grid(p_min: f64, p_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| {
            if k == steps {
                p_max
            } else {
                p_min + (p_max - p_min) * k as f64 / steps as f64
            }
        })
        .collect()
}

pub fn table_rows(
    p_min: f64,
    p_max: f64,
    p_steps: usize,
    pi0_list: &[f64],
) -> Result<Vec<TableRow>, CliError> {
    check_flag(
        "--p-min",
        p_min,
        p_min > 0.0 && p_min <= 1.0,
        "a value in (0, 1]",
    )?;
    check_flag(
        "--p-max",
        p_max,
        p_max >= p_min && p_max <= 1.0,
        "a value in [p-min, 1]",
    )?;
    check_flag("--p-steps", p_steps as f64, p_steps >= 1, "at least 1")?;
    for &pi0 in pi0_list {
        check_flag("--pi0", pi0, (0.0..=1.0).contains(&pi0), "values in [0, 1]")?;
    }
    let pi0_list = if pi0_list.is_empty() {
        default_pi0_list()
    } else {
        pi0_list.to_vec()
    };
    Ok(blend_table(&p_grid(p_min, p_max, p_steps), &pi0_list)?)
}

pub fn write_table<W: Write>(rows: &[TableRow], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(TABLE_HEADER)?;
    for r in rows {
        writer.write_record(
            [
                r.p,
                r.pi0_lower,
                r.sellke,
                r.lfdr_lower,
                r.blended,
                r.maxent,
            ]
            .map(format_real),
        )?;
    }
    writer.flush()?;
    Ok(())
}

pub fn cmd_table(
    p_min: f64,
    p_max: f64,
    p_steps: usize,
    pi0_list: &[f64],
    out: &Path,
) -> Result<usize, CliError> {
    let rows = table_rows(p_min, p_max, p_steps, pi0_list)?;
    let to_io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: out.to_path_buf(),
            source,
        },
        other => CliError::Io {
            path: out.to_path_buf(),
            source: io::Error::other(format!("{other:?}")),
        },
    };
    if out == Path::new("-") {
        write_table(&rows, io::stdout().lock()).map_err(to_io)?;
    } else {
        let file = File::create(out).map_err(io_error(out))?;
        write_table(&rows, file).map_err(to_io)?;
    }
    Ok(rows.len())
}

pub fn cmd_ttest(
    estimate: f64,
    std_error: f64,
    df: f64,
    pi0_lower: f64,
) -> Result<OutputRecord, CliError> {
    check_flag(
        "--estimate",
        estimate,
        estimate.is_finite(),
        "a finite number",
    )?;
    check_flag(
        "--std-error",
        std_error,
        std_error > 0.0 && std_error.is_finite(),
        "a positive number",
    )?;
    check_flag("--df", df, df > 0.0 && df.is_finite(), "a positive number")?;
    check_pi0(pi0_lower)?;
    let model = LocationModel::new(estimate, std_error, df)?;
    let p = two_sided_p(&model)?;
    if p <= 0.0 {
        return Err(CliError::Flag {
            flag: "--estimate",
            value: estimate,
            expected: "a t-ratio whose two-sided p-value is representable (p underflowed to 0)",
        });
    }
    let mut record = OutputRecord::default();
    record
        .real("estimate", estimate)
        .real("std_error", std_error)
        .real("df", df)
        .real("t_ratio", model.t_ratio());
    blend_fields(&mut record, &TestInput::new(p, pi0_lower)?)?;
    Ok(record)
}

/// JSON problem file for the `game` subcommand.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GameProblem {
    pub atoms: Vec<String>,
    pub benchmark: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl GameProblem {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        Self::parse(&text, path)
    }
}

pub fn cmd_game(problem: &GameProblem, grid_step: f64) -> Result<OutputRecord, CliError> {
    check_flag(
        "--grid-step",
        grid_step,
        (1e-5..=1e-1).contains(&grid_step),
        "a value in [1e-5, 1e-1]",
    )?;
    let benchmark = FiniteDistribution::new(problem.atoms.clone(), problem.benchmark.clone())?;
    let set = ConstraintSet::new(
        problem.atoms.clone(),
        problem.lower.clone(),
        problem.upper.clone(),
    )?;
    let projection = i_projection(&set, &benchmark)?;
    let game = maximin_bruteforce(&set, &benchmark, grid_step)?;
    let divergence = projection.divergence_to_benchmark.to_f64();
    let discrepancy = (game.value - divergence).abs();
    let tolerance = GAME_TOLERANCE_STEPS * grid_step;

    let mut record = OutputRecord::default();
    for (atom, p) in problem.atoms.iter().zip(projection.projection.probs()) {
        record.real(format!("projection.{atom}"), *p);
    }
    record
        .real("projection_divergence", divergence)
        .real("game_value", game.value);
    for (atom, q) in problem.atoms.iter().zip(game.statistician.probs()) {
        record.real(format!("statistician.{atom}"), *q);
    }
    for (atom, p) in problem.atoms.iter().zip(game.worst_case_nature.probs()) {
        record.real(format!("worst_case.{atom}"), *p);
    }
    record
        .real("grid_step", grid_step)
        .real("discrepancy", discrepancy)
        .real("tolerance", tolerance)
        .flag("pass", discrepancy <= tolerance);
    Ok(record)
}

/// Runs one parsed invocation and returns what belongs on standard output.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Point {
            p,
            pi0_lower,
            format,
        } => Ok(cmd_point(p, pi0_lower)?.render(format)),
        Command::Table {
            p_min,
            p_max,
            p_steps,
            pi0_list,
            out,
        } => {
            let rows = cmd_table(p_min, p_max, p_steps, &pi0_list, &out)?;
            if out == Path::new("-") {
                Ok(String::new())
            } else {
                let mut record = OutputRecord::default();
                record
                    .text("path", out.display().to_string())
                    .real("rows", rows as f64);
                Ok(record.render(Format::Text))
            }
        }
        Command::Ttest {
            estimate,
            std_error,
            df,
            pi0_lower,
            format,
        } => Ok(cmd_ttest(estimate, std_error, df, pi0_lower)?.render(format)),
        Command::Game {
            problem,
            grid_step,
            format,
        } => {
            let parsed = GameProblem::load(&problem)?;
            Ok(cmd_game(&parsed, grid_step)?.render(format))
        }
    }
}
