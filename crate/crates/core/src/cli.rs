//! Command-line front end: flag and config-file parsing, output, exit codes.
//!
//! Flags override values from a `key=value` config file. Keys match the long
//! flag names without the leading dashes (`kappa-v`, `p0-over-m`, ...);
//! underscores are accepted in place of dashes and `grid` may repeat.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use crate::scenarios::{
    parse_grid, run_command, validation_passed, write_atomic, Command, CsvTable, RunConfig,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{failed} validation check(s) failed")]
    Validation { failed: usize },
    #[error(transparent)]
    Library(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Library(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Validation { .. } => 3,
        }
    }
}

#[derive(Debug, Default, Parser)]
#[command(
    name = "lorentz-twirl",
    version,
    about = "Qubit channels from partially known Lorentz transformations"
)]
pub struct Args {
    /// qfi-surface, t2-curve, channel or validate
    #[arg(long)]
    pub command: Option<String>,
    /// Rotation concentration κ
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Boost-direction concentration κ_v
    #[arg(long = "kappa-v")]
    pub kappa_v: Option<f64>,
    /// Momentum-direction concentration κ_p
    #[arg(long = "kappa-p")]
    pub kappa_p: Option<f64>,
    /// Boost-speed bump width Δ
    #[arg(long)]
    pub delta: Option<f64>,
    /// Momentum scale p₀/m
    #[arg(long = "p0-over-m")]
    pub p0_over_m: Option<f64>,
    /// Encoding polar angle θ_E
    #[arg(long = "theta-e")]
    pub theta_e: Option<f64>,
    /// Encoded parameter λ
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Finite-difference step for the QFI
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Monte Carlo sample count
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// axis=start:stop:count; repeatable
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Vec<String>,
    /// key=value config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV destination; stdout when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Shift one boost coefficient so validation fails
    #[arg(long = "perturb-coefficients", hide = true)]
    pub perturb_coefficients: bool,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse `{value}`")))
}

/// Folds the lines of a config file into `args`, leaving values already set
/// by flags untouched.
pub fn apply_config_text(args: &mut Args, text: &str) -> Result<(), CliError> {
    let mut file_grids = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "command" => {
                args.command.get_or_insert_with(|| value.to_string());
            }
            "kappa" => set_once(&mut args.kappa, &key, value)?,
            "kappa-v" => set_once(&mut args.kappa_v, &key, value)?,
            "kappa-p" => set_once(&mut args.kappa_p, &key, value)?,
            "delta" => set_once(&mut args.delta, &key, value)?,
            "p0-over-m" => set_once(&mut args.p0_over_m, &key, value)?,
            "theta-e" => set_once(&mut args.theta_e, &key, value)?,
            "lambda" => set_once(&mut args.lambda, &key, value)?,
            "epsilon" => set_once(&mut args.epsilon, &key, value)?,
            "samples" => set_once(&mut args.samples, &key, value)?,
            "seed" => set_once(&mut args.seed, &key, value)?,
            "output" => {
                args.output.get_or_insert_with(|| PathBuf::from(value));
            }
            "grid" => file_grids.push(value.to_string()),
            _ => {
                return Err(CliError::Config(format!(
                    "line {}: unknown key `{key}`",
                    n + 1
                )))
            }
        }
    }
    // a flag grid on the same axis replaces the file's
    let flag_axes: Vec<String> = args
        .grid
        .iter()
        .filter_map(|g| g.split_once('=').map(|(a, _)| a.trim().replace('_', "-")))
        .collect();
    for g in file_grids {
        let axis = g.split_once('=').map(|(a, _)| a.trim().replace('_', "-"));
        if !axis.is_some_and(|a| flag_axes.contains(&a)) {
            args.grid.insert(0, g);
        }
    }
    Ok(())
}

fn set_once<T: std::str::FromStr>(
    slot: &mut Option<T>,
    key: &str,
    value: &str,
) -> Result<(), CliError> {
    if slot.is_none() {
        *slot = Some(parse_value(key, value)?);
    }
    Ok(())
}

/// Resolves flags, the optional config file and defaults into a checked
/// [`RunConfig`].
pub fn resolve(mut args: Args) -> Result<RunConfig, CliError> {
    if let Some(path) = args.config.clone() {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        apply_config_text(&mut args, &text)?;
    }
    let command: Command = args
        .command
        .as_deref()
        .ok_or_else(|| CliError::Config("command: missing (--command)".into()))?
        .parse()?;
    let mut config = RunConfig::new(command);
    let s = &mut config.scenario;
    s.kappa_rot = args.kappa.unwrap_or(s.kappa_rot);
    s.kappa_v = args.kappa_v.unwrap_or(s.kappa_v);
    s.kappa_p = args.kappa_p.unwrap_or(s.kappa_p);
    s.delta = args.delta.unwrap_or(s.delta);
    s.p0_over_m = args.p0_over_m.unwrap_or(s.p0_over_m);
    config.theta_e = args.theta_e.unwrap_or(config.theta_e);
    config.lambda = args.lambda.unwrap_or(config.lambda);
    config.epsilon = args.epsilon.unwrap_or(config.epsilon);
    config.n_samples = args.samples.unwrap_or(config.n_samples);
    config.seed = args.seed.unwrap_or(config.seed);
    config.output = args.output;
    config.perturb_coefficients = args.perturb_coefficients;
    for g in &args.grid {
        let (axis, grid) = parse_grid(g)?;
        config.grids.insert(axis, grid);
    }
    config.validate()?;
    Ok(config)
}

fn emit(table: &CsvTable, output: Option<&Path>) -> Result<(), CliError> {
    let csv = table.to_csv();
    match output {
        Some(path) => write_atomic(path, csv.as_bytes()).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(csv.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

/// Runs a resolved configuration, writing its table.
pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    for w in config.scenario.warnings() {
        eprintln!("warning: {w}");
    }
    let table = run_command(config)?;
    emit(&table, config.output.as_deref())?;
    if config.command == Command::Validate && !validation_passed(&table) {
        let pass = table.column("pass").expect("validation header");
        let id = table.column("check_id").expect("validation header");
        let failed = table
            .rows
            .iter()
            .filter(|r| {
                !r[id].to_string().starts_with("report.")
                    && r[pass] != crate::scenarios::Cell::Bool(true)
            })
            .count();
        return Err(CliError::Validation { failed });
    }
    Ok(())
}

/// Full entry point; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match resolve(args).and_then(|c| execute(&c)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
