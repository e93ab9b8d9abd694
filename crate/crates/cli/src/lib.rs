//! Command-line front end. [`run`] does all the work and returns the exit code
//! with the text for stdout and stderr, so it can be driven from tests.

mod args;
mod commands;
mod output;

use clap::Parser;
use thetaquad::integrate::DEFAULT_ORACLE_TOL;
use thetaquad::QuadError;

pub use args::Cli;

/// Environment variable overriding the oracle tolerance.
pub const ORACLE_TOL_ENV: &str = "THETAQUAD_ORACLE_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: String) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Run with the oracle tolerance taken from the process environment.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let env = std::env::var(ORACLE_TOL_ENV).ok();
    run_with_env(args, env.as_deref())
}

/// `args` includes the program name. `oracle_tol` is the raw value of
/// [`ORACLE_TOL_ENV`], if set.
pub fn run_with_env<I, S>(args: I, oracle_tol: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome::fail(EXIT_VALIDATION, text)
            } else {
                Outcome::ok(text)
            };
        }
    };
    let tol = match parse_tol(oracle_tol) {
        Ok(t) => t,
        Err(e) => return failure(e),
    };
    match commands::dispatch(&cli, tol) {
        Ok(text) => Outcome::ok(text),
        Err(e) => failure(e),
    }
}

fn parse_tol(raw: Option<&str>) -> thetaquad::Result<f64> {
    let Some(raw) = raw else {
        return Ok(DEFAULT_ORACLE_TOL);
    };
    match raw.trim().parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(QuadError::Validation(format!(
            "{ORACLE_TOL_ENV} must be a positive number, got '{raw}'"
        ))),
    }
}

fn failure(e: QuadError) -> Outcome {
    let code = match e {
        QuadError::Convergence { .. } => EXIT_CONVERGENCE,
        _ => EXIT_VALIDATION,
    };
    Outcome::fail(code, format!("error: {e}\n"))
}
