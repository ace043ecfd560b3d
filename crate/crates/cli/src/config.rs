//! Solver tolerances from flags and the environment.
//!
//! Flags win over `LEXMDP_EPSILON` / `LEXMDP_ETA`, which win over the
//! built-in defaults. Exact mode ignores both.

use lexmdp_core::{SolverOptions, Tolerances};

use crate::CliError;

pub const ENV_EPSILON: &str = "LEXMDP_EPSILON";
pub const ENV_ETA: &str = "LEXMDP_ETA";

fn from_env(var: &str) -> Result<Option<f64>, CliError> {
    match std::env::var(var) {
        Ok(text) => text
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{var}={text} is not a number"))),
        Err(_) => Ok(None),
    }
}

/// Options from explicit values, falling back to the environment.
pub fn solver_options(epsilon: Option<f64>, eta: Option<f64>) -> Result<SolverOptions, CliError> {
    let epsilon = match epsilon {
        Some(e) => Some(e),
        None => from_env(ENV_EPSILON)?,
    };
    let eta = match eta {
        Some(e) => Some(e),
        None => from_env(ENV_ETA)?,
    };
    options_with(epsilon, eta)
}

/// Options from explicit values only.
pub fn options_with(epsilon: Option<f64>, eta: Option<f64>) -> Result<SolverOptions, CliError> {
    let defaults = Tolerances::default();
    let tolerances = Tolerances {
        epsilon: epsilon.unwrap_or(defaults.epsilon),
        eta: eta.unwrap_or(defaults.eta),
        ..defaults
    };
    tolerances.validate().map_err(CliError::Usage)?;
    Ok(SolverOptions { tolerances, ..SolverOptions::default() })
}
