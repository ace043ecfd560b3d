use crate::error::SolveError;
use crate::number::{Number, NumericMode, Tolerances};

/// Knobs shared by every solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tolerances: Tolerances,
    /// Cap on policy-iteration rounds and on float value-iteration sweeps.
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerances: Tolerances::default(),
            max_iterations: 1_000_000,
        }
    }
}

impl SolverOptions {
    /// Tolerance sanity check for arithmetic `N`; exact mode ignores them.
    pub fn check_for<N: Number>(&self) -> Result<(), SolveError> {
        match N::MODE {
            NumericMode::Exact => Ok(()),
            NumericMode::Float => self.tolerances.validate().map_err(SolveError::InvalidTolerances),
        }
    }
}

/// Solver bookkeeping reported alongside results.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub mode: NumericMode,
    pub epsilon: f64,
    pub eta: f64,
    /// Policy-iteration rounds (exact) or interval-iteration sweeps (float)
    /// spent on the primary objective.
    pub value_iterations: usize,
    /// Policy-iteration rounds spent on the secondary objective.
    pub strategy_iterations: usize,
    /// Largest Bellman residual of the primary value vector.
    pub bellman_residual: f64,
    pub positive_states: usize,
    pub pruned_choices: usize,
}

impl Diagnostics {
    pub fn new<N: Number>(opts: &SolverOptions) -> Self {
        Diagnostics {
            mode: N::MODE,
            epsilon: opts.tolerances.epsilon,
            eta: opts.tolerances.eta,
            value_iterations: 0,
            strategy_iterations: 0,
            bellman_residual: 0.0,
            positive_states: 0,
            pruned_choices: 0,
        }
    }
}
