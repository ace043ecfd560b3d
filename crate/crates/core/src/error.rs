use thiserror::Error;

use crate::mdp::{ActionId, StateId, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid number literal `{0}`")]
pub struct ParseNumberError(pub String);

/// Errors raised while building or querying models, strategies and paths.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model validation failed:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("action {action} is not legal in state {state}")]
    IllegalAction { state: StateId, action: ActionId },
    #[error("strategy covers {got} states but the model has {expected}")]
    StrategySize { expected: usize, got: usize },
    #[error("strategy distribution at state {0} is not a probability distribution")]
    StrategyNotStochastic(StateId),
    #[error("path step {step}: {to} is not a successor of ({from}, {action})")]
    InconsistentPath {
        step: usize,
        from: StateId,
        action: ActionId,
        to: StateId,
    },
}

/// Errors raised by the solvers and evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("empty target set")]
    EmptyTarget,
    #[error("target unreachable: conditional expectation undefined")]
    TargetUnreachable,
    #[error("safety unachievable: conditioning event null")]
    SafetyUnachievable,
    #[error("conditioning event null")]
    ConditioningNull,
    #[error("model has no rewards")]
    MissingRewards,
    #[error("strategy plays action {action} at state {state}, which is not value-optimal")]
    NonOptimalAction { state: StateId, action: ActionId },
    #[error("singular linear system")]
    Singular,
    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),
    #[error("internal solver error: {0}")]
    Internal(String),
}
