//! Lexicographic bi-objective synthesis for finite Markov decision processes.
//!
//! Two pipelines share one construction, the value-renormalised pruned MDP:
//!
//! * [`reach::solve_reach_length`]: maximise the probability of reaching a
//!   target, then minimise the expected number of steps conditioned on
//!   reaching it.
//! * [`safety::solve_safety_mp`]: maximise the probability of never visiting
//!   a bad state, then maximise the expected mean payoff conditioned on
//!   staying safe.
//!
//! Models are generic over [`Number`]: [`Rational`] for exact arithmetic
//! (the default everywhere Opt membership matters) or `f64`.

pub mod chain;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod graph;
pub mod linalg;
pub mod mdp;
pub mod mean_payoff;
pub mod number;
pub mod options;
pub mod path;
pub mod prune;
pub mod reach;
pub mod safety;
pub mod strategy;

pub use chain::{induced_chain, MarkovChain};
pub use error::{ModelError, SolveError};
pub use mdp::{legal_actions, validate_mdp, ActionId, Mdp, MdpBuilder, StateId, Transition, ValidationReport};
pub use number::{Number, NumericMode, NumericValue, Rational, Tolerances};
pub use options::{Diagnostics, SolverOptions};
pub use path::{finite_path_probability, FinitePath};
pub use prune::{OptSet, PrunedModel, ValueVector};
pub use strategy::MemorylessStrategy;
