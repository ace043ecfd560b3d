//! Independent ground truth for the lexicographic solvers: exhaustive
//! enumeration of memoryless deterministic strategies, exact Markov chain
//! analysis with its own dense linear algebra, brute-force lexicographic
//! optima, seeded simulation, and executable identities between the original
//! and the pruned model.

pub mod analysis;
pub mod brute;
pub mod dense;
pub mod enumerate;
pub mod identities;
pub mod random;
pub mod simulate;

use lexmdp_core::{ModelError, SolveError};

pub use analysis::{
    analyse_chain, exact_chain_mp_analysis, exact_chain_reach_analysis, ChainAnalysis, MeanPayoffAnalysis,
    ReachAnalysis,
};
pub use brute::{lexicographic_brute_force, LexOptimum, Objective};
pub use enumerate::{count_md_strategies, enumerate_md_strategies, StrategyEnumeration, DEFAULT_CAP};
pub use identities::IdentityReport;
pub use random::{random_instance, InstanceConfig};
pub use simulate::{simulate, SimulationConfig, SimulationStats};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("strategy enumeration cap exceeded: {count} strategies > cap {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("no strategy has a defined objective value (conditioning event null)")]
    Undefined,
    #[error("singular linear system in oracle analysis")]
    Singular,
    #[error("model has no rewards")]
    MissingRewards,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}
