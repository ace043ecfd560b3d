//! Frozen Lake gridworlds: random layouts, the slip-dynamics MDP, reach-optimal
//! baseline strategies, PRISM export and the batch benchmark comparing the
//! length-optimal strategy against the baselines.

pub mod baseline;
pub mod bench;
pub mod encode;
pub mod layout;
pub mod prism;

use lexmdp_core::ModelError;
use thiserror::Error;

pub use baseline::{baseline_reach_strategy, TieBreak};
pub use bench::{run_benchmark, BenchmarkConfig, BenchmarkRecord, BenchmarkReport};
pub use encode::{graph_shortest_distance, layout_to_mdp, Direction, SlipParams};
pub use layout::{generate_layout, parse_layout, render_layout, Cell, GridLayout};
pub use prism::export_prism;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LakeError {
    #[error("grid {width}x{height} is too small: both sides need at least 3 cells")]
    TooSmall { width: usize, height: usize },
    #[error("row {row} has the wrong length")]
    Ragged { row: usize },
    #[error("border cell ({row}, {col}) is not a wall")]
    OpenBorder { row: usize, col: usize },
    #[error("expected exactly one start cell, found {0}")]
    StartCount(usize),
    #[error("expected exactly one target cell, found {0}")]
    TargetCount(usize),
    #[error("unknown symbol `{symbol}` at ({row}, {col})")]
    UnknownSymbol { row: usize, col: usize, symbol: char },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("no layout with two free cells in {attempts} seeds from {seed}")]
    GenerationExhausted { seed: u64, attempts: u64 },
    #[error("slip weights need a positive intended weight")]
    Slip,
    #[error(transparent)]
    Model(#[from] ModelError),
}
