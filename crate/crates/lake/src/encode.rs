use std::collections::VecDeque;

use lexmdp_core::{ActionId, Mdp, MdpBuilder, Number, StateId};
use serde::{Deserialize, Serialize};

use crate::layout::{Cell, GridLayout};
use crate::LakeError;

/// Unnormalised slip weights. The intended direction gets `intended_weight`;
/// each perpendicular direction whose neighbour is not a wall gets
/// `side_weight`. The reverse direction never gets weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlipParams {
    pub intended_weight: u32,
    pub side_weight: u32,
}

impl Default for SlipParams {
    fn default() -> Self {
        SlipParams { intended_weight: 10, side_weight: 1 }
    }
}

impl SlipParams {
    /// 0.8 / 0.1 / 0.1 in the open.
    pub fn caption() -> Self {
        SlipParams { intended_weight: 8, side_weight: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    N,
    E,
    S,
    W,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::N, Direction::E, Direction::S, Direction::W];

    pub fn name(self) -> &'static str {
        match self {
            Direction::N => "N",
            Direction::E => "E",
            Direction::S => "S",
            Direction::W => "W",
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Direction::N => (-1, 0),
            Direction::E => (0, 1),
            Direction::S => (1, 0),
            Direction::W => (0, -1),
        }
    }

    pub fn perpendicular(self) -> [Direction; 2] {
        match self {
            Direction::N | Direction::S => [Direction::W, Direction::E],
            Direction::E | Direction::W => [Direction::N, Direction::S],
        }
    }

    pub fn reverse(self) -> Direction {
        match self {
            Direction::N => Direction::S,
            Direction::E => Direction::W,
            Direction::S => Direction::N,
            Direction::W => Direction::E,
        }
    }

    /// Action index in every encoded lake model.
    pub fn action(self) -> ActionId {
        ActionId(self as usize)
    }
}

/// Self-loop action of holes, the target and cells walled in on all sides.
pub const STAY: &str = "stay";

fn step((r, c): (usize, usize), d: Direction) -> (usize, usize) {
    let (dr, dc) = d.delta();
    // open cells are never on the border, so neighbours stay inside the grid
    ((r as isize + dr) as usize, (c as isize + dc) as usize)
}

pub fn state_name(row: usize, col: usize) -> String {
    format!("r{row}c{col}")
}

/// Maps between open cells and model states (row-major order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellIndex {
    width: usize,
    state_of: Vec<Option<StateId>>,
    cell_of: Vec<(usize, usize)>,
}

impl CellIndex {
    pub fn new(layout: &GridLayout) -> Self {
        let mut state_of = vec![None; layout.width() * layout.height()];
        let mut cell_of = Vec::new();
        for r in 0..layout.height() {
            for c in 0..layout.width() {
                if layout.cell(r, c).is_open() {
                    state_of[r * layout.width() + c] = Some(StateId(cell_of.len()));
                    cell_of.push((r, c));
                }
            }
        }
        CellIndex { width: layout.width(), state_of, cell_of }
    }

    pub fn state(&self, row: usize, col: usize) -> Option<StateId> {
        self.state_of[row * self.width + col]
    }

    pub fn cell(&self, s: StateId) -> (usize, usize) {
        self.cell_of[s.0]
    }

    pub fn len(&self) -> usize {
        self.cell_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_of.is_empty()
    }
}

/// Slip-dynamics MDP of a layout. States are the open cells in row-major
/// order, named `r{row}c{col}`; actions are `N, E, S, W` (indices 0..4) plus
/// `stay` for sinks. Moving into a wall is illegal. Holes are bad sinks and
/// the target is a target sink; the start cell is the initial state.
pub fn layout_to_mdp<N: Number>(layout: &GridLayout, slip: SlipParams) -> Result<Mdp<N>, LakeError> {
    if slip.intended_weight == 0 {
        return Err(LakeError::Slip);
    }
    let index = CellIndex::new(layout);
    let mut b = MdpBuilder::<N>::new();
    for s in 0..index.len() {
        let (r, c) = index.cell(StateId(s));
        b.state(&state_name(r, c));
    }
    for d in Direction::ALL {
        b.action(d.name());
    }
    b.action(STAY);
    for s in 0..index.len() {
        let here = index.cell(StateId(s));
        let name = state_name(here.0, here.1);
        match layout.cell(here.0, here.1) {
            Cell::Hole => {
                b.sink(&name, STAY).bad(&name);
                continue;
            }
            Cell::Target => {
                b.sink(&name, STAY).target(&name);
                continue;
            }
            Cell::Start => {
                b.initial(&name);
            }
            _ => {}
        }
        let open = |d: Direction| {
            let (r, c) = step(here, d);
            layout.cell(r, c).is_open().then_some((r, c))
        };
        let mut any = false;
        for d in Direction::ALL {
            let Some(intended) = open(d) else { continue };
            any = true;
            let mut weighted = vec![(intended, slip.intended_weight)];
            if slip.side_weight > 0 {
                weighted.extend(d.perpendicular().into_iter().filter_map(open).map(|cell| (cell, slip.side_weight)));
            }
            let total: u32 = weighted.iter().map(|(_, w)| w).sum();
            let succ: Vec<(String, N)> = weighted
                .into_iter()
                .map(|((r, c), w)| (state_name(r, c), N::from_ratio(w as i64, total as i64)))
                .collect();
            let succ: Vec<(&str, N)> = succ.iter().map(|(n, p)| (n.as_str(), p.clone())).collect();
            b.row(&name, d.name(), &succ);
        }
        if !any {
            b.row(&name, STAY, &[(name.as_str(), N::one())]);
        }
    }
    b.build().map_err(LakeError::Model)
}

/// BFS distance from start to target over open, non-hole cells, ignoring
/// slips. `None` if disconnected.
pub fn graph_shortest_distance(layout: &GridLayout) -> Option<usize> {
    let (w, h) = (layout.width(), layout.height());
    let mut dist = vec![None; w * h];
    let start = layout.start();
    dist[start.0 * w + start.1] = Some(0usize);
    let mut queue = VecDeque::from([start]);
    while let Some(cell) = queue.pop_front() {
        let d = dist[cell.0 * w + cell.1].unwrap();
        if layout.cell(cell.0, cell.1) == Cell::Target {
            return Some(d);
        }
        for dir in Direction::ALL {
            let (r, c) = step(cell, dir);
            let kind = layout.cell(r, c);
            if kind.is_open() && kind != Cell::Hole && dist[r * w + c].is_none() {
                dist[r * w + c] = Some(d + 1);
                queue.push_back((r, c));
            }
        }
    }
    None
}

/// Legal directions of an open cell.
pub fn legal_directions(layout: &GridLayout, row: usize, col: usize) -> Vec<Direction> {
    Direction::ALL
        .into_iter()
        .filter(|&d| {
            let (r, c) = step((row, col), d);
            layout.cell(r, c).is_open()
        })
        .collect()
}
