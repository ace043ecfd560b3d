use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::LakeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Free,
    Wall,
    Hole,
    Start,
    Target,
}

impl Cell {
    pub fn symbol(self) -> char {
        match self {
            Cell::Free => '.',
            Cell::Wall => '#',
            Cell::Hole => 'O',
            Cell::Start => 'S',
            Cell::Target => 'T',
        }
    }

    pub fn from_symbol(c: char) -> Option<Cell> {
        Some(match c {
            '.' => Cell::Free,
            '#' => Cell::Wall,
            'O' => Cell::Hole,
            'S' => Cell::Start,
            'T' => Cell::Target,
            _ => return None,
        })
    }

    /// Cells the robot may occupy.
    pub fn is_open(self) -> bool {
        self != Cell::Wall
    }
}

/// Parameters and bookkeeping of a generated layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub requested_seed: u64,
    pub wall_prob: f64,
    pub hole_prob: f64,
    /// Seeds tried first and rejected for leaving fewer than two free cells.
    pub skipped_seeds: Vec<u64>,
}

/// A rectangular grid, row-major, with a wall border and exactly one start
/// and one target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    /// Seed that produced this layout, if generated.
    pub seed: Option<u64>,
    pub generation: Option<GenerationParams>,
}

impl GridLayout {
    /// Checks the layout invariants.
    pub fn new(width: usize, height: usize, cells: Vec<Cell>) -> Result<Self, LakeError> {
        if width < 3 || height < 3 {
            return Err(LakeError::TooSmall { width, height });
        }
        if cells.len() != width * height {
            return Err(LakeError::Ragged { row: cells.len() / width });
        }
        let layout = GridLayout { width, height, cells, seed: None, generation: None };
        for r in 0..height {
            for c in 0..width {
                let border = r == 0 || c == 0 || r + 1 == height || c + 1 == width;
                if border && layout.cell(r, c) != Cell::Wall {
                    return Err(LakeError::OpenBorder { row: r, col: c });
                }
            }
        }
        let starts = layout.cells.iter().filter(|&&x| x == Cell::Start).count();
        let targets = layout.cells.iter().filter(|&&x| x == Cell::Target).count();
        if starts != 1 {
            return Err(LakeError::StartCount(starts));
        }
        if targets != 1 {
            return Err(LakeError::TargetCount(targets));
        }
        Ok(layout)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.width + col]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    fn find(&self, kind: Cell) -> (usize, usize) {
        let i = self.cells.iter().position(|&c| c == kind).expect("layout invariant");
        (i / self.width, i % self.width)
    }

    pub fn start(&self) -> (usize, usize) {
        self.find(Cell::Start)
    }

    pub fn target(&self) -> (usize, usize) {
        self.find(Cell::Target)
    }

    /// Fraction of interior cells that are walls.
    pub fn interior_wall_fraction(&self) -> f64 {
        let mut walls = 0;
        let mut total = 0;
        for r in 1..self.height - 1 {
            for c in 1..self.width - 1 {
                total += 1;
                walls += usize::from(self.cell(r, c) == Cell::Wall);
            }
        }
        walls as f64 / total as f64
    }
}

/// One line per row, no trailing newline after the last row.
pub fn render_layout(layout: &GridLayout) -> String {
    layout
        .cells
        .chunks(layout.width)
        .map(|row| row.iter().map(|c| c.symbol()).collect::<String>())
        .collect::<Vec<_>>()
        .join("\n")
}

impl fmt::Display for GridLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_layout(self))
    }
}

/// Inverse of [`render_layout`]. A single trailing newline is accepted, and
/// lines starting with `;` (provenance comments) are skipped.
pub fn parse_layout(text: &str) -> Result<GridLayout, LakeError> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    let rows: Vec<&str> = text.split('\n').filter(|l| !l.starts_with(';')).collect();
    let width = rows.first().map_or(0, |r| r.chars().count());
    let mut cells = Vec::with_capacity(width * rows.len());
    for (r, line) in rows.iter().enumerate() {
        if line.chars().count() != width {
            return Err(LakeError::Ragged { row: r });
        }
        for (c, ch) in line.chars().enumerate() {
            cells.push(Cell::from_symbol(ch).ok_or(LakeError::UnknownSymbol { row: r, col: c, symbol: ch })?);
        }
    }
    GridLayout::new(width, rows.len(), cells)
}

/// Attempts before giving up on parameters that never leave two free cells.
const MAX_ATTEMPTS: u64 = 1000;

/// Random layout, a pure function of its arguments.
///
/// Draw order on a ChaCha8 stream seeded with `seed`: interior walls
/// row-major (`u < wall_prob` with `u` uniform in [0,1)), then holes
/// row-major over the remaining free cells, then the target uniformly among
/// the free cells left, then the start among those left after that. If fewer
/// than two free cells remain, the whole draw is repeated with `seed + 1`.
pub fn generate_layout(
    seed: u64,
    width: usize,
    height: usize,
    wall_prob: f64,
    hole_prob: f64,
) -> Result<GridLayout, LakeError> {
    if width < 3 || height < 3 {
        return Err(LakeError::TooSmall { width, height });
    }
    for p in [wall_prob, hole_prob] {
        if !(0.0..=1.0).contains(&p) {
            return Err(LakeError::Probability(p));
        }
    }
    let mut skipped = Vec::new();
    for k in 0..MAX_ATTEMPTS {
        let s = seed.wrapping_add(k);
        if let Some(mut layout) = draw(s, width, height, wall_prob, hole_prob) {
            layout.seed = Some(s);
            layout.generation = Some(GenerationParams {
                requested_seed: seed,
                wall_prob,
                hole_prob,
                skipped_seeds: skipped,
            });
            return Ok(layout);
        }
        skipped.push(s);
    }
    Err(LakeError::GenerationExhausted { seed, attempts: MAX_ATTEMPTS })
}

fn draw(seed: u64, width: usize, height: usize, wall_prob: f64, hole_prob: f64) -> Option<GridLayout> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = vec![Cell::Wall; width * height];
    let interior: Vec<usize> =
        (1..height - 1).flat_map(|r| (1..width - 1).map(move |c| r * width + c)).collect();
    for &i in &interior {
        cells[i] = if rng.gen::<f64>() < wall_prob { Cell::Wall } else { Cell::Free };
    }
    for &i in &interior {
        if cells[i] == Cell::Free && rng.gen::<f64>() < hole_prob {
            cells[i] = Cell::Hole;
        }
    }
    let mut free: Vec<usize> = interior.iter().copied().filter(|&i| cells[i] == Cell::Free).collect();
    if free.len() < 2 {
        return None;
    }
    let t = free.remove(rng.gen_range(0..free.len()));
    cells[t] = Cell::Target;
    let s = free.remove(rng.gen_range(0..free.len()));
    cells[s] = Cell::Start;
    Some(GridLayout::new(width, height, cells).expect("generator upholds layout invariants"))
}
