//! Grid maps with walls, a goal and one-way membranes.
//!
//! Text format: one line per grid row, cells separated by whitespace. A cell
//! token is an optional kind glyph followed by zero or more membrane markers:
//!
//! ```text
//! #      wall
//! .      free cell
//! G      goal (exactly one)
//! ^ v < >  membrane on the cell's north/south/west/east edge
//! ```
//!
//! A marker blocks *leaving* the cell in that direction; entering the cell
//! across the same edge is allowed and counts as a membrane traversal. A token
//! made of markers only (`^<>`) is a free cell. Lines starting with `;` are
//! comments; blank lines are ignored.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Compass direction; doubles as the action alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    North,
    South,
    West,
    East,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::North, Direction::South, Direction::West, Direction::East];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::North => Direction::South,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
            Direction::East => Direction::West,
        }
    }

    fn marker(self) -> char {
        match self {
            Direction::North => '^',
            Direction::South => 'v',
            Direction::West => '<',
            Direction::East => '>',
        }
    }

    fn from_marker(c: char) -> Option<Self> {
        match c {
            '^' => Some(Direction::North),
            'v' => Some(Direction::South),
            '<' => Some(Direction::West),
            '>' => Some(Direction::East),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Wall,
    Free,
    Goal,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("line {line}, column {column}: unknown glyph {glyph:?}")]
    UnknownGlyph { line: usize, column: usize, glyph: char },
    #[error("line {line}: row has {found} cells, expected {expected}")]
    RaggedRow { line: usize, found: usize, expected: usize },
    #[error("line {line}, column {column}: membrane points into a wall or off the grid")]
    MembraneIntoWall { line: usize, column: usize },
    #[error("line {line}, column {column}: wall cells cannot carry membranes")]
    MembraneOnWall { line: usize, column: usize },
    #[error("line {line}, column {column}: membranes on both sides of one edge")]
    MembraneConflict { line: usize, column: usize },
    #[error("map has no goal")]
    NoGoal,
    #[error("line {line}, column {column}: second goal")]
    MultipleGoals { line: usize, column: usize },
    #[error("map is empty")]
    Empty,
    #[error("invalid map parameter: {0}")]
    Parameter(String),
}

/// Reward and dynamics settings attached to a map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridParams {
    /// Probability of moving in the intended direction.
    pub success_prob: f64,
    pub default_reward: f64,
    pub membrane_reward: f64,
    pub goal_reward: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            success_prob: 0.9,
            default_reward: 0.0,
            membrane_reward: 1.0,
            goal_reward: 2.5,
        }
    }
}

/// A validated grid. Cells are indexed row-major; every cell (walls included)
/// has a state index.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    kinds: Vec<CellKind>,
    /// `membranes[cell][dir]`: leaving `cell` towards `dir` is blocked.
    membranes: Vec<[bool; 4]>,
    goal: usize,
    params: GridParams,
    /// Cells a goal visit can reset to.
    reset_cells: Vec<usize>,
}

impl GridMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn n_cells(&self) -> usize {
        self.kinds.len()
    }

    pub fn n_actions(&self) -> usize {
        4
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn with_params(mut self, params: GridParams) -> Result<Self, MapError> {
        if !(params.success_prob > 0.0 && params.success_prob <= 1.0) {
            return Err(MapError::Parameter(format!(
                "success probability {} outside (0, 1]",
                params.success_prob
            )));
        }
        self.params = params;
        Ok(self)
    }

    pub fn kind(&self, cell: usize) -> CellKind {
        self.kinds[cell]
    }

    pub fn is_passable(&self, cell: usize) -> bool {
        self.kinds[cell] != CellKind::Wall
    }

    pub fn passable_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_cells()).filter(|&c| self.is_passable(c))
    }

    /// Passable cells other than the goal; where a goal visit restarts.
    pub fn reset_cells(&self) -> &[usize] {
        &self.reset_cells
    }

    pub fn cell(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell / self.width, cell % self.width)
    }

    /// Whether leaving `cell` towards `dir` is blocked by a membrane.
    pub fn blocks_exit(&self, cell: usize, dir: Direction) -> bool {
        self.membranes[cell][dir.index()]
    }

    /// In-grid neighbour, regardless of walls.
    pub fn neighbor(&self, cell: usize, dir: Direction) -> Option<usize> {
        let (r, c) = self.coords(cell);
        match dir {
            Direction::North if r > 0 => Some(cell - self.width),
            Direction::South if r + 1 < self.height => Some(cell + self.width),
            Direction::West if c > 0 => Some(cell - 1),
            Direction::East if c + 1 < self.width => Some(cell + 1),
            _ => None,
        }
    }

    /// Passable neighbours of `cell` with the direction leading to them.
    pub fn free_neighbors(&self, cell: usize) -> Vec<(Direction, usize)> {
        Direction::ALL
            .iter()
            .filter_map(|&d| self.neighbor(cell, d).map(|n| (d, n)))
            .filter(|&(_, n)| self.is_passable(n))
            .collect()
    }

    /// Outcome of trying to move from `cell` towards `dir`: the cell reached
    /// and whether a membrane was crossed. Walls, the border and the closed
    /// side of a membrane leave the agent in place.
    pub fn attempt(&self, cell: usize, dir: Direction) -> (usize, bool) {
        match self.neighbor(cell, dir) {
            Some(n) if self.is_passable(n) && !self.blocks_exit(cell, dir) => {
                (n, self.blocks_exit(n, dir.opposite()))
            }
            _ => (cell, false),
        }
    }

    pub fn membrane_count(&self) -> usize {
        self.membranes.iter().flatten().filter(|b| **b).count()
    }
}

/// Parses the text map format described in the module docs, with default
/// [`GridParams`].
pub fn parse_grid_map(text: &str) -> Result<GridMap, MapError> {
    let mut kinds = Vec::new();
    let mut membranes = Vec::new();
    // (line, column) of each cell for error reporting.
    let mut origin = Vec::new();
    let mut width = None;
    let mut goal = None;
    let mut height = 0;

    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with(';') {
            continue;
        }
        let mut row = 0;
        let mut offset = 0;
        for token in raw.split_whitespace() {
            let column = raw[offset..].find(token).map(|p| p + offset + 1).unwrap_or(1);
            offset = column - 1 + token.len();
            let (kind, body) = match token.as_bytes()[0] {
                b'#' => (CellKind::Wall, 1),
                b'.' => (CellKind::Free, 1),
                b'G' => (CellKind::Goal, 1),
                _ => (CellKind::Free, 0),
            };
            let mut marks = [false; 4];
            for (ci, ch) in token.char_indices().skip(body) {
                let dir = Direction::from_marker(ch).ok_or(MapError::UnknownGlyph {
                    line,
                    column: column + ci,
                    glyph: ch,
                })?;
                marks[dir.index()] = true;
            }
            if kind == CellKind::Wall && marks.iter().any(|m| *m) {
                return Err(MapError::MembraneOnWall { line, column });
            }
            if kind == CellKind::Goal {
                if goal.is_some() {
                    return Err(MapError::MultipleGoals { line, column });
                }
                goal = Some(kinds.len());
            }
            kinds.push(kind);
            membranes.push(marks);
            origin.push((line, column));
            row += 1;
        }
        match width {
            None => width = Some(row),
            Some(w) if w != row => {
                return Err(MapError::RaggedRow {
                    line,
                    found: row,
                    expected: w,
                })
            }
            _ => {}
        }
        height += 1;
    }

    let width = width.filter(|w| *w > 0).ok_or(MapError::Empty)?;
    let goal = goal.ok_or(MapError::NoGoal)?;
    let mut map = GridMap {
        width,
        height,
        kinds,
        membranes,
        goal,
        params: GridParams::default(),
        reset_cells: Vec::new(),
    };
    for cell in 0..map.n_cells() {
        for dir in Direction::ALL {
            if !map.blocks_exit(cell, dir) {
                continue;
            }
            let (line, column) = origin[cell];
            match map.neighbor(cell, dir) {
                Some(n) if map.is_passable(n) => {
                    if map.blocks_exit(n, dir.opposite()) {
                        return Err(MapError::MembraneConflict { line, column });
                    }
                }
                _ => return Err(MapError::MembraneIntoWall { line, column }),
            }
        }
    }
    map.reset_cells = map.passable_cells().filter(|&c| c != goal).collect();
    Ok(map)
}

impl fmt::Display for GridMap {
    /// Serializes back to the text format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.height {
            let tokens: Vec<String> = (0..self.width)
                .map(|c| {
                    let cell = self.cell(r, c);
                    let mut t = String::from(match self.kinds[cell] {
                        CellKind::Wall => '#',
                        CellKind::Free => '.',
                        CellKind::Goal => 'G',
                    });
                    for d in Direction::ALL {
                        if self.blocks_exit(cell, d) {
                            t.push(d.marker());
                        }
                    }
                    t
                })
                .collect();
            writeln!(f, "{}", tokens.join(" "))?;
        }
        Ok(())
    }
}

/// The bundled 7×7 map: two inverted cups of one-way membranes, enterable from
/// the top and sides and left only through the bottom, plus a goal.
pub const INVERTED_CUPS: &str = include_str!("../../maps/inverted_cups.txt");

/// Parses [`INVERTED_CUPS`].
pub fn inverted_cups() -> GridMap {
    parse_grid_map(INVERTED_CUPS).expect("bundled map is valid")
}
