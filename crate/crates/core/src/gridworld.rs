//! Navigation grids compiled into MDP models.
//!
//! A map document is plain text: optional `key = value` header lines, a
//! blank line, then a rectangular character map over `#` (wall), `S`
//! (start), `T` (target), and `.` (free). Header keys: `wind_north`,
//! `wind_west`, `step_cost`, `t_bar`, `beta`. Lines are LF-terminated UTF-8.
//!
//! The compiled model has four actions (north, south, east, west). A move
//! that would leave the grid or enter a wall leaves the state unchanged.
//! With wind, the realized direction is the intended one with probability
//! `1 - wind_north - wind_west`, north with `wind_north`, and west with
//! `wind_west` (masses add when the intended direction coincides with a wind
//! direction); clipping by walls and boundaries applies to the realized
//! move. The target cell feeds a virtual absorbing state with probability
//! one under every action, the absorbing state loops on itself, and the
//! stage cost is `step_cost` everywhere except the target and absorbing
//! states, which are free.
//!
//! States are indexed over non-wall cells in row-major order starting from
//! the southernmost (last) map line, then the absorbing state last; display
//! indices are 1-based.

use std::collections::VecDeque;

use ndarray::Array2;
use thiserror::Error;

use crate::mdp::MdpModel;

/// The bundled benchmark map: a 4x6 grid with five walls whose shortest
/// start-to-target route takes 12 steps over 13 cells.
pub const PAPER_GRID: &str = include_str!("../../../maps/paper.grid");

/// Wind strength used by the windy variant of the bundled benchmark.
pub const BENCH_WIND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Free,
    Wall,
    Start,
    Target,
}

impl Cell {
    fn from_char(ch: char) -> Option<Self> {
        match ch {
            '.' => Some(Cell::Free),
            '#' => Some(Cell::Wall),
            'S' => Some(Cell::Start),
            'T' => Some(Cell::Target),
            _ => None,
        }
    }

    pub fn is_wall(self) -> bool {
        self == Cell::Wall
    }
}

/// Compass actions, in index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    North = 0,
    South = 1,
    East = 2,
    West = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::South,
        Direction::East,
        Direction::West,
    ];

    pub const LABELS: [&'static str; 4] = ["north", "south", "east", "west"];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        Self::LABELS[self.index()]
    }

    /// Offset in text coordinates (row 0 is the northernmost line).
    fn offset(self) -> (isize, isize) {
        match self {
            Direction::North => (-1, 0),
            Direction::South => (1, 0),
            Direction::East => (0, 1),
            Direction::West => (0, -1),
        }
    }
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("map has no cells")]
    Empty,
    #[error("line {line}: row has {got} cells, expected {expected}")]
    RaggedRow {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}, column {col}: unknown map character {ch:?}")]
    UnknownChar { line: usize, col: usize, ch: char },
    #[error("map has no start cell")]
    MissingStart,
    #[error("line {line}, column {col}: duplicate start cell")]
    DuplicateStart { line: usize, col: usize },
    #[error("map has no target cell")]
    MissingTarget,
    #[error("line {line}, column {col}: duplicate target cell")]
    DuplicateTarget { line: usize, col: usize },
    #[error("no path from the start cell to the target cell")]
    UnreachableTarget,
    #[error("line {line}: bad header: {message}")]
    Header { line: usize, message: String },
    #[error("invalid {key}: {message}")]
    InvalidValue { key: &'static str, message: String },
}

/// A validated grid description plus the solver defaults carried by the map
/// header, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    rows: usize,
    cols: usize,
    cells: Vec<Cell>,
    wind_north: f64,
    wind_west: f64,
    step_cost: f64,
    beta: Option<f64>,
    t_bar: Option<usize>,
}

impl GridSpec {
    /// Builds a spec from row-major cells (row 0 is the northernmost line).
    pub fn new(rows: usize, cols: usize, cells: Vec<Cell>) -> Result<Self, MapError> {
        if rows == 0 || cols == 0 || cells.len() != rows * cols {
            return Err(MapError::Empty);
        }
        let spec = Self {
            rows,
            cols,
            cells,
            wind_north: 0.0,
            wind_west: 0.0,
            step_cost: 10.0,
            beta: None,
            t_bar: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_wind(mut self, wind_north: f64, wind_west: f64) -> Result<Self, MapError> {
        self.wind_north = wind_north;
        self.wind_west = wind_west;
        self.check_wind()?;
        Ok(self)
    }

    pub fn with_step_cost(mut self, step_cost: f64) -> Result<Self, MapError> {
        if !step_cost.is_finite() || step_cost < 0.0 {
            return Err(MapError::InvalidValue {
                key: "step_cost",
                message: format!("must be finite and nonnegative, got {step_cost}"),
            });
        }
        self.step_cost = step_cost;
        Ok(self)
    }

    fn check_wind(&self) -> Result<(), MapError> {
        for (key, v) in [
            ("wind_north", self.wind_north),
            ("wind_west", self.wind_west),
        ] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(MapError::InvalidValue {
                    key: if key == "wind_north" {
                        "wind_north"
                    } else {
                        "wind_west"
                    },
                    message: format!("must lie in [0, 1], got {v}"),
                });
            }
        }
        if self.wind_north + self.wind_west > 1.0 {
            return Err(MapError::InvalidValue {
                key: "wind_north",
                message: format!(
                    "wind probabilities sum to {} > 1",
                    self.wind_north + self.wind_west
                ),
            });
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), MapError> {
        self.check_wind()?;
        let mut start = None;
        let mut target = None;
        for (i, cell) in self.cells.iter().enumerate() {
            let line = i / self.cols + 1;
            let col = i % self.cols + 1;
            match cell {
                Cell::Start => {
                    if start.is_some() {
                        return Err(MapError::DuplicateStart { line, col });
                    }
                    start = Some(i);
                }
                Cell::Target => {
                    if target.is_some() {
                        return Err(MapError::DuplicateTarget { line, col });
                    }
                    target = Some(i);
                }
                _ => {}
            }
        }
        let start = start.ok_or(MapError::MissingStart)?;
        let target = target.ok_or(MapError::MissingTarget)?;

        // Breadth-first reachability from S to T over non-wall cells.
        let mut seen = vec![false; self.cells.len()];
        let mut queue = VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            if i == target {
                return Ok(());
            }
            let (r, c) = (i / self.cols, i % self.cols);
            for dir in Direction::ALL {
                let (dr, dc) = dir.offset();
                let nr = r as isize + dr;
                let nc = c as isize + dc;
                if nr < 0 || nc < 0 || nr >= self.rows as isize || nc >= self.cols as isize {
                    continue;
                }
                let j = nr as usize * self.cols + nc as usize;
                if !seen[j] && !self.cells[j].is_wall() {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        Err(MapError::UnreachableTarget)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Cell at text coordinates (row 0 is the northernmost line).
    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.cols + col]
    }

    pub fn wind_north(&self) -> f64 {
        self.wind_north
    }

    pub fn wind_west(&self) -> f64 {
        self.wind_west
    }

    pub fn step_cost(&self) -> f64 {
        self.step_cost
    }

    /// Discount factor suggested by the map header, if present.
    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    /// Maximum waiting time suggested by the map header, if present.
    pub fn t_bar(&self) -> Option<usize> {
        self.t_bar
    }

    pub fn num_open_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_wall()).count()
    }
}

/// Parses a map document. Errors carry 1-based line (and column) positions.
pub fn parse_map(text: &str) -> Result<GridSpec, MapError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut idx = 0;

    // Header: present iff the first line contains '='. Runs to a blank line.
    let mut wind_north = 0.0;
    let mut wind_west = 0.0;
    let mut step_cost = 10.0;
    let mut beta = None;
    let mut t_bar = None;
    if lines.first().is_some_and(|l| l.contains('=')) {
        while idx < lines.len() && !lines[idx].trim().is_empty() {
            let line_no = idx + 1;
            let line = lines[idx];
            let (key, value) = line.split_once('=').ok_or_else(|| MapError::Header {
                line: line_no,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |message: String| MapError::Header {
                line: line_no,
                message,
            };
            match key {
                "wind_north" => {
                    wind_north = value
                        .parse()
                        .map_err(|_| bad(format!("cannot parse wind_north value {value:?}")))?
                }
                "wind_west" => {
                    wind_west = value
                        .parse()
                        .map_err(|_| bad(format!("cannot parse wind_west value {value:?}")))?
                }
                "step_cost" => {
                    step_cost = value
                        .parse()
                        .map_err(|_| bad(format!("cannot parse step_cost value {value:?}")))?
                }
                "beta" => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| bad(format!("cannot parse beta value {value:?}")))?;
                    if !(v > 0.0 && v < 1.0) {
                        return Err(bad(format!("beta must lie in (0, 1), got {v}")));
                    }
                    beta = Some(v);
                }
                "t_bar" => {
                    let v: usize = value
                        .parse()
                        .map_err(|_| bad(format!("cannot parse t_bar value {value:?}")))?;
                    if v == 0 {
                        return Err(bad("t_bar must be at least 1".into()));
                    }
                    t_bar = Some(v);
                }
                other => {
                    return Err(bad(format!("unknown header key {other:?}")));
                }
            }
            idx += 1;
        }
        // Skip the blank separator.
        if idx < lines.len() {
            idx += 1;
        }
    }

    // Map body: contiguous non-empty lines; trailing blank lines tolerated.
    let mut cells = Vec::new();
    let mut rows = 0;
    let mut cols = 0;
    while idx < lines.len() {
        let line_no = idx + 1;
        let line = lines[idx];
        if line.trim().is_empty() {
            break;
        }
        let row: Vec<char> = line.chars().collect();
        if rows == 0 {
            cols = row.len();
        } else if row.len() != cols {
            return Err(MapError::RaggedRow {
                line: line_no,
                expected: cols,
                got: row.len(),
            });
        }
        for (c, ch) in row.into_iter().enumerate() {
            let cell = Cell::from_char(ch).ok_or(MapError::UnknownChar {
                line: line_no,
                col: c + 1,
                ch,
            })?;
            cells.push(cell);
        }
        rows += 1;
        idx += 1;
    }
    while idx < lines.len() {
        if !lines[idx].trim().is_empty() {
            return Err(MapError::Header {
                line: idx + 1,
                message: "unexpected content after the map body".into(),
            });
        }
        idx += 1;
    }
    if rows == 0 {
        return Err(MapError::Empty);
    }

    let mut spec = GridSpec::new(rows, cols, cells)?;
    spec = spec.with_wind(wind_north, wind_west)?;
    spec = spec.with_step_cost(step_cost)?;
    spec.beta = beta;
    spec.t_bar = t_bar;
    Ok(spec)
}

/// The bundled benchmark map, parsed.
pub fn paper_grid() -> GridSpec {
    parse_map(PAPER_GRID).expect("bundled map must parse")
}

/// Mapping between grid cells and model state indices.
///
/// Non-wall cells are numbered in row-major order from the southernmost map
/// line upward; the absorbing state is appended last. Display indices are
/// the internal indices plus one.
#[derive(Debug, Clone)]
pub struct StateIndexing {
    cols: usize,
    cell_state: Vec<Option<usize>>,
    state_cell: Vec<(usize, usize)>,
    start: usize,
    target: usize,
    absorbing: usize,
}

impl StateIndexing {
    fn build(spec: &GridSpec) -> Self {
        let mut cell_state = vec![None; spec.rows * spec.cols];
        let mut state_cell = Vec::with_capacity(spec.num_open_cells());
        let mut start = 0;
        let mut target = 0;
        for r in (0..spec.rows).rev() {
            for c in 0..spec.cols {
                let cell = spec.cell(r, c);
                if cell.is_wall() {
                    continue;
                }
                let state = state_cell.len();
                cell_state[r * spec.cols + c] = Some(state);
                state_cell.push((r, c));
                match cell {
                    Cell::Start => start = state,
                    Cell::Target => target = state,
                    _ => {}
                }
            }
        }
        let absorbing = state_cell.len();
        Self {
            cols: spec.cols,
            cell_state,
            state_cell,
            start,
            target,
            absorbing,
        }
    }

    /// Total number of states including the absorbing state.
    pub fn num_states(&self) -> usize {
        self.state_cell.len() + 1
    }

    pub fn start_state(&self) -> usize {
        self.start
    }

    pub fn target_state(&self) -> usize {
        self.target
    }

    pub fn absorbing_state(&self) -> usize {
        self.absorbing
    }

    /// The state at text coordinates, if the cell is not a wall.
    pub fn state_at(&self, row: usize, col: usize) -> Option<usize> {
        self.cell_state
            .get(row * self.cols + col)
            .copied()
            .flatten()
    }

    /// Text coordinates of a physical state; the absorbing state has none.
    pub fn cell_of(&self, state: usize) -> Option<(usize, usize)> {
        self.state_cell.get(state).copied()
    }

    /// 1-based display index of a state.
    pub fn display_index(&self, state: usize) -> Option<usize> {
        (state < self.num_states()).then_some(state + 1)
    }

    /// Internal state index for a 1-based display index.
    pub fn state_from_display(&self, display: usize) -> Option<usize> {
        (display >= 1 && display <= self.num_states()).then(|| display - 1)
    }
}

/// Compiles a grid into an MDP model plus the cell/state correspondence.
pub fn build_mdp(spec: &GridSpec) -> (MdpModel, StateIndexing) {
    let indexing = StateIndexing::build(spec);
    let n = indexing.num_states();
    let num_actions = Direction::ALL.len();
    let absorbing = indexing.absorbing_state();
    let target = indexing.target_state();

    let intended_mass = 1.0 - (spec.wind_north + spec.wind_west);

    let mut transitions = vec![Array2::<f64>::zeros((n, n)); num_actions];
    for (action, dir) in Direction::ALL.into_iter().enumerate() {
        let p = &mut transitions[action];
        // Realized-direction distribution: wind replaces the intended move,
        // with masses added when they coincide.
        let mut direction_mass = [0.0f64; 4];
        direction_mass[dir.index()] += intended_mass;
        direction_mass[Direction::North.index()] += spec.wind_north;
        direction_mass[Direction::West.index()] += spec.wind_west;

        for state in 0..n {
            if state == absorbing || state == target {
                // The target feeds the absorbing state with probability one;
                // the absorbing state loops on itself.
                p[[state, absorbing]] = 1.0;
                continue;
            }
            let (r, c) = indexing.cell_of(state).expect("physical state");
            for realized in Direction::ALL {
                let mass = direction_mass[realized.index()];
                if mass == 0.0 {
                    continue;
                }
                let (dr, dc) = realized.offset();
                let nr = r as isize + dr;
                let nc = c as isize + dc;
                let dest =
                    if nr < 0 || nc < 0 || nr >= spec.rows() as isize || nc >= spec.cols() as isize
                    {
                        state
                    } else {
                        indexing.state_at(nr as usize, nc as usize).unwrap_or(state)
                    };
                p[[state, dest]] += mass;
            }
        }
    }

    let mut costs = Array2::<f64>::zeros((n, num_actions));
    for state in 0..n {
        if state == target || state == absorbing {
            continue;
        }
        for a in 0..num_actions {
            costs[[state, a]] = spec.step_cost();
        }
    }

    let model = MdpModel::new(transitions, costs)
        .expect("grid compilation produces a valid model")
        .with_action_labels(Direction::LABELS.to_vec())
        .expect("label count matches");
    (model, indexing)
}
