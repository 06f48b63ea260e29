//! Occupancy-grid map: ternary cell states, coverage accounting, Bresenham
//! rasterization, line-of-sight checks and map differencing.
//!
//! Grids are cheap to clone and treated as immutable snapshots everywhere
//! outside the simulator's single update loop.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geom::{Cell, Point};

/// State of one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

impl CellState {
    pub fn is_known(self) -> bool {
        self != CellState::Unknown
    }
}

/// One changed cell inside a [`GridDiff`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiffEntry {
    pub index: usize,
    pub old: CellState,
    pub new: CellState,
}

/// Set of cells whose state differs between two grid snapshots.
///
/// Entries are unique per cell index and sorted ascending; `old != new`
/// for every entry.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GridDiff {
    pub changed: Vec<DiffEntry>,
}

impl GridDiff {
    pub fn is_empty(&self) -> bool {
        self.changed.is_empty()
    }

    pub fn len(&self) -> usize {
        self.changed.len()
    }
}

/// 2D occupancy grid with a monotone version counter.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    width: i32,
    height: i32,
    resolution: f64,
    origin: Point,
    cells: Vec<CellState>,
    version: u64,
}

impl OccupancyGrid {
    /// Grid of the given shape with every cell `Unknown`.
    ///
    /// `origin` is the world position of the lower corner of cell (0, 0);
    /// world point (x, y) maps to cell (floor((x-ox)/res), floor((y-oy)/res)).
    pub fn new_unknown(width: i32, height: i32, resolution: f64, origin: Point) -> Result<Self> {
        if width <= 0 || height <= 0 {
            return Err(Error::InvalidArgument(format!(
                "grid dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(resolution > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        Ok(OccupancyGrid {
            width,
            height,
            resolution,
            origin,
            cells: vec![CellState::Unknown; (width as usize) * (height as usize)],
            version: 0,
        })
    }

    /// Empty belief grid with the same shape, resolution and origin.
    pub fn blank_like(&self) -> Self {
        OccupancyGrid {
            width: self.width,
            height: self.height,
            resolution: self.resolution,
            origin: self.origin,
            cells: vec![CellState::Unknown; self.cells.len()],
            version: 0,
        }
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(self.in_bounds(c));
        (c.y as usize) * (self.width as usize) + (c.x as usize)
    }

    pub fn cell_at_index(&self, index: usize) -> Cell {
        Cell::new(
            (index % self.width as usize) as i32,
            (index / self.width as usize) as i32,
        )
    }

    /// State of an in-bounds cell.
    pub fn state(&self, c: Cell) -> Result<CellState> {
        if !self.in_bounds(c) {
            return Err(self.oob(c));
        }
        Ok(self.cells[self.index(c)])
    }

    /// State with out-of-bounds cells reading as `Unknown` (the convention
    /// used by frontier windows).
    pub fn state_or_unknown(&self, c: Cell) -> CellState {
        if self.in_bounds(c) {
            self.cells[self.index(c)]
        } else {
            CellState::Unknown
        }
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.cells[self.index(c)] == CellState::Free
    }

    /// Set a cell's state. Bumps the version counter when the state
    /// actually changes; returns whether it did.
    pub fn set_state(&mut self, c: Cell, s: CellState) -> Result<bool> {
        if !self.in_bounds(c) {
            return Err(self.oob(c));
        }
        let i = self.index(c);
        if self.cells[i] == s {
            return Ok(false);
        }
        self.cells[i] = s;
        self.version += 1;
        Ok(true)
    }

    fn oob(&self, c: Cell) -> Error {
        Error::OutOfBounds {
            x: c.x,
            y: c.y,
            width: self.width,
            height: self.height,
        }
    }

    /// World position of a cell's center.
    pub fn cell_center(&self, c: Cell) -> Point {
        Point::new(
            self.origin.x + (c.x as f64 + 0.5) * self.resolution,
            self.origin.y + (c.y as f64 + 0.5) * self.resolution,
        )
    }

    /// Cell containing a world point (floor convention).
    pub fn world_to_cell(&self, p: Point) -> Cell {
        Cell::new(
            ((p.x - self.origin.x) / self.resolution).floor() as i32,
            ((p.y - self.origin.y) / self.resolution).floor() as i32,
        )
    }

    pub fn known_count(&self) -> usize {
        self.cells.iter().filter(|s| s.is_known()).count()
    }

    /// Fraction of `denominator` cells whose state is known.
    pub fn coverage(&self, denominator: usize) -> Result<f64> {
        if denominator == 0 {
            return Err(Error::InvalidArgument(
                "coverage denominator must be positive".into(),
            ));
        }
        Ok(self.known_count() as f64 / denominator as f64)
    }

    /// Bresenham rasterization from `a` to `b`, both inclusive and in bounds.
    pub fn bresenham(&self, a: Cell, b: Cell) -> Result<Vec<Cell>> {
        if !self.in_bounds(a) {
            return Err(self.oob(a));
        }
        if !self.in_bounds(b) {
            return Err(self.oob(b));
        }
        Ok(bresenham_cells(a, b))
    }

    /// True iff every cell on the Bresenham line from `a` to `b` is Free.
    pub fn line_of_sight_free(&self, a: Cell, b: Cell) -> Result<bool> {
        Ok(self
            .bresenham(a, b)?
            .into_iter()
            .all(|c| self.cells[self.index(c)] == CellState::Free))
    }

    /// Cells whose state differs from `previous`, sorted by index.
    pub fn diff(&self, previous: &OccupancyGrid) -> Result<GridDiff> {
        if self.width != previous.width
            || self.height != previous.height
            || self.resolution != previous.resolution
            || self.origin != previous.origin
        {
            return Err(Error::ShapeMismatch(format!(
                "{}x{}@{} vs {}x{}@{}",
                self.width,
                self.height,
                self.resolution,
                previous.width,
                previous.height,
                previous.resolution
            )));
        }
        let changed = self
            .cells
            .iter()
            .zip(previous.cells.iter())
            .enumerate()
            .filter(|(_, (new, old))| new != old)
            .map(|(index, (new, old))| DiffEntry {
                index,
                old: *old,
                new: *new,
            })
            .collect();
        Ok(GridDiff { changed })
    }

    /// Parse the line-oriented ground-truth map format: one row per line,
    /// `#` occupied, `.` free, with an optional leading `resolution=<m>`
    /// line (default 0.05). The first map row is row y = 0.
    pub fn parse_map(text: &str) -> Result<Self> {
        let mut resolution = 0.05;
        let mut rows: Vec<&str> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            if let Some(value) = line.strip_prefix("resolution=") {
                if !rows.is_empty() {
                    return Err(Error::MapFormat(format!(
                        "line {}: resolution line must precede map rows",
                        lineno + 1
                    )));
                }
                resolution = value.trim().parse::<f64>().map_err(|e| {
                    Error::MapFormat(format!("line {}: bad resolution: {e}", lineno + 1))
                })?;
                if !(resolution > 0.0) {
                    return Err(Error::MapFormat(format!(
                        "line {}: resolution must be positive",
                        lineno + 1
                    )));
                }
                continue;
            }
            rows.push(line);
        }
        if rows.is_empty() {
            return Err(Error::MapFormat("map has no rows".into()));
        }
        let width = rows[0].len();
        let mut grid = OccupancyGrid::new_unknown(
            width as i32,
            rows.len() as i32,
            resolution,
            Point::new(0.0, 0.0),
        )?;
        for (y, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::MapFormat(format!(
                    "row {} has length {}, expected {}",
                    y + 1,
                    row.len(),
                    width
                )));
            }
            for (x, ch) in row.chars().enumerate() {
                let s = match ch {
                    '#' => CellState::Occupied,
                    '.' => CellState::Free,
                    other => {
                        return Err(Error::MapFormat(format!(
                            "row {} col {}: unexpected character {other:?}",
                            y + 1,
                            x + 1
                        )))
                    }
                };
                grid.set_state(Cell::new(x as i32, y as i32), s)?;
            }
        }
        Ok(grid)
    }

    pub fn load_map(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading map {}", path.display()), e))?;
        Self::parse_map(&text)
    }
}

/// Bresenham rasterization between two cells, endpoints inclusive,
/// 8-connected, no bounds checks.
///
/// Symmetric by construction: the cell set of `a -> b` equals that of
/// `b -> a` (the non-canonical direction is computed as the reverse of
/// the canonical one).
pub fn bresenham_cells(a: Cell, b: Cell) -> Vec<Cell> {
    if (b.x, b.y) < (a.x, a.y) {
        let mut cells = bresenham_raw(b, a);
        cells.reverse();
        return cells;
    }
    bresenham_raw(a, b)
}

fn bresenham_raw(a: Cell, b: Cell) -> Vec<Cell> {
    let mut cells = Vec::with_capacity(a.chebyshev(b) as usize + 1);
    let dx = (b.x - a.x).abs();
    let dy = -(b.y - a.y).abs();
    let sx = if a.x < b.x { 1 } else { -1 };
    let sy = if a.y < b.y { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (a.x, a.y);
    loop {
        cells.push(Cell::new(x, y));
        if x == b.x && y == b.y {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    cells
}

/// Ground-truth count of observable cells: free cells 4-connected to
/// `start`, plus occupied cells 4-adjacent to one of them. This is the
/// coverage denominator used by episodes, so thresholds are stated over
/// cells a robot could actually come to know.
pub fn observable_cells(world: &OccupancyGrid, start: Cell) -> Result<usize> {
    if !world.is_free(start) {
        return Err(Error::InvalidArgument(format!(
            "observable_cells start {start} is not a free cell"
        )));
    }
    let mut reachable = vec![false; world.cell_count()];
    let mut queue = VecDeque::new();
    reachable[world.index(start)] = true;
    queue.push_back(start);
    while let Some(c) = queue.pop_front() {
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let n = Cell::new(c.x + dx, c.y + dy);
            if world.is_free(n) && !reachable[world.index(n)] {
                reachable[world.index(n)] = true;
                queue.push_back(n);
            }
        }
    }
    let mut count = 0usize;
    for y in 0..world.height() {
        for x in 0..world.width() {
            let c = Cell::new(x, y);
            match world.state(c)? {
                CellState::Free => {
                    if reachable[world.index(c)] {
                        count += 1;
                    }
                }
                CellState::Occupied => {
                    let touches = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| {
                        let n = Cell::new(x + dx, y + dy);
                        world.in_bounds(n) && reachable[world.index(n)]
                    });
                    if touches {
                        count += 1;
                    }
                }
                CellState::Unknown => {}
            }
        }
    }
    Ok(count)
}
