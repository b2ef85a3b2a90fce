use serde::{Deserialize, Serialize};

use super::WorldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Free,
    Occupied,
    Unknown,
}

impl Cell {
    fn from_char(c: char) -> Option<Cell> {
        match c {
            '.' => Some(Cell::Free),
            '#' => Some(Cell::Occupied),
            '?' => Some(Cell::Unknown),
            _ => None,
        }
    }

    fn to_char(self) -> char {
        match self {
            Cell::Free => '.',
            Cell::Occupied => '#',
            Cell::Unknown => '?',
        }
    }
}

/// Static 2-D map. Cell `(i, j)` covers
/// `[ox + i·res, ox + (i+1)·res) × [oy + j·res, oy + (j+1)·res)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    cells: Vec<Cell>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, origin: (f64, f64), cells: Vec<Cell>) -> Result<Self, WorldError> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(WorldError::InvalidGrid(format!("resolution must be positive, got {resolution}")));
        }
        if width == 0 || height == 0 {
            return Err(WorldError::InvalidGrid("grid must have at least one cell".into()));
        }
        if cells.len() != width * height {
            return Err(WorldError::InvalidGrid(format!(
                "{}x{} grid needs {} cells, got {}",
                width,
                height,
                width * height,
                cells.len()
            )));
        }
        Ok(Self { width, height, resolution, origin, cells })
    }

    pub fn filled(width: usize, height: usize, resolution: f64, cell: Cell) -> Result<Self, WorldError> {
        Self::new(width, height, resolution, (0.0, 0.0), vec![cell; width * height])
    }

    /// Parses the ASCII map format: a `W H RESOLUTION` header line followed by
    /// `H` rows of `W` characters (`#` occupied, `.` free, `?` unknown).
    /// The first map row is `j = 0`.
    pub fn parse_ascii(text: &str) -> Result<Self, WorldError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(WorldError::MapParse { line: 1, message: "empty map".into() })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || WorldError::MapParse {
            line: hline + 1,
            message: format!("expected `W H RESOLUTION`, got `{}`", header.trim()),
        };
        if fields.len() != 3 {
            return Err(bad_header());
        }
        let width: usize = fields[0].parse().map_err(|_| bad_header())?;
        let height: usize = fields[1].parse().map_err(|_| bad_header())?;
        let resolution: f64 = fields[2].parse().map_err(|_| bad_header())?;

        let mut cells = Vec::with_capacity(width * height);
        let mut rows = 0;
        for (lineno, line) in lines {
            let row = line.trim_end();
            if rows == height {
                return Err(WorldError::MapParse { line: lineno + 1, message: format!("more than {height} rows") });
            }
            if row.chars().count() != width {
                return Err(WorldError::MapParse {
                    line: lineno + 1,
                    message: format!("expected {width} cells, got {}", row.chars().count()),
                });
            }
            for (col, c) in row.chars().enumerate() {
                let cell = Cell::from_char(c).ok_or_else(|| WorldError::MapParse {
                    line: lineno + 1,
                    message: format!("unknown cell character {c:?} at column {}", col + 1),
                })?;
                cells.push(cell);
            }
            rows += 1;
        }
        if rows != height {
            return Err(WorldError::MapParse { line: hline + 1, message: format!("header declares {height} rows, found {rows}") });
        }
        Self::new(width, height, resolution, (0.0, 0.0), cells)
    }

    pub fn to_ascii(&self) -> String {
        let mut out = format!("{} {} {}\n", self.width, self.height, self.resolution);
        for j in 0..self.height {
            out.extend((0..self.width).map(|i| self.get(i, j).to_char()));
            out.push('\n');
        }
        out
    }

    pub fn with_origin(mut self, origin: (f64, f64)) -> Self {
        self.origin = origin;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.cells[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, cell: Cell) {
        let k = self.index(i, j);
        self.cells[k] = cell;
    }

    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = ((x - self.origin.0) / self.resolution).floor();
        let fj = ((y - self.origin.1) / self.resolution).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.width as f64 || fj >= self.height as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + (i as f64 + 0.5) * self.resolution,
            self.origin.1 + (j as f64 + 0.5) * self.resolution,
        )
    }

    /// Axis-aligned footprint `(x0, y0, x1, y1)` of a cell.
    pub fn cell_bounds(&self, i: usize, j: usize) -> (f64, f64, f64, f64) {
        let x0 = self.origin.0 + i as f64 * self.resolution;
        let y0 = self.origin.1 + j as f64 * self.resolution;
        (x0, y0, x0 + self.resolution, y0 + self.resolution)
    }

    /// Occupied, or outside the map.
    pub fn blocks(&self, x: f64, y: f64) -> bool {
        match self.world_to_cell(x, y) {
            Some((i, j)) => self.get(i, j) == Cell::Occupied,
            None => true,
        }
    }
}
