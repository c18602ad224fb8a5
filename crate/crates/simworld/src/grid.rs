use thiserror::Error;

use crate::geometry::{Point, Rect};

pub type Cell = (usize, usize);

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("inflation must be non-negative and finite, got {0}")]
    InvalidInflation(f64),
    #[error("bounds have no area")]
    EmptyBounds,
    #[error("footprint {0} lies outside the bounds")]
    OutOfBounds(usize),
}

/// Boolean map over `bounds`; cell `(i, j)` spans
/// `[min.x + i·res, min.x + (i+1)·res] × [min.y + j·res, ...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    origin: Point,
    resolution: f64,
    width: usize,
    height: usize,
    occupied: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new_free(origin: Point, resolution: f64, width: usize, height: usize) -> Self {
        Self {
            origin,
            resolution,
            width,
            height,
            occupied: vec![false; width * height],
        }
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

    pub fn index(&self, (i, j): Cell) -> usize {
        j * self.width + i
    }

    pub fn cell_at(&self, idx: usize) -> Cell {
        (idx % self.width, idx / self.width)
    }

    pub fn is_occupied(&self, c: Cell) -> bool {
        self.occupied[self.index(c)]
    }

    pub fn set(&mut self, c: Cell, occupied: bool) {
        let i = self.index(c);
        self.occupied[i] = occupied;
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    pub fn cell_rect(&self, (i, j): Cell) -> Rect {
        let r = self.resolution;
        Rect::new(
            self.origin.x + i as f64 * r,
            self.origin.y + j as f64 * r,
            self.origin.x + (i + 1) as f64 * r,
            self.origin.y + (j + 1) as f64 * r,
        )
    }

    pub fn center(&self, (i, j): Cell) -> Point {
        Point::new(
            self.origin.x + (i as f64 + 0.5) * self.resolution,
            self.origin.y + (j as f64 + 0.5) * self.resolution,
        )
    }

    /// The cell containing `p`; points on the far edge belong to the last
    /// cell.
    pub fn cell_of(&self, p: Point) -> Option<Cell> {
        let fx = (p.x - self.origin.x) / self.resolution;
        let fy = (p.y - self.origin.y) / self.resolution;
        if !(fx >= -EPS && fy >= -EPS) {
            return None;
        }
        let i = (fx.max(0.0).floor() as usize).min(self.width.saturating_sub(1));
        let j = (fy.max(0.0).floor() as usize).min(self.height.saturating_sub(1));
        (fx <= self.width as f64 + EPS && fy <= self.height as f64 + EPS).then_some((i, j))
    }

    /// False outside the grid.
    pub fn is_free_point(&self, p: Point) -> bool {
        self.cell_of(p).is_some_and(|c| !self.is_occupied(c))
    }

    pub fn contains_cell(&self, (i, j): Cell) -> bool {
        i < self.width && j < self.height
    }
}

/// A cell is occupied when it shares positive area with some footprint
/// grown by `inflation` (Minkowski sum with a disk).
pub fn build_occupancy_grid(
    footprints: &[Rect],
    bounds: Rect,
    resolution: f64,
    inflation: f64,
) -> Result<OccupancyGrid, GridError> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(GridError::InvalidResolution(resolution));
    }
    if !(inflation >= 0.0 && inflation.is_finite()) {
        return Err(GridError::InvalidInflation(inflation));
    }
    if !bounds.has_area() {
        return Err(GridError::EmptyBounds);
    }
    let cells = |len: f64| ((len / resolution - EPS).ceil() as usize).max(1);
    let mut grid = OccupancyGrid::new_free(bounds.min, resolution, cells(bounds.width()), cells(bounds.height()));
    for (k, fp) in footprints.iter().enumerate() {
        if !bounds.contains_rect(fp) {
            return Err(GridError::OutOfBounds(k));
        }
        // only cells near the footprint can be affected
        let reach = Rect::new(
            fp.min.x - inflation,
            fp.min.y - inflation,
            fp.max.x + inflation,
            fp.max.y + inflation,
        );
        let lo = grid.cell_of(bounds.closest_point(reach.min)).unwrap_or((0, 0));
        let hi = grid
            .cell_of(bounds.closest_point(reach.max))
            .unwrap_or((grid.width - 1, grid.height - 1));
        for j in lo.1..=hi.1 {
            for i in lo.0..=hi.0 {
                let (gx, gy) = grid.cell_rect((i, j)).gaps(fp);
                let overlap = gx < -EPS && gy < -EPS;
                let dist = gx.max(0.0).hypot(gy.max(0.0));
                if overlap || (inflation > EPS && dist < inflation - EPS) {
                    grid.set((i, j), true);
                }
            }
        }
    }
    Ok(grid)
}
