use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::Point;
use crate::grid::{Cell, OccupancyGrid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("({}, {}) is outside the grid", .0.x, .0.y)]
    OutOfBounds(Point),
    #[error("({}, {}) lies in an occupied cell", .0.x, .0.y)]
    BlockedEndpoint(Point),
    #[error("no collision-free path")]
    NoPath,
}

/// Path length in cells, `straight + diagonal·√2`, kept as integer counts
/// so comparisons are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct PathCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl PathCost {
    pub const fn new(straight: u32, diagonal: u32) -> Self {
        Self { straight, diagonal }
    }

    pub fn cells(self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }

    pub fn meters(self, resolution: f64) -> f64 {
        self.cells() * resolution
    }

    fn plus(self, o: PathCost) -> PathCost {
        PathCost::new(self.straight + o.straight, self.diagonal + o.diagonal)
    }

    /// Octile distance between two cells.
    pub fn octile(a: Cell, b: Cell) -> PathCost {
        let dx = a.0.abs_diff(b.0) as u32;
        let dy = a.1.abs_diff(b.1) as u32;
        PathCost::new(dx.max(dy) - dx.min(dy), dx.min(dy))
    }
}

impl Ord for PathCost {
    fn cmp(&self, o: &Self) -> Ordering {
        // sign of da + db·√2
        let da = self.straight as i64 - o.straight as i64;
        let db = self.diagonal as i64 - o.diagonal as i64;
        match (da.signum(), db.signum()) {
            (a, b) if a >= 0 && b >= 0 => (a + b).cmp(&0),
            (a, b) if a <= 0 && b <= 0 => 0.cmp(&-(a + b)),
            (1, _) => (da * da).cmp(&(2 * db * db)),
            _ => (2 * db * db).cmp(&(da * da)),
        }
    }
}

impl PartialOrd for PathCost {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub cells: Vec<Cell>,
    /// Start, interior cell centers, goal.
    pub waypoints: Vec<Point>,
    pub cost: PathCost,
}

impl Path {
    /// Waypoints with collinear interior points removed.
    pub fn simplified(&self) -> Vec<Point> {
        let n = self.cells.len();
        if n <= 2 {
            return self.waypoints.clone();
        }
        let dir = |a: Cell, b: Cell| (b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64);
        let mut out = vec![self.waypoints[0]];
        for k in 1..n - 1 {
            if dir(self.cells[k - 1], self.cells[k]) != dir(self.cells[k], self.cells[k + 1]) {
                out.push(self.waypoints[k]);
            }
        }
        out.push(self.waypoints[n - 1]);
        out
    }
}

const MOVES: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Free 8-neighbours of `c` with their step cost. A diagonal step needs
/// both orthogonal cells it passes between to be free.
pub fn neighbours(grid: &OccupancyGrid, c: Cell) -> impl Iterator<Item = (Cell, PathCost)> + '_ {
    let (w, h) = (grid.width() as i64, grid.height() as i64);
    let free = move |x: i64, y: i64| {
        x >= 0 && y >= 0 && x < w && y < h && !grid.is_occupied((x as usize, y as usize))
    };
    let (x, y) = (c.0 as i64, c.1 as i64);
    MOVES.iter().filter_map(move |&(dx, dy)| {
        let (nx, ny) = (x + dx, y + dy);
        if !free(nx, ny) {
            return None;
        }
        if dx != 0 && dy != 0 {
            (free(x + dx, y) && free(x, y + dy)).then_some(((nx as usize, ny as usize), PathCost::new(0, 1)))
        } else {
            Some(((nx as usize, ny as usize), PathCost::new(1, 0)))
        }
    })
}

/// A* over free cells. Ties on f are broken by smaller h, then by cell
/// index, so results are deterministic.
pub fn plan_cells(grid: &OccupancyGrid, start: Cell, goal: Cell) -> Result<(Vec<Cell>, PathCost), PlanError> {
    for c in [start, goal] {
        if !grid.contains_cell(c) {
            return Err(PlanError::OutOfBounds(grid.center(c)));
        }
        if grid.is_occupied(c) {
            return Err(PlanError::BlockedEndpoint(grid.center(c)));
        }
    }
    let n = grid.width() * grid.height();
    let mut g: Vec<Option<PathCost>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let (si, gi) = (grid.index(start), grid.index(goal));
    g[si] = Some(PathCost::default());
    let h0 = PathCost::octile(start, goal);
    open.push(Reverse((h0, h0, si)));
    while let Some(Reverse((_, _, i))) = open.pop() {
        if closed[i] {
            continue;
        }
        closed[i] = true;
        if i == gi {
            break;
        }
        let gc = g[i].expect("open cells have a cost");
        for (nc, step) in neighbours(grid, grid.cell_at(i)) {
            let ni = grid.index(nc);
            if closed[ni] {
                continue;
            }
            let cand = gc.plus(step);
            if g[ni].is_none_or(|old| cand < old) {
                g[ni] = Some(cand);
                parent[ni] = i;
                let h = PathCost::octile(nc, goal);
                open.push(Reverse((cand.plus(h), h, ni)));
            }
        }
    }
    let cost = g[gi].ok_or(PlanError::NoPath)?;
    let mut cells = vec![goal];
    let mut i = gi;
    while i != si {
        i = parent[i];
        cells.push(grid.cell_at(i));
    }
    cells.reverse();
    Ok((cells, cost))
}

/// Shortest 8-connected path between two points; the first and last
/// waypoints are the exact endpoints.
pub fn plan_path(grid: &OccupancyGrid, start: Point, goal: Point) -> Result<Path, PlanError> {
    let locate = |p: Point| {
        let c = grid.cell_of(p).ok_or(PlanError::OutOfBounds(p))?;
        if grid.is_occupied(c) {
            Err(PlanError::BlockedEndpoint(p))
        } else {
            Ok(c)
        }
    };
    let (s, g) = (locate(start)?, locate(goal)?);
    let (cells, cost) = plan_cells(grid, s, g)?;
    let mut waypoints: Vec<Point> = cells.iter().map(|&c| grid.center(c)).collect();
    if cells.len() == 1 {
        waypoints = vec![start, goal];
    } else {
        let last = waypoints.len() - 1;
        waypoints[0] = start;
        waypoints[last] = goal;
    }
    Ok(Path { cells, waypoints, cost })
}
