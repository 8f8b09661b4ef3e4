use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use crate::action::Action;
use crate::error::{Error, Result};
use crate::grid::{CellIndex, OccupancyGrid};

/// Cost model for planning on the belief map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traversability {
    /// Cells with `p` above this are impassable.
    pub occupied_above: f64,
    /// Cells with `p` below this are known free; between the two is unknown.
    pub free_below: f64,
    /// Step-cost multiplier for entering an unknown cell.
    pub unknown_cost: f64,
}

impl Default for Traversability {
    fn default() -> Self {
        Self {
            occupied_above: 0.65,
            free_below: 0.35,
            unknown_cost: 2.0,
        }
    }
}

impl Traversability {
    fn cost_factor(&self, p: f64) -> Option<f64> {
        if p > self.occupied_above {
            None
        } else if p < self.free_below {
            Some(1.0)
        } else {
            Some(self.unknown_cost)
        }
    }
}

#[derive(Debug, PartialEq)]
struct Open {
    f: f64,
    index: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, then on index for deterministic expansion order
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A* with [`Traversability::default`].
pub fn astar(grid: &OccupancyGrid, start: &Action, goal: &Action) -> Result<Vec<CellIndex>> {
    astar_with(grid, start, goal, &Traversability::default())
}

/// 8-connected A* from the start cell to the goal cell. Steps cost their
/// Euclidean length times the entered cell's factor; diagonal moves may not
/// cut the corner of an impassable cell. The heuristic is straight-line
/// distance, admissible because every factor is at least 1.
pub fn astar_with(
    grid: &OccupancyGrid,
    start: &Action,
    goal: &Action,
    cost: &Traversability,
) -> Result<Vec<CellIndex>> {
    let geo = *grid.geometry();
    let locate = |a: &Action| {
        geo.world_to_cell(a.x_m, a.y_m).ok_or_else(|| {
            Error::InvalidArgument(format!("({}, {}) is outside the map", a.x_m, a.y_m))
        })
    };
    let from = locate(start)?;
    let to = locate(goal)?;
    let failure = Error::PlanningFailure { from, to };
    if cost.cost_factor(grid.probability_at(geo.index(to))).is_none() {
        return Err(failure);
    }

    let n = geo.len();
    let res = geo.resolution_m;
    let h = |c: CellIndex| {
        let dc = c.col as f64 - to.col as f64;
        let dr = c.row as f64 - to.row as f64;
        dc.hypot(dr) * res
    };
    let passable = |c: CellIndex| cost.cost_factor(grid.probability_at(geo.index(c)));

    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let s = geo.index(from);
    g[s] = 0.0;
    open.push(Open { f: h(from), index: s });

    while let Some(Open { index, .. }) = open.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        let cell = geo.cell_at(index);
        if cell == to {
            let mut path = vec![cell];
            let mut i = index;
            while parent[i] != usize::MAX {
                i = parent[i];
                path.push(geo.cell_at(i));
            }
            path.reverse();
            return Ok(path);
        }
        for next in geo.neighbors8(cell) {
            let ni = geo.index(next);
            if closed[ni] {
                continue;
            }
            let Some(factor) = passable(next) else {
                continue;
            };
            let diagonal = next.col != cell.col && next.row != cell.row;
            if diagonal {
                let side_a = CellIndex::new(next.col, cell.row);
                let side_b = CellIndex::new(cell.col, next.row);
                if passable(side_a).is_none() || passable(side_b).is_none() {
                    continue;
                }
            }
            let step = if diagonal { SQRT_2 } else { 1.0 } * res * factor;
            let tentative = g[index] + step;
            if tentative < g[ni] {
                g[ni] = tentative;
                parent[ni] = index;
                open.push(Open {
                    f: tentative + h(next),
                    index: ni,
                });
            }
        }
    }
    Err(failure)
}

/// Cost of a cell path under `cost`, as A* accounts it.
pub fn path_cost(grid: &OccupancyGrid, path: &[CellIndex], cost: &Traversability) -> f64 {
    let res = grid.resolution();
    path.windows(2)
        .map(|w| {
            let diagonal = w[0].col != w[1].col && w[0].row != w[1].row;
            let factor = cost
                .cost_factor(grid.probability(w[1]).expect("path cell in bounds"))
                .unwrap_or(f64::INFINITY);
            (if diagonal { SQRT_2 } else { 1.0 }) * res * factor
        })
        .sum()
}
