//! Occupancy grids: the log-odds belief map the robot builds and the binary
//! ground truth it is simulated against.
//!
//! Cells are addressed by `(col, row)` with `col` along world x and `row`
//! along world y. Cell `(c, r)` spans `[c·res, (c+1)·res) × [r·res, (r+1)·res)`
//! relative to the grid origin; points exactly on the max edge map inward.

mod pgm;
mod raycast;

pub use pgm::{parse_pgm, read_pgm, write_belief_pgm, write_pgm};
pub use raycast::{raycast, CellRay, RayTarget};

use crate::error::{Error, Result};

/// Default log-odds clamp.
pub const DEFAULT_LOG_ODDS_CLAMP: f64 = 6.0;

/// Default known-cell threshold on `|p - 0.5|` for [`OccupancyGrid::coverage`].
pub const DEFAULT_KNOWN_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub col: usize,
    pub row: usize,
}

impl CellIndex {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

impl From<(usize, usize)> for CellIndex {
    fn from((col, row): (usize, usize)) -> Self {
        Self { col, row }
    }
}

/// Lattice dimensions and placement shared by belief and ground-truth grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub width: usize,
    pub height: usize,
    pub resolution_m: f64,
    pub origin_m: [f64; 2],
}

impl GridGeometry {
    /// Geometry covering `width_m × height_m`, rounding partial cells up.
    pub fn from_extent(width_m: f64, height_m: f64, resolution_m: f64) -> Result<Self> {
        if !(width_m > 0.0 && height_m > 0.0 && resolution_m > 0.0)
            || !(width_m.is_finite() && height_m.is_finite() && resolution_m.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "grid extent {width_m} x {height_m} at resolution {resolution_m} must be positive"
            )));
        }
        Ok(Self {
            width: cells_for(width_m, resolution_m),
            height: cells_for(height_m, resolution_m),
            resolution_m,
            origin_m: [0.0, 0.0],
        })
    }

    pub fn from_cells(width: usize, height: usize, resolution_m: f64) -> Result<Self> {
        if width == 0 || height == 0 || !(resolution_m > 0.0 && resolution_m.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid of {width} x {height} cells at resolution {resolution_m}"
            )));
        }
        Ok(Self {
            width,
            height,
            resolution_m,
            origin_m: [0.0, 0.0],
        })
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width_m(&self) -> f64 {
        self.width as f64 * self.resolution_m
    }

    pub fn height_m(&self) -> f64 {
        self.height as f64 * self.resolution_m
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        cell.col < self.width && cell.row < self.height
    }

    pub fn index(&self, cell: CellIndex) -> usize {
        cell.row * self.width + cell.col
    }

    pub fn cell_at(&self, index: usize) -> CellIndex {
        CellIndex::new(index % self.width, index / self.width)
    }

    pub fn check(&self, cell: CellIndex) -> Result<usize> {
        if self.contains(cell) {
            Ok(self.index(cell))
        } else {
            Err(Error::OutOfBounds {
                cell,
                width: self.width,
                height: self.height,
            })
        }
    }

    /// Maps a world point to its cell, or `None` outside the grid.
    pub fn world_to_cell(&self, x_m: f64, y_m: f64) -> Option<CellIndex> {
        let col = axis_to_cell(x_m - self.origin_m[0], self.resolution_m, self.width)?;
        let row = axis_to_cell(y_m - self.origin_m[1], self.resolution_m, self.height)?;
        Some(CellIndex::new(col, row))
    }

    pub fn cell_center(&self, cell: CellIndex) -> (f64, f64) {
        (
            self.origin_m[0] + (cell.col as f64 + 0.5) * self.resolution_m,
            self.origin_m[1] + (cell.row as f64 + 0.5) * self.resolution_m,
        )
    }

    pub fn same_shape(&self, other: &GridGeometry) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// The up-to-eight in-bounds neighbours of `cell`.
    pub fn neighbors8(&self, cell: CellIndex) -> impl Iterator<Item = CellIndex> + '_ {
        const OFFSETS: [(isize, isize); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ];
        OFFSETS.iter().filter_map(move |&(dc, dr)| {
            let col = cell.col.checked_add_signed(dc)?;
            let row = cell.row.checked_add_signed(dr)?;
            let n = CellIndex::new(col, row);
            self.contains(n).then_some(n)
        })
    }
}

fn cells_for(extent_m: f64, resolution_m: f64) -> usize {
    let ratio = extent_m / resolution_m;
    // 24.0 / 0.2 is 119.99999999999999 in binary floating point
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

fn axis_to_cell(offset_m: f64, resolution_m: f64, count: usize) -> Option<usize> {
    if !(offset_m >= 0.0) {
        return None;
    }
    let max_edge = count as f64 * resolution_m;
    if offset_m > max_edge {
        return None;
    }
    let idx = (offset_m / resolution_m).floor() as usize;
    Some(idx.min(count - 1))
}

/// Log-odds increments applied per observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseSensorModel {
    pub l_occ: f64,
    pub l_free: f64,
}

impl Default for InverseSensorModel {
    fn default() -> Self {
        Self {
            l_occ: 0.85,
            l_free: -0.4,
        }
    }
}

/// Logistic map from log-odds to occupancy probability.
pub fn probability(log_odds: f64) -> f64 {
    1.0 / (1.0 + (-log_odds).exp())
}

/// Binary Shannon entropy in bits; 0 at the certain endpoints.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Log-odds belief map.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    geometry: GridGeometry,
    log_odds: Vec<f64>,
    clamp: f64,
}

impl OccupancyGrid {
    /// Uniform (p = 0.5) grid covering `width_m × height_m`.
    pub fn new(width_m: f64, height_m: f64, resolution_m: f64) -> Result<Self> {
        Ok(Self::with_geometry(GridGeometry::from_extent(
            width_m,
            height_m,
            resolution_m,
        )?))
    }

    pub fn with_geometry(geometry: GridGeometry) -> Self {
        Self {
            log_odds: vec![0.0; geometry.len()],
            geometry,
            clamp: DEFAULT_LOG_ODDS_CLAMP,
        }
    }

    pub fn with_clamp(mut self, clamp: f64) -> Result<Self> {
        if !(clamp > 0.0 && clamp.is_finite()) {
            return Err(Error::InvalidArgument(format!("log-odds clamp {clamp}")));
        }
        self.clamp = clamp;
        for l in &mut self.log_odds {
            *l = l.clamp(-clamp, clamp);
        }
        Ok(self)
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn width(&self) -> usize {
        self.geometry.width
    }

    pub fn height(&self) -> usize {
        self.geometry.height
    }

    pub fn resolution(&self) -> f64 {
        self.geometry.resolution_m
    }

    pub fn clamp(&self) -> f64 {
        self.clamp
    }

    pub fn log_odds(&self, cell: CellIndex) -> Result<f64> {
        Ok(self.log_odds[self.geometry.check(cell)?])
    }

    pub fn log_odds_slice(&self) -> &[f64] {
        &self.log_odds
    }

    /// Overwrites a cell's log-odds (clamped). Mostly for tests and scenario setup.
    pub fn set_log_odds(&mut self, cell: CellIndex, value: f64) -> Result<()> {
        let i = self.geometry.check(cell)?;
        self.log_odds[i] = value.clamp(-self.clamp, self.clamp);
        Ok(())
    }

    pub fn probability(&self, cell: CellIndex) -> Result<f64> {
        self.log_odds(cell).map(probability)
    }

    pub(crate) fn probability_at(&self, index: usize) -> f64 {
        probability(self.log_odds[index])
    }

    /// Adds the observation's log-odds increment, saturating at the clamp.
    pub fn update_cell(
        &mut self,
        cell: CellIndex,
        observed_occupied: bool,
        model: &InverseSensorModel,
    ) -> Result<()> {
        let i = self.geometry.check(cell)?;
        self.update_index(i, observed_occupied, model);
        Ok(())
    }

    pub(crate) fn update_index(&mut self, i: usize, occupied: bool, model: &InverseSensorModel) {
        let delta = if occupied { model.l_occ } else { model.l_free };
        self.log_odds[i] = (self.log_odds[i] + delta).clamp(-self.clamp, self.clamp);
    }

    fn is_saturated(&self, l: f64) -> bool {
        l.abs() >= self.clamp
    }

    pub(crate) fn entropy_at(&self, index: usize) -> f64 {
        let l = self.log_odds[index];
        if self.is_saturated(l) {
            0.0
        } else {
            binary_entropy(probability(l))
        }
    }

    /// Cell entropy in bits. Cells saturated at the clamp count as certain.
    pub fn cell_entropy(&self, cell: CellIndex) -> Result<f64> {
        Ok(self.entropy_at(self.geometry.check(cell)?))
    }

    /// Sum of cell entropies, in row-major order.
    pub fn map_entropy(&self) -> f64 {
        (0..self.log_odds.len()).map(|i| self.entropy_at(i)).sum()
    }

    /// Fraction of cells whose belief satisfies `|p - 0.5| >= known_threshold`.
    pub fn coverage(&self, truth: &GroundTruthGrid, known_threshold: f64) -> Result<f64> {
        if !self.geometry.same_shape(truth.geometry()) {
            return Err(Error::InvalidArgument(format!(
                "belief grid {}x{} does not match ground truth {}x{}",
                self.width(),
                self.height(),
                truth.width(),
                truth.height()
            )));
        }
        if !(known_threshold > 0.0 && known_threshold < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "known threshold {known_threshold} outside (0, 0.5)"
            )));
        }
        let known = self
            .log_odds
            .iter()
            .filter(|&&l| (probability(l) - 0.5).abs() >= known_threshold)
            .count();
        Ok(known as f64 / self.log_odds.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    Free,
    Occupied,
}

/// Binary simulation map the sensor observes.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthGrid {
    geometry: GridGeometry,
    cells: Vec<CellState>,
}

impl GroundTruthGrid {
    pub fn new_free(geometry: GridGeometry) -> Self {
        Self {
            cells: vec![CellState::Free; geometry.len()],
            geometry,
        }
    }

    pub fn from_states(geometry: GridGeometry, cells: Vec<CellState>) -> Result<Self> {
        if cells.len() != geometry.len() {
            return Err(Error::InvalidArgument(format!(
                "{} cell states for a {}x{} grid",
                cells.len(),
                geometry.width,
                geometry.height
            )));
        }
        Ok(Self { geometry, cells })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn width(&self) -> usize {
        self.geometry.width
    }

    pub fn height(&self) -> usize {
        self.geometry.height
    }

    pub fn resolution(&self) -> f64 {
        self.geometry.resolution_m
    }

    pub fn state(&self, cell: CellIndex) -> Result<CellState> {
        Ok(self.cells[self.geometry.check(cell)?])
    }

    pub fn is_occupied(&self, cell: CellIndex) -> bool {
        self.geometry.contains(cell) && self.cells[self.geometry.index(cell)] == CellState::Occupied
    }

    pub fn set(&mut self, cell: CellIndex, state: CellState) -> Result<()> {
        let i = self.geometry.check(cell)?;
        self.cells[i] = state;
        Ok(())
    }

    pub fn states(&self) -> &[CellState] {
        &self.cells
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|&&s| s == CellState::Free).count()
    }

    /// `true` when `(x, y)` lies in the grid on a FREE cell.
    pub fn is_free_at(&self, x_m: f64, y_m: f64) -> bool {
        self.geometry
            .world_to_cell(x_m, y_m)
            .is_some_and(|c| !self.is_occupied(c))
    }

    /// Blank belief grid matching this map's lattice.
    pub fn blank_belief(&self) -> OccupancyGrid {
        OccupancyGrid::with_geometry(self.geometry)
    }

    /// FREE cells reachable from `start` through 8-connected FREE cells.
    pub fn reachable_free(&self, start: CellIndex) -> Vec<bool> {
        let mut seen = vec![false; self.cells.len()];
        if self.is_occupied(start) || !self.geometry.contains(start) {
            return seen;
        }
        let mut stack = vec![start];
        seen[self.geometry.index(start)] = true;
        while let Some(c) = stack.pop() {
            for n in self.geometry.neighbors8(c) {
                let i = self.geometry.index(n);
                if !seen[i] && self.cells[i] == CellState::Free {
                    seen[i] = true;
                    stack.push(n);
                }
            }
        }
        seen
    }

    /// `true` when every FREE cell is reachable from every other.
    pub fn free_space_connected(&self) -> bool {
        let Some(first) = self.cells.iter().position(|&s| s == CellState::Free) else {
            return true;
        };
        let reach = self.reachable_free(self.geometry.cell_at(first));
        self.cells
            .iter()
            .zip(&reach)
            .all(|(&s, &r)| s == CellState::Occupied || r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: f64, h: f64, res: f64) -> OccupancyGrid {
        OccupancyGrid::new(w, h, res).unwrap()
    }

    #[test]
    fn new_grid_dimensions() {
        let g = grid(24.0, 14.0, 0.2);
        assert_eq!((g.width(), g.height()), (120, 70));
        assert!(g.log_odds_slice().iter().all(|&l| l == 0.0));

        let g = grid(1.0, 1.0, 1.0);
        assert_eq!((g.width(), g.height()), (1, 1));
        assert_eq!(g.probability(CellIndex::new(0, 0)).unwrap(), 0.5);

        let g = grid(1.1, 1.0, 0.5);
        assert_eq!((g.width(), g.height()), (3, 2));
    }

    #[test]
    fn new_grid_rejects_non_positive() {
        assert!(matches!(OccupancyGrid::new(0.0, 1.0, 0.1), Err(Error::InvalidArgument(_))));
        assert!(matches!(OccupancyGrid::new(1.0, -1.0, 0.1), Err(Error::InvalidArgument(_))));
        assert!(matches!(OccupancyGrid::new(1.0, 1.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(OccupancyGrid::new(f64::NAN, 1.0, 0.1).is_err());
    }

    #[test]
    fn update_cell_examples() {
        let model = InverseSensorModel::default();
        let mut g = grid(2.0, 2.0, 1.0);
        let c = CellIndex::new(0, 0);
        g.update_cell(c, true, &model).unwrap();
        assert!((g.log_odds(c).unwrap() - 0.85).abs() < 1e-15);

        g.set_log_odds(c, 6.0).unwrap();
        g.update_cell(c, true, &model).unwrap();
        assert_eq!(g.log_odds(c).unwrap(), 6.0);

        let f = CellIndex::new(1, 1);
        g.update_cell(f, false, &model).unwrap();
        assert!((g.log_odds(f).unwrap() + 0.4).abs() < 1e-15);
        // 1 / (1 + e^0.4)
        assert!((g.probability(f).unwrap() - 0.401_312_339_887_548).abs() < 1e-12);

        let err = g.update_cell(CellIndex::new(2, 0), true, &model);
        assert!(matches!(err, Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn two_hits_add_before_clamp() {
        let model = InverseSensorModel::default();
        let mut g = grid(1.0, 1.0, 1.0);
        let c = CellIndex::new(0, 0);
        g.update_cell(c, true, &model).unwrap();
        g.update_cell(c, true, &model).unwrap();
        assert!((g.log_odds(c).unwrap() - 1.7).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!(binary_entropy(1.0 - 1e-15) < 1e-12);
        // -0.3 log2 0.3 - 0.7 log2 0.7
        assert!((binary_entropy(0.3) - 0.881_290_899_230_692_7).abs() < 1e-12);

        let mut g = grid(24.0, 14.0, 0.2);
        assert_eq!(g.map_entropy(), 8400.0);
        for i in 0..g.geometry().len() {
            let c = g.geometry().cell_at(i);
            g.set_log_odds(c, if i % 2 == 0 { 6.0 } else { -6.0 }).unwrap();
        }
        assert_eq!(g.map_entropy(), 0.0);
        assert!(g.cell_entropy(CellIndex::new(120, 0)).is_err());
    }

    #[test]
    fn mixed_grid_entropy_is_sum_of_cells() {
        let mut g = grid(3.0, 2.0, 1.0);
        let values = [0.0, 0.85, -0.4, 1.7, -6.0, 2.3];
        for (i, v) in values.iter().enumerate() {
            g.set_log_odds(g.geometry().cell_at(i), *v).unwrap();
        }
        let expected: f64 = values
            .iter()
            .map(|&l| {
                if l.abs() >= 6.0 {
                    0.0
                } else {
                    let p = 1.0 / (1.0 + (-l as f64).exp());
                    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
                }
            })
            .sum();
        assert!((g.map_entropy() - expected).abs() < 1e-12);
    }

    #[test]
    fn coverage_examples() {
        let truth = GroundTruthGrid::new_free(GridGeometry::from_cells(4, 2, 1.0).unwrap());
        let mut g = truth.blank_belief();
        assert_eq!(g.coverage(&truth, 0.25).unwrap(), 0.0);

        // p = 0.9 on half the cells
        let l9 = (0.9f64 / 0.1).ln();
        for col in 0..4 {
            g.set_log_odds(CellIndex::new(col, 0), l9).unwrap();
        }
        assert!((g.coverage(&truth, 0.25).unwrap() - 0.5).abs() < 1e-15);

        for i in 0..8 {
            g.set_log_odds(g.geometry().cell_at(i), -6.0).unwrap();
        }
        assert_eq!(g.coverage(&truth, 0.25).unwrap(), 1.0);

        let other = GroundTruthGrid::new_free(GridGeometry::from_cells(3, 2, 1.0).unwrap());
        assert!(matches!(g.coverage(&other, 0.25), Err(Error::InvalidArgument(_))));
        assert!(g.coverage(&truth, 0.5).is_err());
    }

    #[test]
    fn world_to_cell_edges() {
        let geo = GridGeometry::from_cells(3, 2, 0.5).unwrap();
        assert_eq!(geo.world_to_cell(0.0, 0.0), Some(CellIndex::new(0, 0)));
        assert_eq!(geo.world_to_cell(0.5, 0.49), Some(CellIndex::new(1, 0)));
        assert_eq!(geo.world_to_cell(1.5, 1.0), Some(CellIndex::new(2, 1)));
        assert_eq!(geo.world_to_cell(1.5001, 0.2), None);
        assert_eq!(geo.world_to_cell(-0.0001, 0.2), None);
    }

    #[test]
    fn flood_fill_connectivity() {
        let geo = GridGeometry::from_cells(5, 3, 1.0).unwrap();
        let mut t = GroundTruthGrid::new_free(geo);
        assert!(t.free_space_connected());
        for row in 0..3 {
            t.set(CellIndex::new(2, row), CellState::Occupied).unwrap();
        }
        assert!(!t.free_space_connected());
        t.set(CellIndex::new(2, 1), CellState::Free).unwrap();
        assert!(t.free_space_connected());
    }
}
