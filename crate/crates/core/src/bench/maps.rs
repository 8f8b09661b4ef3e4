//! Synthetic ground-truth maps and map loading.

use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::Action;
use crate::error::{Error, Result};
use crate::grid::{read_pgm, CellIndex, CellState, GridGeometry, GroundTruthGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    /// Rectangular chambers joined by doors into a looped maze.
    Structured,
    /// Scattered circles and ellipses.
    Unstructured,
    /// A long corridor lined with cluttered rooms.
    Office,
}

impl MapKind {
    pub const ALL: [MapKind; 3] = [MapKind::Structured, MapKind::Unstructured, MapKind::Office];

    pub fn name(self) -> &'static str {
        match self {
            MapKind::Structured => "structured",
            MapKind::Unstructured => "unstructured",
            MapKind::Office => "office",
        }
    }

    /// A free start pose near the lower-left corner (mid-height for the
    /// office map, whose corridor runs through the middle).
    pub fn default_start(self, height_m: f64) -> Action {
        match self {
            MapKind::Structured | MapKind::Unstructured => Action::new(1.2, 1.2, 0.0),
            MapKind::Office => Action::new(1.2, office_corridor(height_m).0 + OFFICE_CORRIDOR_M / 2.0, 0.0),
        }
    }

    pub fn generate(self, width_m: f64, height_m: f64, resolution_m: f64, seed: u64) -> Result<GroundTruthGrid> {
        match self {
            MapKind::Structured => generate_structured_map(width_m, height_m, resolution_m, seed),
            MapKind::Unstructured => generate_unstructured_map(width_m, height_m, resolution_m, seed),
            MapKind::Office => generate_office_map(width_m, height_m, resolution_m, seed),
        }
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "structured" | "maze" => Ok(MapKind::Structured),
            "unstructured" | "blobs" => Ok(MapKind::Unstructured),
            "office" | "cluttered" => Ok(MapKind::Office),
            _ => Err(Error::InvalidArgument(format!("unknown map kind '{s}'"))),
        }
    }
}

fn blank(width_m: f64, height_m: f64, res: f64) -> Result<GroundTruthGrid> {
    if !(width_m > 0.0 && height_m > 0.0 && res > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "map {width_m} x {height_m} m at {res} m/cell"
        )));
    }
    let geo = GridGeometry::from_extent(width_m, height_m, res)?;
    if geo.width < 5 || geo.height < 5 {
        return Err(Error::InvalidArgument(format!(
            "map of {}x{} cells is too small",
            geo.width, geo.height
        )));
    }
    let mut t = GroundTruthGrid::new_free(geo);
    let (w, h) = (geo.width, geo.height);
    for c in 0..w {
        fill(&mut t, c, 0);
        fill(&mut t, c, h - 1);
    }
    for r in 0..h {
        fill(&mut t, 0, r);
        fill(&mut t, w - 1, r);
    }
    Ok(t)
}

fn fill(t: &mut GroundTruthGrid, col: usize, row: usize) {
    set(t, col, row, CellState::Occupied);
}

fn set(t: &mut GroundTruthGrid, col: usize, row: usize, s: CellState) {
    // callers stay in bounds
    t.set(CellIndex::new(col, row), s).expect("cell inside map");
}

/// Seals free pockets that cannot be reached from `start`, so that the free
/// space is a single connected component.
fn seal_unreachable(t: &mut GroundTruthGrid, start: CellIndex) {
    let reach = t.reachable_free(start);
    for (i, &r) in reach.iter().enumerate() {
        let cell = t.geometry().cell_at(i);
        if !r && !t.is_occupied(cell) {
            t.set(cell, CellState::Occupied).expect("cell inside map");
        }
    }
}

/// Wall line positions splitting `cells` into `parts` chambers.
fn splits(cells: usize, parts: usize) -> Vec<usize> {
    (0..=parts)
        .map(|i| if i == parts { cells - 1 } else { i * (cells - 1) / parts })
        .collect()
}

/// Maze of rectangular chambers (about 5 m across) separated by one-cell
/// walls. A randomized spanning tree opens one door per tree edge, which
/// connects everything; a quarter of the remaining walls get a door as well,
/// creating loops.
pub fn generate_structured_map(width_m: f64, height_m: f64, resolution_m: f64, seed: u64) -> Result<GroundTruthGrid> {
    let mut t = blank(width_m, height_m, resolution_m)?;
    let geo = *t.geometry();
    let (w, h) = (geo.width, geo.height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let door = ((1.6 / resolution_m).round() as usize).max(2);
    let nx = ((width_m / 5.0).round() as usize).clamp(1, (w - 1) / (door + 3)).max(1);
    let ny = ((height_m / 5.0).round() as usize).clamp(1, (h - 1) / (door + 3)).max(1);
    let xs = splits(w, nx);
    let ys = splits(h, ny);

    for &x in &xs[1..nx] {
        for r in 0..h {
            fill(&mut t, x, r);
        }
    }
    for &y in &ys[1..ny] {
        for c in 0..w {
            fill(&mut t, c, y);
        }
    }

    // edges between chambers: (a, b, vertical_wall)
    let id = |i: usize, j: usize| j * nx + i;
    let mut edges = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if i + 1 < nx {
                edges.push((id(i, j), id(i + 1, j), true));
            }
            if j + 1 < ny {
                edges.push((id(i, j), id(i, j + 1), false));
            }
        }
    }
    edges.shuffle(&mut rng);

    // Kruskal with union-find gives a random spanning tree
    let mut parent: Vec<usize> = (0..nx * ny).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b, vertical) in &edges {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        let open = if ra != rb {
            parent[ra] = rb;
            true
        } else {
            rng.gen_bool(0.25)
        };
        if !open {
            continue;
        }
        let (i, j) = (a % nx, a / nx);
        if vertical {
            let x = xs[i + 1];
            let (lo, hi) = (ys[j] + 1, ys[j + 1]);
            let span = (hi - lo).saturating_sub(door);
            let start = lo + if span > 2 { rng.gen_range(1..span) } else { 0 };
            for r in start..(start + door).min(hi) {
                set(&mut t, x, r, CellState::Free);
            }
        } else {
            let y = ys[j + 1];
            let (lo, hi) = (xs[i] + 1, xs[i + 1]);
            let span = (hi - lo).saturating_sub(door);
            let start = lo + if span > 2 { rng.gen_range(1..span) } else { 0 };
            for c in start..(start + door).min(hi) {
                set(&mut t, c, y, CellState::Free);
            }
        }
    }

    let start = MapKind::Structured.default_start(height_m);
    if let Some(cell) = geo.world_to_cell(start.x_m, start.y_m) {
        seal_unreachable(&mut t, cell);
    }
    Ok(t)
}

/// Circle or ellipse with semi-axes `a`, `b` rotated by `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.cx, y - self.cy);
        let (s, c) = self.theta.sin_cos();
        let u = (dx * c + dy * s) / self.a;
        let v = (-dx * s + dy * c) / self.b;
        u * u + v * v <= 1.0
    }

    fn bounding_radius(&self) -> f64 {
        self.a.max(self.b)
    }
}

/// Obstacles of the unstructured map, in placement order.
pub fn unstructured_obstacles(width_m: f64, height_m: f64, seed: u64) -> Vec<Ellipse> {
    const CLEARANCE_M: f64 = 1.0;
    const WALL_CLEARANCE_M: f64 = 0.8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = MapKind::Unstructured.default_start(height_m);
    let target_area = 0.17 * width_m * height_m;
    let mut area = 0.0;
    let mut out: Vec<Ellipse> = Vec::new();
    for _ in 0..4000 {
        if area >= target_area {
            break;
        }
        let e = if rng.gen_bool(0.4) {
            let r = rng.gen_range(0.4..1.2);
            Ellipse { cx: 0.0, cy: 0.0, a: r, b: r, theta: 0.0 }
        } else {
            let a = rng.gen_range(0.7..1.8);
            Ellipse {
                cx: 0.0,
                cy: 0.0,
                a,
                b: a * rng.gen_range(0.35..0.65),
                theta: rng.gen_range(0.0..PI),
            }
        };
        let r = e.bounding_radius();
        let margin = r + WALL_CLEARANCE_M;
        if 2.0 * margin >= width_m || 2.0 * margin >= height_m {
            continue;
        }
        let e = Ellipse {
            cx: rng.gen_range(margin..width_m - margin),
            cy: rng.gen_range(margin..height_m - margin),
            ..e
        };
        let near_start = (e.cx - start.x_m).hypot(e.cy - start.y_m) < r + CLEARANCE_M;
        let overlaps = out
            .iter()
            .any(|o| (e.cx - o.cx).hypot(e.cy - o.cy) < r + o.bounding_radius() + CLEARANCE_M);
        if near_start || overlaps {
            continue;
        }
        area += PI * e.a * e.b;
        out.push(e);
    }
    out
}

/// Boundary walls plus disjoint circles/ellipses covering roughly 17% of the
/// area. Blobs that would come within 1 m of another blob are resampled, so
/// the free space stays connected. A cell is occupied when its center lies
/// inside an obstacle.
pub fn generate_unstructured_map(width_m: f64, height_m: f64, resolution_m: f64, seed: u64) -> Result<GroundTruthGrid> {
    let mut t = blank(width_m, height_m, resolution_m)?;
    let geo = *t.geometry();
    let obstacles = unstructured_obstacles(width_m, height_m, seed);
    for i in 0..geo.len() {
        let cell = geo.cell_at(i);
        let (x, y) = geo.cell_center(cell);
        if obstacles.iter().any(|e| e.contains(x, y)) {
            t.set(cell, CellState::Occupied)?;
        }
    }
    // rejection rule: never below half free
    if (t.free_count() as f64) < 0.5 * geo.len() as f64 {
        return Err(Error::Numerical("unstructured map ended up less than half free".into()));
    }
    Ok(t)
}

const OFFICE_CORRIDOR_M: f64 = 1.6;

/// Bottom and top y of the central corridor.
fn office_corridor(height_m: f64) -> (f64, f64) {
    let lo = (height_m - OFFICE_CORRIDOR_M) / 2.0;
    (lo, lo + OFFICE_CORRIDOR_M)
}

/// Long narrow central corridor with rooms of random width on both sides,
/// each with one door onto the corridor and a few box-shaped clutter items.
pub fn generate_office_map(width_m: f64, height_m: f64, resolution_m: f64, seed: u64) -> Result<GroundTruthGrid> {
    let mut t = blank(width_m, height_m, resolution_m)?;
    let geo = *t.geometry();
    let (w, h) = (geo.width, geo.height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = |m: f64| (m / resolution_m).round() as usize;

    let (lo_m, hi_m) = office_corridor(height_m);
    let (lo, hi) = (cells(lo_m).max(2), cells(hi_m).min(h - 3));
    // corridor walls at rows lo-1 and hi
    let wall_rows = [lo - 1, hi];
    for &r in &wall_rows {
        for c in 0..w {
            fill(&mut t, c, r);
        }
    }

    let door = cells(1.0).max(2);
    let min_room = cells(3.0).max(door + 4);
    for (side, &wall_row) in wall_rows.iter().enumerate() {
        // partitions along x
        let mut xs = vec![0];
        let mut x = 0;
        loop {
            let step = cells(rng.gen_range(3.5..6.0)).max(min_room);
            if x + step + min_room >= w - 1 {
                break;
            }
            x += step;
            xs.push(x);
        }
        xs.push(w - 1);
        let (r0, r1) = if side == 0 { (1, lo - 1) } else { (hi + 1, h - 1) };
        for pair in xs.windows(2) {
            let (x0, x1) = (pair[0], pair[1]);
            if x0 > 0 {
                for r in r0..r1 {
                    fill(&mut t, x0, r);
                }
            }
            let span = x1 - x0 - 1;
            if span <= door + 2 {
                continue;
            }
            let d0 = x0 + 1 + rng.gen_range(1..span - door);
            for c in d0..d0 + door {
                set(&mut t, c, wall_row, CellState::Free);
            }
            // clutter: boxes kept 0.6 m from walls and out of the doorway column
            let keep = cells(0.6).max(2);
            for _ in 0..rng.gen_range(1..=3) {
                let bw = cells(rng.gen_range(0.4..1.0)).max(1);
                let bh = cells(rng.gen_range(0.4..1.0)).max(1);
                if x0 + keep + bw + keep >= x1 || r0 + keep + bh + keep >= r1 {
                    continue;
                }
                let bx = rng.gen_range(x0 + keep..x1 - keep - bw);
                let by = rng.gen_range(r0 + keep..r1 - keep - bh);
                if bx + bw + keep > d0 && bx < d0 + door + keep {
                    continue;
                }
                for c in bx..bx + bw {
                    for r in by..by + bh {
                        fill(&mut t, c, r);
                    }
                }
            }
        }
    }

    let start = MapKind::Office.default_start(height_m);
    if let Some(cell) = geo.world_to_cell(start.x_m, start.y_m) {
        seal_unreachable(&mut t, cell);
    }
    Ok(t)
}

/// Loads a PGM map; its own dimensions are authoritative.
pub fn load_map(path: impl AsRef<Path>, resolution_m: f64) -> Result<GroundTruthGrid> {
    read_pgm(path, resolution_m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boundary_occupied(t: &GroundTruthGrid) -> bool {
        let (w, h) = (t.width(), t.height());
        (0..w).all(|c| t.is_occupied(CellIndex::new(c, 0)) && t.is_occupied(CellIndex::new(c, h - 1)))
            && (0..h).all(|r| t.is_occupied(CellIndex::new(0, r)) && t.is_occupied(CellIndex::new(w - 1, r)))
    }

    /// Independent BFS over 8-neighbours that only moves between free cells.
    fn connected_oracle(t: &GroundTruthGrid) -> bool {
        let geo = *t.geometry();
        let free: Vec<usize> = (0..geo.len()).filter(|&i| !t.is_occupied(geo.cell_at(i))).collect();
        let Some(&first) = free.first() else { return true };
        let mut seen = vec![false; geo.len()];
        let mut queue = std::collections::VecDeque::from([first]);
        seen[first] = true;
        let mut count = 0;
        while let Some(i) = queue.pop_front() {
            count += 1;
            let (c, r) = ((i % geo.width) as i64, (i / geo.width) as i64);
            for dc in -1..=1 {
                for dr in -1..=1 {
                    let (nc, nr) = (c + dc, r + dr);
                    if nc < 0 || nr < 0 || nc >= geo.width as i64 || nr >= geo.height as i64 {
                        continue;
                    }
                    let j = nr as usize * geo.width + nc as usize;
                    if !seen[j] && !t.is_occupied(geo.cell_at(j)) {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        count == free.len()
    }

    #[test]
    fn structured_dimensions_and_walls() {
        let t = generate_structured_map(24.0, 14.0, 0.2, 3).unwrap();
        assert_eq!((t.width(), t.height()), (120, 70));
        assert!(boundary_occupied(&t));
        assert!(connected_oracle(&t));
        assert!(t.is_free_at(1.2, 1.2));
        assert_eq!(t, generate_structured_map(24.0, 14.0, 0.2, 3).unwrap());
        assert_ne!(t, generate_structured_map(24.0, 14.0, 0.2, 4).unwrap());
    }

    #[test]
    fn structured_connected_across_seeds() {
        for seed in 0..20 {
            let t = generate_structured_map(24.0, 14.0, 0.2, seed).unwrap();
            assert!(connected_oracle(&t), "seed {seed}");
            assert!(t.free_count() as f64 > 0.8 * (120.0 * 70.0));
        }
    }

    #[test]
    fn unstructured_rasterization_matches_obstacles() {
        let (w, h) = (24.0, 14.0);
        let t = generate_unstructured_map(w, h, 0.2, 9).unwrap();
        let obs = unstructured_obstacles(w, h, 9);
        assert!(!obs.is_empty());
        let geo = *t.geometry();
        for i in 0..geo.len() {
            let cell = geo.cell_at(i);
            let (c, r) = (cell.col, cell.row);
            let border = c == 0 || r == 0 || c == geo.width - 1 || r == geo.height - 1;
            let (x, y) = (0.2 * (c as f64 + 0.5), 0.2 * (r as f64 + 0.5));
            let inside = obs.iter().any(|e| {
                let (dx, dy) = (x - e.cx, y - e.cy);
                let u = dx * e.theta.cos() + dy * e.theta.sin();
                let v = -dx * e.theta.sin() + dy * e.theta.cos();
                (u / e.a).powi(2) + (v / e.b).powi(2) <= 1.0
            });
            assert_eq!(t.is_occupied(cell), border || inside, "cell {c},{r}");
        }
        assert!(boundary_occupied(&t));
        assert!(connected_oracle(&t));
        assert!(t.free_count() as f64 >= 0.5 * geo.len() as f64);
        assert_eq!(t, generate_unstructured_map(w, h, 0.2, 9).unwrap());
    }

    #[test]
    fn unstructured_connected_across_seeds() {
        for seed in 0..20 {
            let t = generate_unstructured_map(24.0, 14.0, 0.2, seed).unwrap();
            assert!(connected_oracle(&t), "seed {seed}");
            assert!(t.is_free_at(1.2, 1.2));
        }
    }

    #[test]
    fn office_map_is_connected() {
        for seed in 0..20 {
            let t = generate_office_map(24.0, 14.0, 0.2, seed).unwrap();
            assert!(boundary_occupied(&t));
            assert!(connected_oracle(&t), "seed {seed}");
            let s = MapKind::Office.default_start(14.0);
            assert!(t.is_free_at(s.x_m, s.y_m));
            assert!(t.free_count() > t.geometry().len() / 2);
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(generate_structured_map(0.0, 14.0, 0.2, 0).is_err());
        assert!(generate_unstructured_map(24.0, 14.0, -1.0, 0).is_err());
        assert!(generate_office_map(0.5, 0.5, 0.2, 0).is_err());
    }

    #[test]
    fn kind_parsing() {
        for k in MapKind::ALL {
            assert_eq!(k.name().parse::<MapKind>().unwrap(), k);
        }
        assert!("forest".parse::<MapKind>().is_err());
    }
}
