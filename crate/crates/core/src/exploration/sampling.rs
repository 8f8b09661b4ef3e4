use std::f64::consts::PI;

use rand::Rng;

use crate::action::{wrap_angle, Action};
use crate::error::{Error, Result};
use crate::grid::OccupancyGrid;
use crate::sensor::SensorSpec;

/// Believed occupancy above which a sample is rejected.
pub const DEFAULT_MAX_SAMPLE_OCCUPANCY: f64 = 0.65;

/// Attempts allowed per requested sample before widening the sector, and
/// again before giving up.
const ATTEMPTS_PER_SAMPLE: usize = 100;

/// Candidate actions drawn uniformly (by area) from the sensor's FOV sector
/// around `pose`. See [`sample_actions_with`].
pub fn sample_actions<R: Rng + ?Sized>(
    grid: &OccupancyGrid,
    pose: &Action,
    count: usize,
    spec: &SensorSpec,
    rng: &mut R,
) -> Result<Vec<Action>> {
    sample_actions_with(grid, pose, count, spec, DEFAULT_MAX_SAMPLE_OCCUPANCY, rng)
}

/// Samples positions in the sector `r ∈ (0, max_range]`,
/// `bearing ∈ [ψ - fov, ψ + fov]`, rejecting points outside the grid or on
/// cells believed occupied. After `100·count` attempts the remaining samples
/// come from the full disc. Each action faces away from `pose`.
pub fn sample_actions_with<R: Rng + ?Sized>(
    grid: &OccupancyGrid,
    pose: &Action,
    count: usize,
    spec: &SensorSpec,
    max_occupancy: f64,
    rng: &mut R,
) -> Result<Vec<Action>> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let geo = grid.geometry();
    let mut out = Vec::with_capacity(count);
    let sectors = [
        (pose.heading_rad - spec.fov_rad, 2.0 * spec.fov_rad),
        (-PI, 2.0 * PI),
    ];
    for (start, span) in sectors {
        let mut attempts = 0;
        while out.len() < count && attempts < ATTEMPTS_PER_SAMPLE * count {
            attempts += 1;
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            let r = spec.max_range_m * (1.0 - u).sqrt();
            let bearing = start + span * v;
            let x = pose.x_m + r * bearing.cos();
            let y = pose.y_m + r * bearing.sin();
            let Some(cell) = geo.world_to_cell(x, y) else {
                continue;
            };
            if grid.probability_at(geo.index(cell)) > max_occupancy {
                continue;
            }
            out.push(Action {
                x_m: x,
                y_m: y,
                heading_rad: wrap_angle(bearing),
            });
        }
        if out.len() == count {
            break;
        }
    }
    if out.is_empty() {
        return Err(Error::Stuck);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_requested_count_inside_sector() {
        let grid = OccupancyGrid::new(24.0, 14.0, 0.2).unwrap();
        let spec = SensorSpec::default();
        let pose = Action::new(12.0, 7.0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_actions(&grid, &pose, 30, &spec, &mut rng).unwrap();
        assert_eq!(s.len(), 30);
        for a in &s {
            let d = a.distance_to(&pose);
            assert!(d > 0.0 && d <= 6.0 + 1e-12);
            let rel = wrap_angle((a.y_m - pose.y_m).atan2(a.x_m - pose.x_m) - pose.heading_rad);
            assert!(rel.abs() <= 1.5 + 1e-9);
            assert!((wrap_angle(a.heading_rad - pose.heading_rad) - rel).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let grid = OccupancyGrid::new(24.0, 14.0, 0.2).unwrap();
        let spec = SensorSpec::default();
        let pose = Action::new(1.2, 1.2, 0.0);
        let a = sample_actions(&grid, &pose, 60, &spec, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_actions(&grid, &pose, 60, &spec, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fully_occupied_surroundings_are_stuck() {
        let mut grid = OccupancyGrid::new(10.0, 10.0, 0.5).unwrap();
        for i in 0..grid.geometry().len() {
            let c = grid.geometry().cell_at(i);
            grid.set_log_odds(c, 3.0).unwrap();
        }
        let spec = SensorSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = sample_actions(&grid, &Action::new(5.0, 5.0, 0.0), 10, &spec, &mut rng);
        assert!(matches!(err, Err(Error::Stuck)));
    }

    #[test]
    fn widens_to_disc_when_sector_blocked() {
        // free only behind the robot
        let mut grid = OccupancyGrid::new(20.0, 20.0, 0.5).unwrap();
        for i in 0..grid.geometry().len() {
            let c = grid.geometry().cell_at(i);
            if grid.geometry().cell_center(c).0 > 9.0 {
                grid.set_log_odds(c, 3.0).unwrap();
            }
        }
        let spec = SensorSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = sample_actions(&grid, &Action::new(9.5, 10.0, 0.0), 5, &spec, &mut rng).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|a| a.x_m <= 9.5));
    }

    #[test]
    fn zero_count_rejected() {
        let grid = OccupancyGrid::new(2.0, 2.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = sample_actions(&grid, &Action::new(1.0, 1.0, 0.0), 0, &SensorSpec::default(), &mut rng);
        assert!(r.is_err());
    }
}
