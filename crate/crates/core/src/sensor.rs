//! Simulated limited-FOV beam range sensor and scan integration.

use std::f64::consts::FRAC_PI_3;

use crate::action::{wrap_angle, Action};
use crate::error::{Error, Result};
use crate::grid::{raycast, CellRay, GroundTruthGrid, InverseSensorModel, OccupancyGrid};

/// How beams are spread across the field of view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamLayout {
    /// Fixed angular step starting at the left FOV edge.
    Step(f64),
    /// Fixed count spaced inclusively edge to edge.
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSpec {
    /// Half-angle of the symmetric field of view.
    pub fov_rad: f64,
    pub layout: BeamLayout,
    pub max_range_m: f64,
}

impl Default for SensorSpec {
    /// ±1.5 rad at 0.05 rad resolution, 6 m range: 61 beams.
    fn default() -> Self {
        Self {
            fov_rad: 1.5,
            layout: BeamLayout::Step(0.05),
            max_range_m: 6.0,
        }
    }
}

impl SensorSpec {
    pub fn with_step(fov_rad: f64, step_rad: f64, max_range_m: f64) -> Result<Self> {
        Self {
            fov_rad,
            layout: BeamLayout::Step(step_rad),
            max_range_m,
        }
        .validated()
    }

    pub fn with_count(fov_rad: f64, beam_count: usize, max_range_m: f64) -> Result<Self> {
        Self {
            fov_rad,
            layout: BeamLayout::Count(beam_count),
            max_range_m,
        }
        .validated()
    }

    /// 20 beams across ±π/3 with 4 m range.
    pub fn twenty_beam() -> Self {
        Self {
            fov_rad: FRAC_PI_3,
            layout: BeamLayout::Count(20),
            max_range_m: 4.0,
        }
    }

    pub fn validated(self) -> Result<Self> {
        let fov_ok = self.fov_rad > 0.0 && self.fov_rad <= std::f64::consts::PI;
        let layout_ok = match self.layout {
            BeamLayout::Step(s) => s > 0.0 && s.is_finite(),
            BeamLayout::Count(n) => n >= 1,
        };
        if !fov_ok || !layout_ok || !(self.max_range_m > 0.0 && self.max_range_m.is_finite()) {
            return Err(Error::InvalidArgument(format!("sensor spec {self:?}")));
        }
        Ok(self)
    }

    pub fn beam_count(&self) -> usize {
        match self.layout {
            BeamLayout::Step(step) => (2.0 * self.fov_rad / step + 1e-9).floor() as usize + 1,
            BeamLayout::Count(n) => n,
        }
    }

    /// Absolute beam bearings for a sensor facing `heading`.
    pub fn bearings(&self, heading: f64) -> Vec<f64> {
        let n = self.beam_count();
        let (left, spacing) = match self.layout {
            BeamLayout::Step(step) => (heading - self.fov_rad, step),
            BeamLayout::Count(1) => (heading, 0.0),
            BeamLayout::Count(n) => (heading - self.fov_rad, 2.0 * self.fov_rad / (n - 1) as f64),
        };
        (0..n).map(|i| wrap_angle(left + i as f64 * spacing)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    pub bearing_rad: f64,
    pub range_m: f64,
    pub hit: bool,
    pub ray: CellRay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamScan {
    pub pose: Action,
    pub beams: Vec<Beam>,
}

/// Noise-free scan of the ground truth from `pose`.
pub fn simulate_scan(truth: &GroundTruthGrid, pose: &Action, spec: &SensorSpec) -> Result<BeamScan> {
    let Some(cell) = truth.geometry().world_to_cell(pose.x_m, pose.y_m) else {
        return Err(Error::InvalidPose(format!(
            "({}, {}) is outside the map",
            pose.x_m, pose.y_m
        )));
    };
    if truth.is_occupied(cell) {
        return Err(Error::InvalidPose(format!(
            "({}, {}) lies on an occupied cell",
            pose.x_m, pose.y_m
        )));
    }
    let beams = spec
        .bearings(pose.heading_rad)
        .into_iter()
        .map(|bearing| {
            let ray = raycast(truth, pose, bearing, spec.max_range_m)?;
            Ok(Beam {
                bearing_rad: bearing,
                range_m: if ray.hit { ray.range_m } else { spec.max_range_m },
                hit: ray.hit,
                ray,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BeamScan { pose: *pose, beams })
}

/// Applies one scan to the belief map. Each cell is updated at most once per
/// scan: the first beam to touch it decides the observation.
pub fn integrate_scan(grid: &mut OccupancyGrid, scan: &BeamScan, model: &InverseSensorModel) -> Result<()> {
    let geo = *grid.geometry();
    if geo.world_to_cell(scan.pose.x_m, scan.pose.y_m).is_none() {
        return Err(Error::InvalidPose(format!(
            "scan pose ({}, {}) is outside the map",
            scan.pose.x_m, scan.pose.y_m
        )));
    }
    let mut touched = vec![false; geo.len()];
    for beam in &scan.beams {
        let ray = &beam.ray;
        let occupied_at = ray.hit_index;
        for (i, &cell) in ray.cells.iter().enumerate() {
            let idx = geo.check(cell)?;
            if touched[idx] {
                continue;
            }
            touched[idx] = true;
            grid.update_index(idx, Some(i) == occupied_at, model);
        }
    }
    Ok(())
}
