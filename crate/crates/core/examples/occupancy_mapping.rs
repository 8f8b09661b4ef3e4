//! Builds a belief map of a small walled room from three scans and reports
//! how entropy and coverage evolve.

use bki_explore::grid::{CellIndex, CellState, GridGeometry};
use bki_explore::sensor::{integrate_scan, simulate_scan};
use bki_explore::{Action, GroundTruthGrid, InverseSensorModel, SensorSpec};

fn main() -> bki_explore::Result<()> {
    let geo = GridGeometry::from_extent(8.0, 6.0, 0.2)?;
    let mut truth = GroundTruthGrid::new_free(geo);
    for c in 0..geo.width {
        truth.set(CellIndex::new(c, 0), CellState::Occupied)?;
        truth.set(CellIndex::new(c, geo.height - 1), CellState::Occupied)?;
    }
    for r in 0..geo.height {
        truth.set(CellIndex::new(0, r), CellState::Occupied)?;
        truth.set(CellIndex::new(geo.width - 1, r), CellState::Occupied)?;
    }
    // a pillar in the middle
    for c in 19..22 {
        for r in 14..17 {
            truth.set(CellIndex::new(c, r), CellState::Occupied)?;
        }
    }

    let mut belief = truth.blank_belief();
    let model = InverseSensorModel::default();
    let spec = SensorSpec::default();
    println!("cells: {}  prior entropy: {:.1} bits", geo.len(), belief.map_entropy());
    for pose in [Action::new(1.0, 1.0, 0.6), Action::new(7.0, 1.0, 2.4), Action::new(4.0, 5.0, -1.57)] {
        let scan = simulate_scan(&truth, &pose, &spec)?;
        let hits = scan.beams.iter().filter(|b| b.hit).count();
        integrate_scan(&mut belief, &scan, &model)?;
        println!(
            "scan at ({:.1}, {:.1}) heading {:+.2}: {hits}/{} beams hit, entropy {:.1} bits, coverage {:.3}",
            pose.x_m,
            pose.y_m,
            pose.heading_rad,
            scan.beams.len(),
            belief.map_entropy(),
            belief.coverage(&truth, 0.25)?
        );
    }
    let pillar = belief.probability(CellIndex::new(19, 15))?;
    println!("pillar face occupancy belief: {pillar:.3}");
    Ok(())
}
