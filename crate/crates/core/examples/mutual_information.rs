//! Expected information gain of candidate actions after a first scan, plus a
//! single-beam example with hand-set cell beliefs.

use bki_explore::bench::MapKind;
use bki_explore::grid::{CellIndex, GridGeometry};
use bki_explore::mi::{action_mi, beam_mi, outcome_probabilities};
use bki_explore::sensor::{integrate_scan, simulate_scan};
use bki_explore::{Action, InverseSensorModel, OccupancyGrid, SensorSpec};

fn main() -> bki_explore::Result<()> {
    // one beam over three cells
    let mut line = OccupancyGrid::with_geometry(GridGeometry::from_cells(3, 1, 1.0)?);
    for (c, p) in [0.2f64, 0.5, 0.9].into_iter().enumerate() {
        line.set_log_odds(CellIndex::new(c, 0), (p / (1.0 - p)).ln())?;
    }
    let spec = SensorSpec::with_count(0.1, 1, 3.0)?;
    println!("outcome probabilities: {:?}", outcome_probabilities(&[0.2, 0.5, 0.9]));
    println!("beam MI: {:.4} bits", beam_mi(&line, &Action::new(0.5, 0.5, 0.0), 0.0, &spec)?);

    let truth = MapKind::Structured.generate(24.0, 14.0, 0.2, 1)?;
    let mut belief = truth.blank_belief();
    let start = Action::new(1.2, 1.2, 0.0);
    let sensor = SensorSpec::default();
    integrate_scan(&mut belief, &simulate_scan(&truth, &start, &sensor)?, &InverseSensorModel::default())?;
    println!("\nafter one scan from (1.2, 1.2):");
    for a in [
        Action::new(1.2, 1.2, 0.0),
        Action::new(3.0, 1.5, 0.0),
        Action::new(3.0, 1.5, 1.57),
        Action::new(4.0, 3.5, 0.8),
    ] {
        let r = action_mi(&belief, &a, &sensor)?;
        println!(
            "  ({:.1}, {:.1}, {:+.2}): {:7.2} bits in {:.2} ms",
            a.x_m,
            a.y_m,
            a.heading_rad,
            r.mi_bits,
            r.eval_time_s * 1e3
        );
    }
    Ok(())
}
