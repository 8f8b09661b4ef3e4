//! Simulates one noise-free scan in the maze map and prints beam ranges.

use bki_explore::bench::MapKind;
use bki_explore::sensor::simulate_scan;
use bki_explore::{Action, SensorSpec};

fn main() -> bki_explore::Result<()> {
    let truth = MapKind::Structured.generate(24.0, 14.0, 0.2, 1)?;
    let pose = Action::new(1.2, 1.2, 0.5);
    for (name, spec) in [("61-beam lidar", SensorSpec::default()), ("20-beam", SensorSpec::twenty_beam())] {
        let scan = simulate_scan(&truth, &pose, &spec)?;
        println!("{name}: {} beams, {:.1} m range", scan.beams.len(), spec.max_range_m);
        for b in scan.beams.iter().step_by(5) {
            println!(
                "  bearing {:+.3} rad  range {:5.2} m  {}  ({} cells)",
                b.bearing_rad,
                b.range_m,
                if b.hit { "hit " } else { "miss" },
                b.ray.cells.len()
            );
        }
    }
    Ok(())
}
