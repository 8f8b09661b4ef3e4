//! A* on a partially known belief map: known-free cells cost 1, unknown cells
//! 2, believed-occupied cells are impassable.

use bki_explore::bench::MapKind;
use bki_explore::exploration::{astar, path_cost, Traversability};
use bki_explore::sensor::{integrate_scan, simulate_scan};
use bki_explore::{Action, InverseSensorModel, SensorSpec};

fn main() -> bki_explore::Result<()> {
    let truth = MapKind::Office.generate(24.0, 14.0, 0.2, 1)?;
    let start = MapKind::Office.default_start(14.0);
    let mut belief = truth.blank_belief();
    integrate_scan(&mut belief, &simulate_scan(&truth, &start, &SensorSpec::default())?, &InverseSensorModel::default())?;

    for goal in [Action::new(6.0, start.y_m, 0.0), Action::new(20.0, start.y_m, 0.0)] {
        let path = astar(&belief, &start, &goal)?;
        println!(
            "to ({:.1}, {:.1}): {} cells, cost {:.2} m-equivalent",
            goal.x_m,
            goal.y_m,
            path.len(),
            path_cost(&belief, &path, &Traversability::default())
        );
    }
    // unobserved cells are fair goals; cells off the map are not
    let unseen = astar(&belief, &start, &Action::new(0.1, 0.1, 0.0))?;
    println!("to the unobserved corner: {} cells", unseen.len());
    if let Err(e) = astar(&belief, &start, &Action::new(30.0, 7.0, 0.0)) {
        println!("off the map: {e}");
    }
    Ok(())
}
