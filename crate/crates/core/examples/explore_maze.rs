//! One BKI-BO exploration episode in the structured maze; prints the per-step
//! trace and writes the final belief map to `explore_maze_belief.pgm`.

use std::fs::File;
use std::io::BufWriter;

use bki_explore::bench::{MapKind, StepEvent};
use bki_explore::exploration::{explore_with_snapshots, Engine, ExplorationConfig};
use bki_explore::grid::write_belief_pgm;
use bki_explore::OccupancyGrid;

fn main() -> bki_explore::Result<()> {
    let engine = std::env::args().nth(1).map_or(Ok(Engine::BkiBo), |s| s.parse())?;
    let truth = MapKind::Structured.generate(24.0, 14.0, 0.2, 1)?;
    let start = MapKind::Structured.default_start(14.0);
    let cfg = ExplorationConfig { rng_seed: 2, ..ExplorationConfig::for_engine(engine, 30) };

    let mut last: Option<OccupancyGrid> = None;
    let log = explore_with_snapshots(&cfg, &truth, &start, |_, g| last = Some(g.clone()))?;
    println!("{engine}: initial entropy {:.0} bits after the first scan", log.initial_entropy_bits);
    for r in &log.records {
        let what = match (r.event, r.target) {
            (StepEvent::Commit, Some(t)) => format!("commit ({:5.2}, {:5.2})", t.x_m, t.y_m),
            (StepEvent::Backtrack, Some(t)) => format!("back   ({:5.2}, {:5.2})", t.x_m, t.y_m),
            _ => "stack empty".to_string(),
        };
        println!(
            "step {:2}  {what}  best MI {:6.1}  entropy {:6.0}  coverage {:.3}  {:.1} ms",
            r.step,
            r.best_mi_bits,
            r.entropy_bits,
            r.coverage,
            r.total_s * 1e3
        );
    }
    println!("ended by {:?}", log.termination);
    if let Some(g) = last {
        write_belief_pgm(&g, &mut BufWriter::new(File::create("explore_maze_belief.pgm")?), true)?;
    }
    Ok(())
}
