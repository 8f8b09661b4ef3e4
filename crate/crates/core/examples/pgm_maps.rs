//! Generates the three synthetic map kinds, writes them as PGM and checks
//! the round trip.

use bki_explore::bench::{load_map, MapKind};
use bki_explore::grid::write_pgm;

fn main() -> bki_explore::Result<()> {
    let dir = std::env::temp_dir();
    for kind in MapKind::ALL {
        let map = kind.generate(24.0, 14.0, 0.2, 7)?;
        let path = dir.join(format!("bki_explore_{}.pgm", kind.name()));
        write_pgm(&map, &mut std::fs::File::create(&path)?, true)?;
        let back = load_map(&path, 0.2)?;
        println!(
            "{:12} {}x{} cells, {:.1}% free, connected: {}, round trip identical: {}  -> {}",
            kind.name(),
            map.width(),
            map.height(),
            100.0 * map.free_count() as f64 / map.geometry().len() as f64,
            map.free_space_connected(),
            back == map,
            path.display()
        );
    }
    Ok(())
}
