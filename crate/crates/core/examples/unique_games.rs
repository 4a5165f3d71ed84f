//! No-signaling graphs of XOR and constant games.

use nsbox::games::{constant_game, is_uniquely_won, xor_game};

fn main() -> nsbox::error::Result<()> {
    for (name, g) in [("xor(3,2)", xor_game(3, 2)?), ("constant(2,2)", constant_game(2, 2)?)] {
        let r = is_uniquely_won(&g)?;
        println!(
            "{name}: {} components, {} winning boxes, uniquely won: {}",
            r.graph.component_count,
            r.boxes.len(),
            r.connected
        );
    }
    Ok(())
}
