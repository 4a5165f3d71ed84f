//! Rank test for polytope vertices.

use nsbox::boxes::{isotropic_box, pr_box};
use nsbox::polytope::vertex::certify_vertex;
use nsbox::rational::rat;

fn main() -> nsbox::error::Result<()> {
    for (name, b) in [("PR", pr_box(2, 2)?), ("isotropic 1/2", isotropic_box(2, 2, &rat(1, 2))?)] {
        let c = certify_vertex(&b)?;
        println!("{name}: vertex={} rank {}/{}", c.is_vertex, c.rank, c.required_rank);
    }
    Ok(())
}
