//! Orthogonality graph of the CHSH scenario and PR clique sums.

use nsbox::boxes::pr_box;
use nsbox::orthograph::{build_orthogonality_graph, clique_saturation};
use nsbox::scenario::BellScenario;

fn main() -> nsbox::error::Result<()> {
    let g = build_orthogonality_graph(&BellScenario::uniform(2, 2, 2)?);
    println!("{} vertices, {} edges, degree {}", g.vertex_count(), g.edge_count(), g.degree(0));
    println!("{} cliques", g.cliques().count());
    let sat = clique_saturation(&pr_box(2, 2)?, &g)?;
    println!("PR saturates every clique: {}", sat.all_saturated());
    Ok(())
}
