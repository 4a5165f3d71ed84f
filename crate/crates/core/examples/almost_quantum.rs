//! Almost-quantum feasibility near and beyond the Tsirelson bound.

use nsbox::aq::{dykstra_membership, quantum_gram_fixture, AqParams, Fixture};
use nsbox::boxes::{isotropic_box, pr_box};
use nsbox::orthograph::build_orthogonality_graph;
use nsbox::rational::rat;

fn main() -> nsbox::error::Result<()> {
    let (_, cand) = quantum_gram_fixture(&Fixture::TsirelsonChsh)?;
    println!("Tsirelson fixture residual {:e}", cand.residuals.max());

    let params = AqParams::default();
    for (name, b) in [("isotropic 7/10", isotropic_box(2, 2, &rat(7, 10))?), ("PR", pr_box(2, 2)?)] {
        let g = build_orthogonality_graph(b.scenario());
        let r = dykstra_membership(&b, &g, &params)?;
        println!("{name}: feasible={} after {} iterations", r.is_feasible(), r.iterations);
    }
    Ok(())
}
