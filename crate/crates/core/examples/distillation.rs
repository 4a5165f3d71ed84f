//! Iterated wiring starting from a weakly non-local box.

use nsbox::distill::distill_schedule;
use nsbox::rational::{rat, to_f64};

fn main() -> nsbox::error::Result<()> {
    let trace = distill_schedule(&rat(1, 10), 2, 2, 20)?;
    for (t, e) in trace.epsilons.iter().enumerate() {
        println!("round {t:2}: {:.6}", to_f64(e));
    }
    println!("{} rounds checked against the explicit wiring", trace.cross_checked_rounds);
    Ok(())
}
