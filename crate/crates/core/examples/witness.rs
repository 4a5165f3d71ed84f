//! Separating witness for the PR box.

use nsbox::boxes::pr_box;
use nsbox::rational::format_rational;
use nsbox::witness::build_witness;

fn main() -> nsbox::error::Result<()> {
    let w = build_witness(&pr_box(2, 2)?)?;
    println!("j = {}", w.j);
    println!("epsilon = {}", format_rational(&w.epsilon));
    println!("violation = {}", format_rational(&w.violation));
    Ok(())
}
