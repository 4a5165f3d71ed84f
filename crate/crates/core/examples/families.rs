//! Build the standard box families and check them.

use nsbox::boxes::{correlated_box, isotropic_box, marginalize, pr_box, tensor, validate};
use nsbox::rational::{format_rational, rat};

fn main() -> nsbox::error::Result<()> {
    let pr = pr_box(2, 2)?;
    println!("PR(2,2): {}", pr.entries().iter().map(format_rational).collect::<Vec<_>>().join(" "));
    println!("valid: {}", validate(&pr).is_valid());

    let iso = isotropic_box(3, 2, &rat(1, 3))?;
    println!("isotropic(3,2,1/3) has {} entries", iso.len());

    let joint = tensor(&pr, &correlated_box(2, 2)?);
    let back = marginalize(&joint, &[0, 1])?;
    println!("marginal of PR (x) corr equals PR: {}", back == pr);
    Ok(())
}
