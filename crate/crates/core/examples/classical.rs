//! Locality test with an exact certificate either way.

use nsbox::boxes::isotropic_box;
use nsbox::polytope::classical::{classical_membership, ClassicalOptions};
use nsbox::rational::{format_rational, rat};

fn main() -> nsbox::error::Result<()> {
    for eps in [rat(1, 2), rat(3, 5)] {
        let b = isotropic_box(2, 2, &eps)?;
        let report = classical_membership(&b, &ClassicalOptions::default())?;
        match report.certificate.gap() {
            None => println!("eps {}: local", format_rational(&eps)),
            Some(g) => println!("eps {}: non-local, gap {}", format_rational(&eps), format_rational(&g)),
        }
    }
    Ok(())
}
