//! Extension of the isotropic box and its bipartite cut value.

use nsbox::distill::build_extension;
use nsbox::rational::{format_rational, rat};

fn main() -> nsbox::error::Result<()> {
    for eps in [rat(1, 10), rat(1, 2), rat(9, 10)] {
        let e = build_extension(2, 2, &eps)?;
        println!(
            "eps {}: {}-party extension, cut value {}",
            format_rational(&eps),
            e.extension.scenario().parties(),
            format_rational(&e.cut_value)
        );
    }
    Ok(())
}
