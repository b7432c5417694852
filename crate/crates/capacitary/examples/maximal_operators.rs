//! Content maximal functions over dyadic and shifted dyadic cubes.
//!
//! ```bash
//! cargo run --release --example maximal_operators
//! ```

use capacitary::content::ContentParams;
use capacitary::lattice::{CubeFamily, GridFunction, RootCube};
use capacitary::operators::{maximal_content, maximal_fractional, maximal_orlicz_fractional, maximal_sharp};
use capacitary::young::YoungSpec;

fn main() -> capacitary::error::Result<()> {
    let root = RootCube::unit(1, 8)?;
    let f = GridFunction::from_fn(&root, |x| if (0.3..0.35).contains(&x[0]) { 4.0 } else { 0.0 })?;
    let params = ContentParams::dyadic(0.8)?;
    let young = YoungSpec::t_log();
    for family in [CubeFamily::Dyadic, CubeFamily::ShiftedDyadic] {
        let m = maximal_content(&f, &params, family)?;
        let sharp = maximal_sharp(&f, &params, family)?;
        let frac = maximal_fractional(&f, 0.25, &params, family)?;
        let orlicz = maximal_orlicz_fractional(&f, 0.25, &young, &params, family)?;
        println!("{family}");
        println!("  {:>6} {:>10} {:>10} {:>10} {:>10}", "x", "M", "M#", "M_a", "M_a,B");
        for leaf in (0..root.leaf_count()).step_by(32) {
            println!(
                "  {:>6.3} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                root.leaf_center(leaf)[0],
                m.get(leaf),
                sharp.get(leaf),
                frac.get(leaf),
                orlicz.get(leaf)
            );
        }
    }
    Ok(())
}
