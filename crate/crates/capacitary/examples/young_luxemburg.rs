//! Young functions, their complements and Luxemburg means against content.
//!
//! ```bash
//! cargo run --release --example young_luxemburg
//! ```

use capacitary::content::ContentParams;
use capacitary::lattice::{DyadicCube, GridFunction, Region, RootCube};
use capacitary::young::{luxemburg_global, luxemburg_mean, EndpointFns, YoungSpec};

fn main() -> capacitary::error::Result<()> {
    let specs = ["t*log(e+t)", "pow:2", "exp-1"];
    for s in specs {
        let b: YoungSpec = s.parse()?;
        print!("{:<14}", b.to_string());
        for t in [0.5, 1.0, 4.0] {
            print!("  B({t}) = {:<9.4} Bbar({t}) = {:<9.4}", b.eval(t)?, b.eval_complementary(t)?);
        }
        println!();
    }

    let root = RootCube::unit(1, 8)?;
    let f = GridFunction::from_fn(&root, |x| 1.0 / x[0].max(1e-3).sqrt())?;
    let params = ContentParams::dyadic(0.9)?;
    let b = YoungSpec::t_log();
    println!("||f||_B over the root {:.4}", luxemburg_global(&f, Region::Root, &b, &params)?);
    println!("||f||_B,Q over [0, 1/4) {:.4}", luxemburg_mean(&f, &DyadicCube::new(2, 1, [0, 0, 0])?.to_grid(&root), &b, &params)?);

    let ep = EndpointFns::new(0.25, 0.9, b)?;
    for t in [0.1, 1.0, 10.0] {
        println!("Psi({t}) = {:.4}  Phi_1({t}) = {:.4}", ep.psi(t), ep.phi1(t)?);
    }
    Ok(())
}
