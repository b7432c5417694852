//! Content BMO norms, truncation and the John-Nirenberg growth of
//! p-oscillations.
//!
//! ```bash
//! cargo run --release --example bmo_oscillation
//! ```

use capacitary::bmo::{bmo_norm, lebesgue_bmo_norm, oscillation, shifted_mean_gap, truncate};
use capacitary::content::ContentParams;
use capacitary::lattice::{CubeFamily, DyadicCube, GridFunction, RootCube};

fn main() -> capacitary::error::Result<()> {
    let root = RootCube::unit(1, 9)?;
    let b = GridFunction::from_fn(&root, |x| -(x[0].max(1e-4)).ln())?;
    println!("Lebesgue BMO norm {:.4}", lebesgue_bmo_norm(&b, CubeFamily::Dyadic)?);
    for beta in [0.5, 0.75, 1.0] {
        let params = ContentParams::dyadic(beta)?;
        let norm = bmo_norm(&b, &params, CubeFamily::Dyadic)?;
        let trunc = bmo_norm(&truncate(&b, 2.0)?, &params, CubeFamily::Dyadic)?;
        println!("beta {beta:<5} ||b|| = {norm:.4}  ||trunc_2 b|| = {trunc:.4}");
    }

    let params = ContentParams::dyadic(1.0)?;
    let q = DyadicCube::new(6, 1, [0, 0, 0])?.to_grid(&root);
    for p in [1.0, 2.0, 4.0, 8.0] {
        let o = oscillation(&b, &q, &params, p)?;
        println!("p = {p}: oscillation {:.4} at c = {:.4}", o.value, o.c_star);
    }
    for k in 1..=6 {
        println!("|b_(2^{k} Q) - b_Q| = {:.4}", shifted_mean_gap(&b, &q, k, &params)?);
    }
    Ok(())
}
