//! Choquet integrals by the layer-cake formula, and how they change with
//! the content dimension.
//!
//! ```bash
//! cargo run --release --example choquet_layer_cake
//! ```

use capacitary::choquet::{choquet_integral, content_average, content_profile, lp_quasinorm, Denominator};
use capacitary::content::ContentParams;
use capacitary::lattice::{GridFunction, Region, RootCube};

fn main() -> capacitary::error::Result<()> {
    let root = RootCube::unit(2, 6)?;
    let f = GridFunction::from_fn(&root, |x| {
        let r = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
        (0.05 / r.max(0.01)).min(5.0)
    })?;
    let riemann: f64 = f.values().iter().sum::<f64>() * root.leaf_volume();
    println!("Riemann sum {riemann:.6}");
    for beta in [0.5, 1.0, 1.5, 2.0] {
        let params = ContentParams::dyadic(beta)?;
        println!(
            "beta {beta:<4} int f dH = {:.6}  ||f||_2 = {:.6}",
            choquet_integral(&f, Region::Root, &params)?,
            lp_quasinorm(&f, 2.0, &params, Region::Root)?
        );
    }

    let params = ContentParams::dyadic(1.0)?;
    let prof = content_profile(&f, Region::Root, &params)?;
    println!("level profile (t, H(|f| > t)), first rows:");
    for (t, h) in prof.level_pairs().iter().take(6) {
        println!("  {t:.4}  {h:.6}");
    }
    let q = root.root_cube();
    println!(
        "average over the root: by content {:.6}, by side {:.6}",
        content_average(&f, &q, &params, Denominator::Content)?,
        content_average(&f, &q, &params, Denominator::SidePower)?
    );
    Ok(())
}
