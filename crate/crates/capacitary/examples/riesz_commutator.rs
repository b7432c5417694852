//! Riesz potentials and commutators with a logarithmic symbol.
//!
//! ```bash
//! cargo run --release --example riesz_commutator
//! ```

use capacitary::choquet::lp_quasinorm;
use capacitary::content::ContentParams;
use capacitary::lattice::{GridFunction, Region, RootCube};
use capacitary::operators::{commutator, iterated_commutator, riesz_potential, ExponentPair, RieszMethod, RieszParams};

fn main() -> capacitary::error::Result<()> {
    let (alpha, beta) = (0.25, 1.0);
    let ex = ExponentPair::new(2.0, alpha, beta)?;
    let params = ContentParams::dyadic(beta)?;
    println!("p = {}, q = {}", ex.p, ex.q);
    for depth in [6, 8, 10] {
        let root = RootCube::unit(1, depth)?;
        let b = GridFunction::from_fn(&root, |x| (x[0] - 0.5).abs().max(1e-3).ln())?;
        let f = GridFunction::from_fn(&root, |x| if x[0] < 0.25 { 1.0 } else { 0.0 })?;
        let rp = RieszParams::new(alpha, 1, RieszMethod::Fft)?;
        let lp = |g: &GridFunction, p: f64| lp_quasinorm(g, p, &params, Region::Root);
        let i_f = riesz_potential(&f, &rp)?;
        let c1 = commutator(&b, &f, &rp)?;
        let c2 = iterated_commutator(&b, &f, 2, &rp)?;
        println!(
            "L = {depth:>2}: ||f||_p {:.4}  ||I f||_q {:.4}  ||[b,I] f||_q {:.4}  ||[b,[b,I]] f||_q {:.4}",
            lp(&f, ex.p)?,
            lp(&i_f, ex.q)?,
            lp(&c1, ex.q)?,
            lp(&c2, ex.q)?
        );
    }
    Ok(())
}
