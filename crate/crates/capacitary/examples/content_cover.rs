//! Dyadic Hausdorff content of a Cantor-like set and its minimal cover.
//!
//! ```bash
//! cargo run --release --example content_cover
//! ```

use capacitary::content::{ball_content_estimate, content_oracle, dyadic_content, minimal_cover, ContentParams};
use capacitary::lattice::{LeafSet, RootCube};

/// Leaves of the middle-thirds-like set that keeps the first and last
/// quarter at every scale.
fn cantor(root: &RootCube) -> capacitary::error::Result<LeafSet> {
    let depth = root.depth();
    let keep = (0..root.leaf_count()).filter(|&i| (0..depth / 2).all(|k| matches!((i >> (2 * k)) & 3, 0 | 3)));
    LeafSet::from_leaves(root, keep)
}

fn main() -> capacitary::error::Result<()> {
    let root = RootCube::unit(1, 10)?;
    let e = cantor(&root)?;
    println!("{} of {} leaves", e.len(), root.leaf_count());
    for beta in [0.25, 0.5, 0.75, 1.0] {
        let params = ContentParams::dyadic(beta)?;
        let h = dyadic_content(&e, &params)?;
        let cover = minimal_cover(&e, &params)?;
        let (lo, hi) = ball_content_estimate(&e, &ContentParams::ball(beta)?)?;
        println!(
            "beta {beta:<5} H = {h:.6}  cover of {:>4} cubes  ball content in [{lo:.4}, {hi:.4}]",
            cover.cubes.len()
        );
    }

    let small = RootCube::unit(2, 3)?;
    let e = LeafSet::from_leaves(&small, [0, 1, 9, 27, 63])?;
    let params = ContentParams::dyadic(1.3)?;
    println!(
        "n = 2: DP {:.6}, exhaustive {:.6}",
        dyadic_content(&e, &params)?,
        content_oracle(&e, &params, small.depth())?
    );
    Ok(())
}
