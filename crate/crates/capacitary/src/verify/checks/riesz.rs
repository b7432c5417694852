use rayon::prelude::*;

use crate::error::Result;
use crate::lattice::{GridCube, GridFunction, LeafSet, Region, RootCube, MAX_DIM};
use crate::operators::{maximal_content, maximal_fractional, RieszOperator};
use crate::verify::report::{max_of, ratio, LevelData};

use super::{max_ratio, Level};

pub(crate) fn strong(lvl: &Level<'_>) -> Result<LevelData> {
    let ex = lvl.cfg.exponents()?;
    let op = lvl.riesz()?;
    let rows = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let g = s.b.zip_map(&s.f, |x, y| x * y)?;
        let norm = lvl.lp(&g, ex.p)?;
        let i = lvl.lp(&op.apply(&g)?, ex.q)?;
        let m = lvl.lp(&maximal_fractional(&g, ex.alpha, &lvl.params, lvl.cfg.family)?, ex.q)?;
        Ok([ratio(i, norm), ratio(m, norm)])
    })?;
    let mut d = LevelData::default();
    d.claim("riesz", None, rows.iter().map(|r| r[0]).collect());
    d.claim("maximal", None, rows.iter().map(|r| r[1]).collect());
    d.diag("q", ex.q);
    Ok(d)
}

fn doubled(lvl: &Level<'_>, q: &GridCube) -> Result<LeafSet> {
    LeafSet::region(&lvl.root, Region::Box(q.dilate_clipped(&lvl.root, 1)?))
}

pub(crate) fn local(lvl: &Level<'_>) -> Result<LevelData> {
    let op = lvl.riesz()?;
    let alpha = lvl.cfg.alpha;
    let ratios = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let q = lvl.random_cube(&mut lvl.rng(k, "cube"), 2..=4);
        let two = doubled(lvl, &q)?;
        let g = s.b.abs().zip_map(&s.f, |x, y| x + y)?.masked(Region::Set(&two));
        let lhs = lvl.profile(&op.apply(&g)?, Region::Cube(q))?.integral();
        let rhs = q.side(&lvl.root).powf(alpha) * lvl.profile(&g, Region::Set(&two))?.integral();
        Ok(ratio(lhs, rhs))
    })?;
    let mut d = LevelData::default();
    d.claim("riesz_local", None, ratios);
    Ok(d)
}

pub(crate) fn farfield(lvl: &Level<'_>) -> Result<LevelData> {
    let op = lvl.riesz()?;
    let (alpha, beta, n) = (lvl.cfg.alpha, lvl.beta(), lvl.cfg.n);
    let root = &lvl.root;
    let per_axis = root.per_axis();
    let rows = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let q = lvl.random_cube(&mut lvl.rng(k, "cube"), 2..=4);
        let outside = doubled(lvl, &q)?.complement();
        let g = s.b.abs().zip_map(&s.f, |x, y| x + y)?.masked(Region::Set(&outside));
        let ig = op.apply(&g)?;
        let mut c = [0u32; MAX_DIM];
        for a in 0..n {
            c[a] = q.lo()[a] + q.width() / 2;
        }
        let center = ig.get(root.leaf_index(&c));
        let side = q.side(root);
        let lhs = lvl.profile(&ig.map(|v| v - center), Region::Cube(q))?.integral() / side.powf(beta);
        let mut rhs = 0.0;
        let mut j = 0u32;
        let tail = loop {
            let big = q.dilate_clipped(root, j + 1)?;
            let int = lvl.profile(&g, Region::Box(big))?.integral();
            let scale = (j as f64 + 1.0).exp2() * side;
            rhs += (-(j as f64)).exp2() * scale.powf(alpha - beta) * int;
            if (0..n).all(|a| big.lo()[a] == 0 && big.hi()[a] == per_axis) {
                let r = (alpha - beta - 1.0).exp2();
                let next = (-(j as f64 + 1.0)).exp2() * (2.0 * scale).powf(alpha - beta) * int;
                break next / (1.0 - r);
            }
            j += 1;
        };
        rhs += tail;
        Ok([ratio(lhs, rhs), ratio(tail, rhs)])
    })?;
    let mut d = LevelData::default();
    d.claim("riesz_farfield", None, rows.iter().map(|r| r[0]).collect());
    d.diag("tail_fraction", max_of(&rows.iter().map(|r| r[1]).collect::<Vec<_>>()));
    Ok(d)
}

/// Point values of the kernel on offsets `-m..m` per axis, as a function on a
/// root of side 2 whose leaf `i` sits at offset `i - m`.
fn kernel_grid(lvl: &Level<'_>, op: &RieszOperator) -> Result<GridFunction> {
    let root = &lvl.root;
    let n = root.dim();
    let h = root.leaf_side();
    let m = root.per_axis() as i64;
    let origin = vec![-1.0 - 0.5 * h; n];
    let big = RootCube::new(n, root.depth() + 1, 2.0, &origin)?;
    let e = lvl.cfg.alpha - n as f64;
    let self_value = op.weight(&vec![0; n]) / root.leaf_volume();
    let values = (0..big.leaf_count())
        .map(|i| {
            let c = big.leaf_coords(i);
            let r2: f64 = (0..n).map(|a| ((c[a] as i64 - m) as f64).powi(2)).sum();
            if r2 == 0.0 {
                self_value
            } else {
                (r2.sqrt() * h).powf(e)
            }
        })
        .collect();
    GridFunction::new(big, values)
}

/// `(M K) * |g|` by direct summation.
fn maximal_kernel_convolution(lvl: &Level<'_>, mk: &GridFunction, g: &GridFunction) -> GridFunction {
    let root = &lvl.root;
    let n = root.dim();
    let m = root.per_axis();
    let big = mk.root();
    let vol = root.leaf_volume();
    let gv = g.values();
    let out = (0..root.leaf_count())
        .into_par_iter()
        .map(|x| {
            let cx = root.leaf_coords(x);
            let mut acc = 0.0;
            for (y, &gy) in gv.iter().enumerate() {
                if gy == 0.0 {
                    continue;
                }
                let cy = root.leaf_coords(y);
                let mut c = [0u32; MAX_DIM];
                for a in 0..n {
                    c[a] = cx[a] + m - cy[a];
                }
                acc += mk.get(big.leaf_index(&c)) * gy.abs();
            }
            acc * vol
        })
        .collect();
    GridFunction::from_parts_unchecked(root.clone(), out)
}

/// Exponents of the reverse Hölder check.
pub(crate) const REVERSE_HOLDER_R: [f64; 3] = [0.05, 0.1, 0.2];

pub(crate) fn a1(lvl: &Level<'_>) -> Result<LevelData> {
    let cfg = lvl.cfg;
    let op = lvl.riesz()?;
    let beta = lvl.beta();
    let convolution = beta < cfg.n as f64;
    let mk = if convolution {
        let kernel = kernel_grid(lvl, &op)?;
        Some(maximal_content(&kernel, &lvl.params, cfg.family)?)
    } else {
        None
    };
    let weight = cfg.endpoint_range();
    let cubes = lvl.dyadic_at(0..=lvl.depth);
    let rows = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let g = s.b.abs().zip_map(&s.f, |x, y| x * y + y)?;
        let w = op.apply(&g)?;
        let mw = maximal_content(&w, &lvl.params, cfg.family)?;
        let conv = match &mk {
            Some(mk) => max_ratio(&mw, &maximal_kernel_convolution(lvl, mk, &g)),
            None => 0.0,
        };
        let a1 = if weight { max_ratio(&mw, &w) } else { 0.0 };
        let mut profiler = lvl.profiler()?;
        let wv = w.values();
        let mut rh = [0.0f64; 3];
        for q in &cubes {
            let prof = profiler.profile(Region::Cube(*q), |i| wv[i].abs());
            let norm = q.side(&lvl.root).powf(beta);
            let mean = prof.integral() / norm;
            for (slot, r) in rh.iter_mut().zip(REVERSE_HOLDER_R) {
                let lhs = (prof.integral_of(|v| v.powf(1.0 + r)) / norm).powf(1.0 / (1.0 + r));
                *slot = slot.max(ratio(lhs, mean));
            }
        }
        Ok([conv, a1, rh[0], rh[1], rh[2]])
    })?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let mut d = LevelData::default();
    if convolution {
        d.claim("a1_convolution", Some(1.0), col(0));
    }
    if weight {
        d.claim("a1_weight", None, col(1));
    }
    for (j, r) in REVERSE_HOLDER_R.iter().enumerate() {
        d.claim(format!("reverse_holder_r{r}"), None, col(2 + j));
    }
    Ok(d)
}
