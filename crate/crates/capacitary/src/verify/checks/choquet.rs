use rand::Rng;

use crate::choquet::{content_average, lp_from_profile, Denominator};
use crate::content::{dyadic_content, ContentParams};
use crate::error::Result;
use crate::lattice::{dyadic_lattice, node_coords, DyadicCube, GridFunction, LeafSet, Region, RootCube};
use crate::verify::generators::FunctionSpec;
use crate::verify::report::{ratio, two_sided, LevelData};

use super::Level;

fn random_set(lvl: &Level<'_>, rng: &mut rand_chacha::ChaCha8Rng) -> Result<LeafSet> {
    let n = lvl.cfg.n;
    let level = 5u32.min(lvl.depth);
    let cells = 1usize << (level as usize * n);
    let keep: f64 = rng.gen_range(0.2..0.8);
    let values = (0..cells).map(|_| if rng.gen::<f64>() < keep { 1.0 } else { 0.0 }).collect();
    let g = FunctionSpec::Step { level, values, central: false }.discretize(&lvl.root)?;
    Ok(LeafSet::strict_superlevel(&g, 0.0))
}

pub(crate) fn homogeneity(lvl: &Level<'_>) -> Result<LevelData> {
    let ratios = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let g = s.b.abs();
        let a = (lvl.rng(k, "a").gen_range(-4i32..=4) as f64).exp2();
        let lhs = lvl.profile(&g.scale(a), Region::Root)?.integral();
        let rhs = a * lvl.profile(&g, Region::Root)?.integral();
        Ok(two_sided(lhs, rhs))
    })?;
    let mut d = LevelData::default();
    d.claim("homogeneity", Some(1.0), ratios);
    Ok(d)
}

pub(crate) fn axioms(lvl: &Level<'_>) -> Result<LevelData> {
    let rows = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let mut rng = lvl.rng(k, "axioms");
        let f1 = s.b.abs();
        let f2 = s.f.clone();
        let int = |g: &GridFunction| -> Result<f64> { Ok(lvl.profile(g, Region::Root)?.integral()) };
        let (i1, i2) = (int(&f1)?, int(&f2)?);

        let a = (rng.gen_range(-4i32..=4) as f64).exp2();
        let homog = two_sided(int(&f1.scale(a))?, a * i1);

        let sub = ratio(int(&f1.zip_map(&f2, |x, y| x + y)?)?, i1 + i2);

        let p = [1.5, 2.0, 3.0][rng.gen_range(0..3)];
        let pp = p / (p - 1.0);
        let prod = int(&f1.zip_map(&f2, |x, y| x * y)?)?;
        let n1 = lp_from_profile(&lvl.profile(&f1, Region::Root)?, p);
        let n2 = lp_from_profile(&lvl.profile(&f2, Region::Root)?, pp);
        let holder = ratio(prod, n1 * n2);

        let (sa, sb) = (random_set(lvl, &mut rng)?, random_set(lvl, &mut rng)?);
        let h = |e: &LeafSet| dyadic_content(e, &lvl.params);
        let strong = ratio(h(&sa.union(&sb))? + h(&sa.intersection(&sb))?, h(&sa)? + h(&sb)?);

        let q = lvl.random_cube(&mut rng, 0..=3);
        let vals = f1.restrict(&q)?.to_vec();
        let top = vals.iter().fold(0.0f64, |m, &v| m.max(v));
        let c = rng.gen_range(0.0..=1.0) * top;
        let avg = content_average(&f1, &q, &lvl.params, Denominator::Content)?;
        let prof = lvl.profile(&f1.map(|v| v - c), Region::Cube(q))?;
        let average = ratio((avg - c).abs(), prof.integral() / prof.base());
        Ok([homog, sub, holder, strong, average])
    })?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let mut d = LevelData::default();
    d.claim("homogeneity", Some(1.0), col(0));
    d.claim("subadditivity", Some(2.0), col(1));
    d.claim("holder", Some(2.0), col(2));
    d.claim("strong_subadditivity", Some(1.0), col(3));
    d.claim("average_estimate", Some(1.0), col(4));
    Ok(d)
}

/// Copies `e` into a root of side 2, shifted by a third of the unit per axis.
fn shifted_copy(e: &LeafSet) -> Result<LeafSet> {
    let root = e.root();
    let n = root.dim();
    let big = RootCube::new(n, root.depth() + 1, 2.0 * root.side(), &vec![0.0; n])?;
    let off = root.per_axis() / 3;
    let leaves = e.members().map(|leaf| {
        let mut c = root.leaf_coords(leaf);
        for x in c.iter_mut().take(n) {
            *x += off;
        }
        big.leaf_index(&c)
    });
    LeafSet::from_leaves(&big, leaves.collect::<Vec<_>>())
}

pub(crate) fn content_equivalence(lvl: &Level<'_>) -> Result<LevelData> {
    let ratios = lvl.each(|k| {
        let e = random_set(lvl, &mut lvl.rng(k, "set"))?;
        let moved = shifted_copy(&e)?;
        Ok(two_sided(dyadic_content(&e, &lvl.params)?, dyadic_content(&moved, &lvl.params)?))
    })?;
    let mut d = LevelData::default();
    d.claim("shifted_lattice", None, ratios);
    Ok(d)
}

/// Per-level tables over the dyadic lattice, indexed by `DyadicCube::index`.
struct Tree {
    weight: Vec<f64>,
    vals: Vec<Vec<f64>>,
}

impl Tree {
    fn new(root: &RootCube, params: &ContentParams) -> Self {
        let dim = root.dim();
        Tree {
            weight: params.level_weights(root),
            vals: (0..=root.depth()).map(|k| vec![0.0; 1usize << (dim as u32 * k)]).collect(),
        }
    }

    fn get(&self, q: &DyadicCube) -> f64 {
        self.vals[q.level() as usize][q.index()]
    }

    fn add(&mut self, q: &DyadicCube, v: f64) {
        self.vals[q.level() as usize][q.index()] += v;
    }

    fn w(&self, q: &DyadicCube) -> f64 {
        self.weight[q.level() as usize]
    }
}

/// Maximal dyadic cubes inside `e`.
fn maximal_cubes(e: &LeafSet) -> Vec<DyadicCube> {
    let root = e.root();
    let depth = root.depth();
    let dim = root.dim();
    let mut full: Vec<Vec<bool>> = vec![Vec::new(); depth as usize + 1];
    full[depth as usize] = e.bits().to_vec();
    for k in (0..depth).rev() {
        full[k as usize] = (0..1usize << (dim as u32 * k))
            .map(|idx| {
                DyadicCube::new(k, dim, node_coords(idx, k, dim))
                    .expect("in range")
                    .children()
                    .iter()
                    .all(|ch| full[k as usize + 1][ch.index()])
            })
            .collect();
    }
    dyadic_lattice(root)
        .into_iter()
        .filter(|q| full[q.level() as usize][q.index()])
        .filter(|q| q.parent().is_none_or(|p| !full[p.level() as usize][p.index()]))
        .collect()
}

fn ancestors_or_self(q: &DyadicCube) -> impl Iterator<Item = DyadicCube> {
    std::iter::successors(Some(*q), |c| c.parent())
}

/// Subfamily of the maximal cubes of a set with non-overlapping ancestors.
pub(crate) struct Packing {
    pub selected: Vec<DyadicCube>,
    pub ancestors: Vec<DyadicCube>,
}

/// Bottom-up merging: a cube whose current elements weigh more than
/// `l(P)^beta` replaces them; inside each merged cube the selected cubes
/// below are kept largest first until their weight reaches `l(P)^beta`.
pub(crate) fn packing_family(e: &LeafSet, params: &ContentParams) -> Packing {
    let root = e.root();
    let dim = root.dim();
    let cubes = maximal_cubes(e);
    let w = params.level_weights(root);
    let depth = root.depth() as usize;
    let mut is_cube: Vec<Vec<bool>> = (0..=depth).map(|k| vec![false; 1usize << (dim * k)]).collect();
    for q in &cubes {
        is_cube[q.level() as usize][q.index()] = true;
    }
    let mut merged: Vec<Vec<bool>> = is_cube.iter().map(|v| vec![false; v.len()]).collect();
    let mut weight: Vec<Vec<f64>> = is_cube.iter().map(|v| vec![0.0; v.len()]).collect();
    let mut lists: Vec<Vec<Vec<DyadicCube>>> = is_cube.iter().map(|v| vec![Vec::new(); v.len()]).collect();
    for k in (0..=depth).rev() {
        for idx in 0..is_cube[k].len() {
            let q = DyadicCube::new(k as u32, dim, node_coords(idx, k as u32, dim)).expect("in range");
            if is_cube[k][idx] {
                weight[k][idx] = w[k];
                lists[k][idx] = vec![q];
                continue;
            }
            if k == depth {
                continue;
            }
            let mut sum = 0.0;
            let mut list = Vec::new();
            for ch in q.children() {
                sum += weight[k + 1][ch.index()];
                list.append(&mut lists[k + 1][ch.index()]);
            }
            if sum > w[k] {
                merged[k][idx] = true;
                list.sort_by_key(|c| c.level());
                let mut acc = 0.0;
                list.retain(|c| {
                    let keep = acc < w[k];
                    if keep {
                        acc += w[c.level() as usize];
                    }
                    keep
                });
                sum = w[k];
            }
            weight[k][idx] = sum;
            lists[k][idx] = list;
        }
    }
    let selected = std::mem::take(&mut lists[0][0]);
    let ancestors = dyadic_lattice(root)
        .into_iter()
        .filter(|q| merged[q.level() as usize][q.index()])
        .filter(|q| ancestors_or_self(q).skip(1).all(|a| !merged[a.level() as usize][a.index()]))
        .collect();
    Packing { selected, ancestors }
}

pub(crate) fn packing(lvl: &Level<'_>) -> Result<LevelData> {
    let root = &lvl.root;
    let params = &lvl.params;
    let rows = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let e = random_set(lvl, &mut lvl.rng(k, "set"))?;
        let fam = packing_family(&e, params);
        let w = params.level_weights(root);
        let wt = |q: &DyadicCube| w[q.level() as usize];
        let g = s.b.abs();

        let mut sum_int = 0.0;
        let mut union = LeafSet::empty(root);
        for q in &fam.selected {
            sum_int += lvl.profile(&g, Region::Cube(q.to_grid(root)))?.integral();
            union = union.union(&LeafSet::region(root, Region::Cube(q.to_grid(root)))?);
        }
        let union_int = lvl.profile(&g, Region::Set(&union))?.integral();
        let estimate = ratio(sum_int, union_int);

        let mut covered = union.clone();
        for a in &fam.ancestors {
            covered = covered.union(&LeafSet::region(root, Region::Cube(a.to_grid(root)))?);
        }
        let cover = ratio(e.len() as f64, e.intersection(&covered).len() as f64);

        let mut sel = Tree::new(root, params);
        for q in &fam.selected {
            for a in ancestors_or_self(q) {
                sel.add(&a, wt(q));
            }
        }
        let pack = dyadic_lattice(root)
            .iter()
            .map(|p| ratio(sel.get(p), sel.w(p)))
            .fold(0.0f64, f64::max);

        let h = dyadic_content(&e, params)?;
        let outside: f64 = fam
            .selected
            .iter()
            .filter(|q| !fam.ancestors.iter().any(|a| ancestors_or_self(q).any(|b| b == *a)))
            .map(wt)
            .sum();
        let mid = outside + fam.ancestors.iter().map(wt).sum::<f64>();
        let total: f64 = fam.selected.iter().map(wt).sum();
        Ok([estimate, cover, pack, ratio(h, mid), ratio(mid, total), ratio(total, h)])
    })?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let mut d = LevelData::default();
    d.claim("packing_estimate", Some(2.0), col(0));
    d.claim("ancestor_cover", Some(1.0), col(1));
    d.claim("ancestor_packing", Some(2.0), col(2));
    d.claim("content_vs_cover", Some(1.0), col(3));
    d.claim("cover_vs_selection", Some(1.0), col(4));
    d.claim("selection_vs_content", Some(2.0), col(5));
    Ok(d)
}

pub(crate) fn dimension_change(lvl: &Level<'_>) -> Result<LevelData> {
    let alpha = lvl.cfg.alpha;
    let low = ContentParams::dyadic(alpha)?;
    let ratios = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let mut worst = 0.0f64;
        for g in [s.b.abs(), s.f.clone()] {
            worst = worst.max(dimension_ratio(&g, alpha, &lvl.params, &low)?);
        }
        Ok(worst)
    })?;
    let mut d = LevelData::default();
    d.claim("dimension_change", Some(1.0), ratios);
    Ok(d)
}

/// `int g dH^beta / ((beta/alpha) (int g^{alpha/beta} dH^alpha)^{beta/alpha})`.
pub(crate) fn dimension_ratio(g: &GridFunction, alpha: f64, high: &ContentParams, low: &ContentParams) -> Result<f64> {
    let beta = high.beta();
    let r = alpha / beta;
    let lhs = crate::choquet::choquet_integral(&g.abs(), Region::Root, high)?;
    let inner = crate::choquet::choquet_integral(&g.map(|v| v.abs().powf(r)), Region::Root, low)?;
    Ok(ratio(lhs, (beta / alpha) * inner.powf(1.0 / r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::RootCube;

    #[test]
    fn packing_family_properties() {
        let root = RootCube::unit(1, 4).unwrap();
        let params = ContentParams::dyadic(0.5).unwrap();
        let e = LeafSet::from_leaves(&root, [0, 1, 2, 3, 5, 9, 11, 15]).unwrap();
        let fam = packing_family(&e, &params);
        // [0,4) merges to one level-2 cube
        let cubes = maximal_cubes(&e);
        assert!(cubes.contains(&DyadicCube::new(2, 1, [0, 0, 0]).unwrap()));
        assert_eq!(cubes.iter().map(|q| q.to_grid(&root).leaf_count()).sum::<usize>(), e.len());
        for q in &fam.selected {
            assert!(cubes.contains(q));
        }
    }

    #[test]
    fn shifted_copy_keeps_size() {
        let root = RootCube::unit(2, 3).unwrap();
        let e = LeafSet::from_leaves(&root, [0, 9, 63]).unwrap();
        let m = shifted_copy(&e).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.root().side(), 2.0);
    }
}
