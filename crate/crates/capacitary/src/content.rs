//! Dyadic Hausdorff content by minimal-cover dynamic programming.
//!
//! `cost(Q) = min(l(Q)^beta, sum of children costs)`, with empty cubes costing
//! nothing and occupied leaves costing `h^beta`. Children are always summed in
//! the same fixed order, so the full DP, the incremental [`ContentEngine`] and
//! the brute-force oracle agree bit for bit.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::lattice::{node_coords, node_index, DyadicCube, LeafSet, Region, RootCube, MAX_DIM};

/// Guard on the number of covers the oracle may enumerate.
pub const ORACLE_LIMIT: u64 = 1 << 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Dyadic,
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContentParams {
    beta: f64,
    flavor: Flavor,
    omega: f64,
    comparability: Option<f64>,
}

impl ContentParams {
    pub fn new(beta: f64, flavor: Flavor) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() || beta > MAX_DIM as f64 {
            return Err(Error::param(format!("beta must lie in (0, n], got {beta}")));
        }
        let omega = std::f64::consts::PI.powf(beta / 2.0) / gamma(beta / 2.0 + 1.0);
        Ok(ContentParams { beta, flavor, omega, comparability: None })
    }

    pub fn dyadic(beta: f64) -> Result<Self> {
        Self::new(beta, Flavor::Dyadic)
    }

    pub fn ball(beta: f64) -> Result<Self> {
        Self::new(beta, Flavor::Ball)
    }

    /// Overrides the dyadic/ball comparability constant.
    pub fn with_comparability(mut self, c: f64) -> Result<Self> {
        if !(c >= 1.0) || !c.is_finite() {
            return Err(Error::param("comparability constant must be finite and >= 1"));
        }
        self.comparability = Some(c);
        Ok(self)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn comparability(&self, dim: usize) -> f64 {
        self.comparability.unwrap_or_else(|| {
            (2f64).powf(self.beta) * (dim as f64).powf(self.beta / 2.0) * (1.0f64).max(1.0 / self.omega)
        })
    }

    pub fn check_root(&self, root: &RootCube) -> Result<()> {
        if self.beta > root.dim() as f64 {
            return Err(Error::DimensionMismatch(format!(
                "beta = {} exceeds the dimension {}",
                self.beta,
                root.dim()
            )));
        }
        Ok(())
    }

    /// `l(Q)^beta` for each level `0..=L`.
    pub fn level_weights(&self, root: &RootCube) -> Vec<f64> {
        (0..=root.depth()).map(|k| root.side_at_level(k).powf(self.beta)).collect()
    }
}

#[inline]
fn node_cost(weight: f64, children: f64) -> f64 {
    if children < weight {
        children
    } else {
        weight
    }
}

#[inline]
fn child_indices(parent: usize, level: u32, dim: usize) -> impl Iterator<Item = usize> {
    let p = node_coords(parent, level, dim);
    let mut base = [0u32; MAX_DIM];
    for a in 0..dim {
        base[a] = 2 * p[a];
    }
    let base = node_index(&base, level + 1, dim);
    (0..1usize << dim).map(move |e| {
        let mut off = 0usize;
        for a in 0..dim {
            off = (off << (level + 1)) | ((e >> (dim - 1 - a)) & 1);
        }
        base + off
    })
}

#[inline]
fn parent_index(node: usize, level: u32, dim: usize) -> usize {
    let mut c = node_coords(node, level, dim);
    for x in c.iter_mut().take(dim) {
        *x >>= 1;
    }
    node_index(&c, level - 1, dim)
}

/// Per-level cost arrays of the DP for a leaf membership vector.
fn dp_levels(root: &RootCube, member: &[bool], weights: &[f64]) -> Vec<Vec<f64>> {
    let dim = root.dim();
    let depth = root.depth();
    let mut levels = vec![Vec::new(); depth as usize + 1];
    let wl = weights[depth as usize];
    levels[depth as usize] = member.iter().map(|&b| if b { wl } else { 0.0 }).collect();
    for k in (0..depth).rev() {
        let below = &levels[k as usize + 1];
        let count = 1usize << (dim as u32 * k);
        let w = weights[k as usize];
        let cur: Vec<f64> = (0..count)
            .map(|q| {
                let mut sum = 0.0;
                for c in child_indices(q, k, dim) {
                    sum += below[c];
                }
                node_cost(w, sum)
            })
            .collect();
        levels[k as usize] = cur;
    }
    levels
}

fn check_set(e: &LeafSet, params: &ContentParams) -> Result<()> {
    params.check_root(e.root())
}

/// Exact dyadic content `H^{beta,Q0}(E)`.
pub fn dyadic_content(e: &LeafSet, params: &ContentParams) -> Result<f64> {
    check_set(e, params)?;
    let w = params.level_weights(e.root());
    Ok(dp_levels(e.root(), e.bits(), &w)[0][0])
}

/// Dyadic content of a region (cube, box or set) of the root.
pub fn region_content(root: &RootCube, region: Region<'_>, params: &ContentParams) -> Result<f64> {
    region.validate(root)?;
    params.check_root(root)?;
    let mut eng = ContentEngine::new(root, params);
    eng.begin(region.container(root));
    for leaf in region.leaves(root) {
        eng.insert(leaf);
    }
    Ok(eng.value())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverWitness {
    pub cubes: Vec<DyadicCube>,
    pub weight: f64,
}

impl CoverWitness {
    pub fn covers(&self, e: &LeafSet) -> bool {
        e.members().all(|leaf| self.cubes.iter().any(|q| q.contains_leaf(e.root(), leaf)))
    }
}

/// Canonical minimal cover: on ties the coarser cube is kept.
pub fn minimal_cover(e: &LeafSet, params: &ContentParams) -> Result<CoverWitness> {
    check_set(e, params)?;
    let root = e.root();
    let dim = root.dim();
    let depth = root.depth();
    let w = params.level_weights(root);
    let levels = dp_levels(root, e.bits(), &w);
    let mut cubes = Vec::new();
    let mut stack = vec![(0u32, 0usize)];
    while let Some((k, q)) = stack.pop() {
        if levels[k as usize][q] == 0.0 {
            continue;
        }
        let take = k == depth || {
            let mut sum = 0.0;
            for c in child_indices(q, k, dim) {
                sum += levels[k as usize + 1][c];
            }
            w[k as usize] <= sum
        };
        if take {
            cubes.push(DyadicCube::new(k, dim, node_coords(q, k, dim))?);
        } else {
            let kids: Vec<usize> = child_indices(q, k, dim).collect();
            stack.extend(kids.into_iter().rev().map(|c| (k + 1, c)));
        }
    }
    Ok(CoverWitness { cubes, weight: levels[0][0] })
}

/// Brute force over every dyadic cover of `E` using cubes of level at most
/// `max_level`. With `max_level = L` this equals [`dyadic_content`].
pub fn content_oracle(e: &LeafSet, params: &ContentParams, max_level: u32) -> Result<f64> {
    check_set(e, params)?;
    let root = e.root();
    if max_level > root.depth() {
        return Err(Error::param("max_level exceeds the leaf depth"));
    }
    let dim = root.dim();
    let w = params.level_weights(root);
    // occupancy per level
    let mut occ = vec![Vec::new(); root.depth() as usize + 1];
    occ[root.depth() as usize] = e.bits().to_vec();
    for k in (0..root.depth()).rev() {
        let below = &occ[k as usize + 1];
        occ[k as usize] = (0..1usize << (dim as u32 * k))
            .map(|q| child_indices(q, k, dim).any(|c| below[c]))
            .collect();
    }

    fn count(occ: &[Vec<bool>], k: u32, q: usize, max: u32, dim: usize) -> u64 {
        if !occ[k as usize][q] || k == max {
            return 1;
        }
        let prod = child_indices(q, k, dim)
            .map(|c| count(occ, k + 1, c, max, dim))
            .fold(1u64, |a, b| a.saturating_mul(b));
        prod.saturating_add(1)
    }
    let n = count(&occ, 0, 0, max_level, dim);
    if n > ORACLE_LIMIT {
        return Err(Error::InfeasibleSize(format!("{n} covers exceed the limit {ORACLE_LIMIT}")));
    }

    fn values(occ: &[Vec<bool>], w: &[f64], k: u32, q: usize, max: u32, dim: usize) -> Vec<f64> {
        if !occ[k as usize][q] {
            return vec![0.0];
        }
        let mut out = vec![w[k as usize]];
        if k < max {
            let mut acc = vec![0.0];
            for c in child_indices(q, k, dim) {
                let vc = values(occ, w, k + 1, c, max, dim);
                acc = acc.iter().flat_map(|&a| vc.iter().map(move |&b| a + b)).collect();
            }
            out.extend(acc);
        }
        out
    }
    let all = values(&occ, &w, 0, 0, max_level, dim);
    Ok(all.into_iter().fold(f64::INFINITY, node_cost))
}

/// Interval `(lo, hi)` enclosing the ball-normalized content of `E`.
pub fn ball_content_estimate(e: &LeafSet, params: &ContentParams) -> Result<(f64, f64)> {
    if params.flavor() != Flavor::Ball {
        return Err(Error::param("ball_content_estimate needs ball-flavored params"));
    }
    let root = e.root();
    let h = dyadic_content(e, params)?;
    let Some(bb) = e.bounding_box() else {
        return Ok((0.0, 0.0));
    };
    let dim = root.dim();
    let beta = params.beta();
    let cstar = params.comparability(dim);
    // a cube of side s sits in a ball of radius s*sqrt(n)/2
    let per_cube = params.omega() * ((dim as f64).sqrt() / 2.0).powf(beta);
    let leaf = root.leaf_side();
    let radius = 0.5
        * leaf
        * bb.lo()
            .iter()
            .zip(bb.hi())
            .map(|(&l, &u)| ((u - l) as f64).powi(2))
            .sum::<f64>()
            .sqrt();
    let one_ball = params.omega() * radius.powf(beta);
    let hi = (cstar * h).min(per_cube * h).min(one_ball);
    let lo = (h / cstar).min(hi);
    Ok((lo, hi))
}

/// Incremental dyadic content of a growing set inside one dyadic container.
///
/// Inserting a leaf updates its ancestors up to the container in
/// `O(L 2^n)`; values match [`dyadic_content`] exactly.
#[derive(Clone, Debug)]
pub struct ContentEngine {
    dim: usize,
    depth: u32,
    weights: Vec<f64>,
    levels: Vec<Vec<f64>>,
    touched: Vec<usize>,
    top_level: u32,
    top_index: usize,
}

impl ContentEngine {
    pub fn new(root: &RootCube, params: &ContentParams) -> Self {
        let dim = root.dim();
        let depth = root.depth();
        ContentEngine {
            dim,
            depth,
            weights: params.level_weights(root),
            levels: (0..=depth).map(|k| vec![0.0; 1usize << (dim as u32 * k)]).collect(),
            touched: Vec::new(),
            top_level: 0,
            top_index: 0,
        }
    }

    /// Clears the set and fixes the dyadic container all insertions lie in.
    pub fn begin(&mut self, container: DyadicCube) {
        self.reset();
        self.top_level = container.level();
        self.top_index = container.index();
    }

    pub fn reset(&mut self) {
        let touched = std::mem::take(&mut self.touched);
        for &leaf in &touched {
            let mut idx = leaf;
            self.levels[self.depth as usize][idx] = 0.0;
            for k in (self.top_level..self.depth).rev() {
                idx = parent_index(idx, k + 1, self.dim);
                self.levels[k as usize][idx] = 0.0;
            }
        }
        self.touched = touched;
        self.touched.clear();
    }

    pub fn insert(&mut self, leaf: usize) {
        let depth = self.depth as usize;
        if self.levels[depth][leaf] != 0.0 {
            return;
        }
        self.levels[depth][leaf] = self.weights[depth];
        self.touched.push(leaf);
        let mut idx = leaf;
        for k in (self.top_level..self.depth).rev() {
            idx = parent_index(idx, k + 1, self.dim);
            let below = &self.levels[k as usize + 1];
            let mut sum = 0.0;
            for c in child_indices(idx, k, self.dim) {
                sum += below[c];
            }
            let new = node_cost(self.weights[k as usize], sum);
            let slot = &mut self.levels[k as usize][idx];
            if *slot == new {
                break;
            }
            *slot = new;
        }
    }

    /// Content of the current set.
    pub fn value(&self) -> f64 {
        self.levels[self.top_level as usize][self.top_index]
    }

    pub fn len(&self) -> usize {
        self.touched.len()
    }

    pub fn is_empty(&self) -> bool {
        self.touched.is_empty()
    }
}
