//! Dyadic geometry on a root cube: leaves, dyadic cubes, grid-aligned cubes,
//! cell-constant functions and leaf sets.
//!
//! Leaves are indexed row-major with the last coordinate varying fastest.

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LEAF_BUDGET: usize = 1 << 20;
pub const DEFAULT_FAMILY_BUDGET: usize = 1 << 16;
pub const MAX_DIM: usize = 3;

pub type Coords = [u32; MAX_DIM];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCube {
    dim: usize,
    depth: u32,
    side: f64,
    origin: Vec<f64>,
}

impl RootCube {
    pub fn new(dim: usize, depth: u32, side: f64, origin: &[f64]) -> Result<Self> {
        Self::with_budget(dim, depth, side, origin, DEFAULT_LEAF_BUDGET)
    }

    /// Unit cube at the origin.
    pub fn unit(dim: usize, depth: u32) -> Result<Self> {
        Self::new(dim, depth, 1.0, &vec![0.0; dim])
    }

    pub fn with_budget(
        dim: usize,
        depth: u32,
        side: f64,
        origin: &[f64],
        budget: usize,
    ) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if depth == 0 {
            return Err(Error::param("leaf depth L must be at least 1"));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::param(format!("side must be positive, got {side}")));
        }
        if origin.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "origin has {} entries, dimension is {dim}",
                origin.len()
            )));
        }
        let needed = (dim as u32)
            .checked_mul(depth)
            .filter(|&b| b < 128)
            .map(|b| 1u128 << b)
            .unwrap_or(u128::MAX);
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        Ok(RootCube { dim, depth, side, origin: origin.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn per_axis(&self) -> u32 {
        1 << self.depth
    }

    pub fn leaf_count(&self) -> usize {
        1 << (self.dim as u32 * self.depth)
    }

    pub fn leaf_side(&self) -> f64 {
        self.side_at_level(self.depth)
    }

    pub fn leaf_volume(&self) -> f64 {
        self.leaf_side().powi(self.dim as i32)
    }

    pub fn side_at_level(&self, level: u32) -> f64 {
        self.side * (-(level as f64)).exp2()
    }

    /// Same geometry, one level deeper.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.dim, self.depth + 1, self.side, &self.origin)
    }

    pub fn leaf_coords(&self, leaf: usize) -> Coords {
        node_coords(leaf, self.depth, self.dim)
    }

    pub fn leaf_index(&self, coords: &Coords) -> usize {
        node_index(coords, self.depth, self.dim)
    }

    pub fn leaf_center(&self, leaf: usize) -> [f64; MAX_DIM] {
        let c = self.leaf_coords(leaf);
        let h = self.leaf_side();
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = self.origin[a] + (c[a] as f64 + 0.5) * h;
        }
        x
    }

    pub fn center(&self) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = self.origin[a] + 0.5 * self.side;
        }
        x
    }

    pub fn root_cube(&self) -> GridCube {
        GridCube::new(self.dim, [0; MAX_DIM], self.per_axis())
    }
}

pub(crate) fn node_index(coords: &Coords, level: u32, dim: usize) -> usize {
    let mut idx = 0usize;
    for a in 0..dim {
        idx = (idx << level) | coords[a] as usize;
    }
    idx
}

pub(crate) fn node_coords(mut idx: usize, level: u32, dim: usize) -> Coords {
    let mut c = [0u32; MAX_DIM];
    let mask = (1usize << level) - 1;
    for a in (0..dim).rev() {
        c[a] = (idx & mask) as u32;
        idx >>= level;
    }
    c
}

/// A node of the dyadic lattice of the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "CubeRepr", try_from = "CubeRepr")]
pub struct DyadicCube {
    level: u32,
    dim: u8,
    coords: Coords,
}

#[derive(Serialize, Deserialize)]
struct CubeRepr {
    level: u32,
    coords: Vec<u32>,
}

impl From<DyadicCube> for CubeRepr {
    fn from(q: DyadicCube) -> Self {
        CubeRepr { level: q.level, coords: q.coords().to_vec() }
    }
}

impl TryFrom<CubeRepr> for DyadicCube {
    type Error = String;

    fn try_from(r: CubeRepr) -> std::result::Result<Self, String> {
        if !(1..=MAX_DIM).contains(&r.coords.len()) {
            return Err(format!("cube has {} coordinates", r.coords.len()));
        }
        let mut c = [0; MAX_DIM];
        c[..r.coords.len()].copy_from_slice(&r.coords);
        DyadicCube::new(r.level, r.coords.len(), c).map_err(|e| e.to_string())
    }
}

impl DyadicCube {
    pub fn new(level: u32, dim: usize, coords: Coords) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if level >= 32 || coords[..dim].iter().any(|&c| (c as u64) >= 1u64 << level) {
            return Err(Error::OutsideRoot);
        }
        Ok(DyadicCube { level, dim: dim as u8, coords })
    }

    pub fn root(dim: usize) -> Self {
        DyadicCube { level: 0, dim: dim as u8, coords: [0; MAX_DIM] }
    }

    /// The level-`level` ancestor of a leaf.
    pub fn ancestor_of_leaf(root: &RootCube, leaf: usize, level: u32) -> Self {
        let c = root.leaf_coords(leaf);
        let s = root.depth() - level;
        let mut coords = [0; MAX_DIM];
        for a in 0..root.dim() {
            coords[a] = c[a] >> s;
        }
        DyadicCube { level, dim: root.dim() as u8, coords }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords[..self.dim as usize]
    }

    pub fn side(&self, root: &RootCube) -> f64 {
        root.side_at_level(self.level)
    }

    pub fn index(&self) -> usize {
        node_index(&self.coords, self.level, self.dim())
    }

    pub fn parent(&self) -> Option<Self> {
        if self.level == 0 {
            return None;
        }
        let mut coords = self.coords;
        for c in coords.iter_mut() {
            *c >>= 1;
        }
        Some(DyadicCube { level: self.level - 1, dim: self.dim, coords })
    }

    pub fn children(&self) -> Vec<Self> {
        let dim = self.dim();
        (0..1u32 << dim)
            .map(|e| {
                let mut coords = [0; MAX_DIM];
                for a in 0..dim {
                    coords[a] = 2 * self.coords[a] + ((e >> (dim - 1 - a)) & 1);
                }
                DyadicCube { level: self.level + 1, dim: self.dim, coords }
            })
            .collect()
    }

    pub fn to_grid(&self, root: &RootCube) -> GridCube {
        let width = 1u32 << (root.depth() - self.level);
        let mut lo = [0; MAX_DIM];
        for a in 0..self.dim() {
            lo[a] = self.coords[a] * width;
        }
        GridCube::new(self.dim(), lo, width)
    }

    pub fn contains_leaf(&self, root: &RootCube, leaf: usize) -> bool {
        Self::ancestor_of_leaf(root, leaf, self.level) == *self
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}{:?}", self.level, self.coords())
    }
}

/// Axis-aligned cube whose corners are leaf corners, in leaf units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCube {
    dim: u8,
    lo: Coords,
    width: u32,
}

impl GridCube {
    pub fn new(dim: usize, lo: Coords, width: u32) -> Self {
        GridCube { dim: dim as u8, lo, width }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn lo(&self) -> &[u32] {
        &self.lo[..self.dim as usize]
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn side(&self, root: &RootCube) -> f64 {
        self.width as f64 * root.leaf_side()
    }

    pub fn leaf_count(&self) -> usize {
        (self.width as usize).pow(self.dim as u32)
    }

    pub fn to_box(&self) -> GridBox {
        let mut hi = [0; MAX_DIM];
        for a in 0..self.dim() {
            hi[a] = self.lo[a] + self.width;
        }
        GridBox { dim: self.dim, lo: self.lo, hi }
    }

    pub fn contains(&self, c: &Coords) -> bool {
        (0..self.dim()).all(|a| c[a] >= self.lo[a] && c[a] < self.lo[a] + self.width)
    }

    pub fn as_dyadic(&self, root: &RootCube) -> Option<DyadicCube> {
        if !self.width.is_power_of_two() {
            return None;
        }
        let s = self.width.trailing_zeros();
        if s > root.depth() || self.lo().iter().any(|&l| l % self.width != 0) {
            return None;
        }
        let mut coords = [0; MAX_DIM];
        for a in 0..self.dim() {
            coords[a] = self.lo[a] >> s;
        }
        Some(DyadicCube { level: root.depth() - s, dim: self.dim, coords })
    }

    /// Concentric dilation by `factor = 2^k`, rounded outward to leaf
    /// boundaries and clipped to the root.
    pub fn dilate_clipped(&self, root: &RootCube, k: u32) -> Result<GridBox> {
        let m = root.per_axis() as i64;
        let w = self.width as i64;
        let big = w << k;
        let mut lo = [0; MAX_DIM];
        let mut hi = [0; MAX_DIM];
        for a in 0..self.dim() {
            // doubled units keep the center integral
            let c2 = 2 * self.lo[a] as i64 + w;
            let l = (c2 - big).div_euclid(2);
            let h = (c2 + big + 1).div_euclid(2);
            let (l, h) = (l.max(0), h.min(m));
            if l >= h {
                return Err(Error::Degenerate("dilated cube misses the root".into()));
            }
            lo[a] = l as u32;
            hi[a] = h as u32;
        }
        Ok(GridBox { dim: self.dim, lo, hi })
    }
}

/// Half-open box of leaves `[lo, hi)` per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridBox {
    dim: u8,
    lo: Coords,
    hi: Coords,
}

impl GridBox {
    pub fn new(dim: usize, lo: Coords, hi: Coords) -> Result<Self> {
        if (0..dim).any(|a| lo[a] >= hi[a]) {
            return Err(Error::Degenerate("empty box".into()));
        }
        Ok(GridBox { dim: dim as u8, lo, hi })
    }

    pub fn lo(&self) -> &[u32] {
        &self.lo[..self.dim as usize]
    }

    pub fn hi(&self) -> &[u32] {
        &self.hi[..self.dim as usize]
    }

    pub fn contains(&self, c: &Coords) -> bool {
        (0..self.dim as usize).all(|a| c[a] >= self.lo[a] && c[a] < self.hi[a])
    }

    pub fn leaves(&self, root: &RootCube) -> Vec<usize> {
        let dim = self.dim as usize;
        let mut out = Vec::new();
        let mut c = self.lo;
        loop {
            out.push(root.leaf_index(&c));
            let mut a = dim;
            loop {
                if a == 0 {
                    return out;
                }
                a -= 1;
                c[a] += 1;
                if c[a] < self.hi[a] {
                    break;
                }
                c[a] = self.lo[a];
            }
        }
    }

    /// Smallest dyadic cube containing the box.
    pub fn container(&self, root: &RootCube) -> DyadicCube {
        let dim = self.dim as usize;
        let mut s = 0;
        while s < root.depth()
            && (0..dim).any(|a| (self.lo[a] >> s) != ((self.hi[a] - 1) >> s))
        {
            s += 1;
        }
        let mut coords = [0; MAX_DIM];
        for a in 0..dim {
            coords[a] = self.lo[a] >> s;
        }
        DyadicCube { level: root.depth() - s, dim: self.dim, coords }
    }

    fn check(&self, root: &RootCube) -> Result<()> {
        if self.dim as usize != root.dim() {
            return Err(Error::DimensionMismatch("box and root".into()));
        }
        if self.hi().iter().any(|&h| h > root.per_axis()) {
            return Err(Error::OutsideRoot);
        }
        Ok(())
    }
}

/// Integration or restriction region.
#[derive(Clone, Copy, Debug)]
pub enum Region<'a> {
    Root,
    Cube(GridCube),
    Box(GridBox),
    Set(&'a LeafSet),
}

impl<'a> From<GridCube> for Region<'a> {
    fn from(q: GridCube) -> Self {
        Region::Cube(q)
    }
}

impl<'a> From<&'a LeafSet> for Region<'a> {
    fn from(e: &'a LeafSet) -> Self {
        Region::Set(e)
    }
}

impl Region<'_> {
    pub fn validate(&self, root: &RootCube) -> Result<()> {
        match self {
            Region::Root => Ok(()),
            Region::Cube(q) => q.to_box().check(root),
            Region::Box(b) => b.check(root),
            Region::Set(e) => {
                if e.root() != root {
                    Err(Error::DimensionMismatch("leaf set lives on another root".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn leaves(&self, root: &RootCube) -> Vec<usize> {
        match self {
            Region::Root => (0..root.leaf_count()).collect(),
            Region::Cube(q) => q.to_box().leaves(root),
            Region::Box(b) => b.leaves(root),
            Region::Set(e) => e.members().collect(),
        }
    }

    pub fn container(&self, root: &RootCube) -> DyadicCube {
        match self {
            Region::Root | Region::Set(_) => DyadicCube::root(root.dim()),
            Region::Cube(q) => q.to_box().container(root),
            Region::Box(b) => b.container(root),
        }
    }

    pub fn contains(&self, root: &RootCube, leaf: usize) -> bool {
        match self {
            Region::Root => true,
            Region::Cube(q) => q.contains(&root.leaf_coords(leaf)),
            Region::Box(b) => b.contains(&root.leaf_coords(leaf)),
            Region::Set(e) => e.contains(leaf),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[derive(Default)]
pub enum CubeFamily {
    #[default]
    Dyadic,
    ShiftedDyadic,
    GridAligned { budget: usize },
}


impl fmt::Display for CubeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CubeFamily::Dyadic => f.write_str("dyadic"),
            CubeFamily::ShiftedDyadic => f.write_str("shifted-dyadic"),
            CubeFamily::GridAligned { budget } if *budget == DEFAULT_FAMILY_BUDGET => {
                f.write_str("grid-aligned-all")
            }
            CubeFamily::GridAligned { budget } => write!(f, "grid-aligned-all:{budget}"),
        }
    }
}

impl FromStr for CubeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        match (name.trim(), arg) {
            ("dyadic", None) => Ok(CubeFamily::Dyadic),
            ("shifted" | "shifted-dyadic", None) => Ok(CubeFamily::ShiftedDyadic),
            ("grid" | "grid-aligned" | "grid-aligned-all", arg) => {
                let budget = match arg {
                    Some(b) => b.trim().parse().map_err(|_| Error::Parse(format!("bad budget `{b}`")))?,
                    None => DEFAULT_FAMILY_BUDGET,
                };
                Ok(CubeFamily::GridAligned { budget })
            }
            _ => Err(Error::Parse(format!("unknown cube family `{s}`"))),
        }
    }
}

fn sort_cubes(cubes: &mut Vec<GridCube>) {
    cubes.sort_by_key(|q| (Reverse(q.width), q.lo));
    cubes.dedup();
}

fn shift_set(w: u32) -> Vec<u32> {
    let mut s = vec![0, w / 3, 2 * w / 3];
    s.dedup();
    s
}

fn for_each_tuple(dim: usize, ranges: &[Vec<u32>], mut f: impl FnMut(&Coords)) {
    if ranges.iter().take(dim).any(|r| r.is_empty()) {
        return;
    }
    let mut idx = [0usize; MAX_DIM];
    loop {
        let mut c = [0; MAX_DIM];
        for a in 0..dim {
            c[a] = ranges[a][idx[a]];
        }
        f(&c);
        let mut a = dim;
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < ranges[a].len() {
                break;
            }
            idx[a] = 0;
        }
    }
}

fn dyadic_cubes(root: &RootCube) -> Vec<GridCube> {
    let mut out = Vec::new();
    for level in 0..=root.depth() {
        let per = 1u32 << level;
        let r: Vec<u32> = (0..per).collect();
        let ranges = vec![r; root.dim()];
        let w = root.per_axis() >> level;
        for_each_tuple(root.dim(), &ranges, |c| {
            let mut lo = [0; MAX_DIM];
            for a in 0..root.dim() {
                lo[a] = c[a] * w;
            }
            out.push(GridCube::new(root.dim(), lo, w));
        });
    }
    out
}

fn shifted_cubes(root: &RootCube) -> Vec<GridCube> {
    let m = root.per_axis();
    let mut out = Vec::new();
    for level in 0..=root.depth() {
        let w = m >> level;
        let mut starts: Vec<u32> = shift_set(w)
            .into_iter()
            .flat_map(|s| (0..).map(move |j| s + j * w).take_while(move |&l| l + w <= m))
            .collect();
        starts.sort_unstable();
        starts.dedup();
        let ranges = vec![starts; root.dim()];
        for_each_tuple(root.dim(), &ranges, |c| out.push(GridCube::new(root.dim(), *c, w)));
    }
    sort_cubes(&mut out);
    out
}

fn grid_count(m: u32, dim: usize) -> u128 {
    (1..=m).map(|w| ((m - w + 1) as u128).pow(dim as u32)).sum()
}

fn grid_decode(mut idx: u128, m: u32, dim: usize) -> GridCube {
    for w in (1..=m).rev() {
        let per = (m - w + 1) as u128;
        let block = per.pow(dim as u32);
        if idx < block {
            let mut lo = [0; MAX_DIM];
            for a in (0..dim).rev() {
                lo[a] = (idx % per) as u32;
                idx /= per;
            }
            return GridCube::new(dim, lo, w);
        }
        idx -= block;
    }
    unreachable!("index beyond grid-aligned family")
}

fn grid_cubes(root: &RootCube, budget: usize) -> Result<Vec<GridCube>> {
    let m = root.per_axis();
    let dim = root.dim();
    let total = grid_count(m, dim);
    if total <= budget as u128 {
        let mut out = Vec::with_capacity(total as usize);
        for i in 0..total {
            out.push(grid_decode(i, m, dim));
        }
        sort_cubes(&mut out);
        return Ok(out);
    }
    let mut out = shifted_cubes(root);
    if out.len() > budget {
        return Err(Error::BudgetExceeded { needed: out.len() as u128, budget });
    }
    let rest = (budget - out.len()) as u128;
    let seen: BTreeSet<(Reverse<u32>, Coords)> =
        out.iter().map(|q| (Reverse(q.width), q.lo)).collect();
    for j in 0..rest {
        let q = grid_decode(j * total / rest, m, dim);
        if !seen.contains(&(Reverse(q.width), q.lo)) {
            out.push(q);
        }
    }
    sort_cubes(&mut out);
    Ok(out)
}

/// Cubes of `family`, level-major (widest first) then by lower corner.
/// With `containing`, only cubes containing that leaf are returned.
pub fn enumerate_cubes(
    root: &RootCube,
    family: CubeFamily,
    containing: Option<usize>,
) -> Result<Vec<GridCube>> {
    if let Some(leaf) = containing {
        if leaf >= root.leaf_count() {
            return Err(Error::OutsideRoot);
        }
        if family == CubeFamily::Dyadic {
            return Ok((0..=root.depth())
                .map(|k| DyadicCube::ancestor_of_leaf(root, leaf, k).to_grid(root))
                .collect());
        }
    }
    let all = match family {
        CubeFamily::Dyadic => dyadic_cubes(root),
        CubeFamily::ShiftedDyadic => shifted_cubes(root),
        CubeFamily::GridAligned { budget } => grid_cubes(root, budget)?,
    };
    Ok(match containing {
        None => all,
        Some(leaf) => {
            let c = root.leaf_coords(leaf);
            all.into_iter().filter(|q| q.contains(&c)).collect()
        }
    })
}

/// All dyadic cubes, level-major.
pub fn dyadic_lattice(root: &RootCube) -> Vec<DyadicCube> {
    dyadic_cubes(root)
        .iter()
        .map(|q| q.as_dyadic(root).expect("dyadic enumeration"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    root: RootCube,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(root: RootCube, values: Vec<f64>) -> Result<Self> {
        if values.len() != root.leaf_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} leaves",
                values.len(),
                root.leaf_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite value at leaf {i}")));
        }
        Ok(GridFunction { root, values })
    }

    pub fn zeros(root: &RootCube) -> Self {
        Self::constant(root, 0.0)
    }

    pub fn constant(root: &RootCube, c: f64) -> Self {
        GridFunction { root: root.clone(), values: vec![c; root.leaf_count()] }
    }

    /// Samples `f` at leaf centers.
    pub fn from_fn(root: &RootCube, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let values = (0..root.leaf_count())
            .map(|i| f(&root.leaf_center(i)[..root.dim()]))
            .collect();
        Self::new(root.clone(), values)
    }

    pub(crate) fn from_parts_unchecked(root: RootCube, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), root.leaf_count());
        GridFunction { root, values }
    }

    pub fn root(&self) -> &RootCube {
        &self.root
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, leaf: usize) -> f64 {
        self.values[leaf]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction { root: self.root.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_root(other)?;
        Ok(GridFunction {
            root: self.root.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    pub fn same_root(&self, other: &GridFunction) -> Result<()> {
        if self.root != other.root {
            return Err(Error::DimensionMismatch("functions live on different roots".into()));
        }
        Ok(())
    }

    /// Multiplies by the indicator of `region`.
    pub fn masked(&self, region: Region<'_>) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for i in region.leaves(&self.root) {
            values[i] = self.values[i];
        }
        GridFunction { root: self.root.clone(), values }
    }

    pub fn restrict(&self, q: &GridCube) -> Result<GridView<'_>> {
        Region::Cube(*q).validate(&self.root)?;
        Ok(GridView { f: self, leaves: q.to_box().leaves(&self.root) })
    }

    /// Re-samples onto a root one level deeper; each leaf is copied into its children.
    pub fn refine(&self) -> Result<Self> {
        let fine = self.root.refined()?;
        let dim = fine.dim();
        let values = (0..fine.leaf_count())
            .map(|i| {
                let mut c = fine.leaf_coords(i);
                for x in c.iter_mut().take(dim) {
                    *x >>= 1;
                }
                self.values[self.root.leaf_index(&c)]
            })
            .collect();
        Ok(GridFunction { root: fine, values })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let (root, values) = if is_binary(path) {
            read_binary(path)?
        } else {
            read_text(path)?
        };
        GridFunction::new(root, values)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if is_binary(path) {
            write_binary(path, &self.root, &self.values)
        } else {
            write_text(path, &self.root, self.values.iter().map(|v| v.to_string()))
        }
    }
}

/// Read-only view of a function on the leaves of a cube.
#[derive(Clone, Debug)]
pub struct GridView<'a> {
    f: &'a GridFunction,
    leaves: Vec<usize>,
}

impl GridView<'_> {
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.leaves.iter().map(|&i| self.f.values[i])
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.iter().collect()
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafSet {
    root: RootCube,
    bits: Vec<bool>,
}

// RootCube holds finite floats only, so equality is reflexive.
impl Eq for RootCube {}

impl LeafSet {
    pub fn empty(root: &RootCube) -> Self {
        LeafSet { root: root.clone(), bits: vec![false; root.leaf_count()] }
    }

    pub fn full(root: &RootCube) -> Self {
        LeafSet { root: root.clone(), bits: vec![true; root.leaf_count()] }
    }

    pub fn from_bits(root: &RootCube, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != root.leaf_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} bits for {} leaves",
                bits.len(),
                root.leaf_count()
            )));
        }
        Ok(LeafSet { root: root.clone(), bits })
    }

    pub fn from_leaves(root: &RootCube, leaves: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut s = Self::empty(root);
        for i in leaves {
            if i >= s.bits.len() {
                return Err(Error::OutsideRoot);
            }
            s.bits[i] = true;
        }
        Ok(s)
    }

    pub fn region(root: &RootCube, region: Region<'_>) -> Result<Self> {
        region.validate(root)?;
        Self::from_leaves(root, region.leaves(root))
    }

    /// `{x : f(x) >= t}`.
    pub fn superlevel(f: &GridFunction, t: f64) -> Self {
        LeafSet { root: f.root.clone(), bits: f.values.iter().map(|&v| v >= t).collect() }
    }

    /// `{x : f(x) > t}`.
    pub fn strict_superlevel(f: &GridFunction, t: f64) -> Self {
        LeafSet { root: f.root.clone(), bits: f.values.iter().map(|&v| v > t).collect() }
    }

    pub fn root(&self) -> &RootCube {
        &self.root
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn contains(&self, leaf: usize) -> bool {
        self.bits[leaf]
    }

    pub fn insert(&mut self, leaf: usize) {
        self.bits[leaf] = true;
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    fn combine(&self, other: &LeafSet, f: impl Fn(bool, bool) -> bool) -> Self {
        assert_eq!(self.root, other.root, "leaf sets on different roots");
        LeafSet {
            root: self.root.clone(),
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &LeafSet) -> Self {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &LeafSet) -> Self {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &LeafSet) -> Self {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> Self {
        LeafSet { root: self.root.clone(), bits: self.bits.iter().map(|&b| !b).collect() }
    }

    pub fn is_subset(&self, other: &LeafSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn indicator(&self) -> GridFunction {
        GridFunction {
            root: self.root.clone(),
            values: self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Bounding box in leaf units, `None` when empty.
    pub fn bounding_box(&self) -> Option<GridBox> {
        let dim = self.root.dim();
        let mut lo = [u32::MAX; MAX_DIM];
        let mut hi = [0; MAX_DIM];
        let mut any = false;
        for i in self.members() {
            any = true;
            let c = self.root.leaf_coords(i);
            for a in 0..dim {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a] + 1);
            }
        }
        any.then_some(GridBox { dim: dim as u8, lo, hi })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let f = GridFunction::read(path)?;
        let bits = f.values.iter().map(|&v| v != 0.0).collect();
        Ok(LeafSet { root: f.root, bits })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if is_binary(path) {
            let v: Vec<f64> = self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            write_binary(path, &self.root, &v)
        } else {
            write_text(path, &self.root, self.bits.iter().map(|&b| if b { "1" } else { "0" }))
        }
    }
}

fn is_binary(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("bin" | "f64"))
}

fn header_root(fields: &[f64]) -> Result<RootCube> {
    let bad = || Error::Parse("header must read `n L side origin...`".into());
    if fields.len() < 3 {
        return Err(bad());
    }
    let (n, l) = (fields[0], fields[1]);
    if n.fract() != 0.0 || l.fract() != 0.0 || n < 1.0 || l < 1.0 {
        return Err(bad());
    }
    let n = n as usize;
    if fields.len() != 3 + n {
        return Err(bad());
    }
    RootCube::new(n, l as u32, fields[2], &fields[3..])
}

fn read_text(path: &Path) -> Result<(RootCube, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let fields = header
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad header token `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    let root = header_root(&fields)?;
    let values = lines
        .map(|l| l.parse::<f64>().map_err(|_| Error::Parse(format!("bad value `{l}`"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((root, values))
}

fn write_text<S: fmt::Display>(path: &Path, root: &RootCube, values: impl Iterator<Item = S>) -> Result<()> {
    use std::fmt::Write as _;
    let mut s = format!("{} {} {}", root.dim, root.depth, root.side);
    for o in &root.origin {
        let _ = write!(s, " {o}");
    }
    s.push('\n');
    for v in values {
        let _ = writeln!(s, "{v}");
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn read_binary(path: &Path) -> Result<(RootCube, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse(format!("{}: length is not a multiple of 8", path.display())));
    }
    let words: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let n = *words.first().ok_or_else(|| Error::Parse("empty binary file".into()))?;
    let head = 3 + n.max(0.0) as usize;
    if words.len() < head {
        return Err(Error::Parse("truncated binary header".into()));
    }
    let root = header_root(&words[..head])?;
    Ok((root, words[head..].to_vec()))
}

fn write_binary(path: &Path, root: &RootCube, values: &[f64]) -> Result<()> {
    let mut out = Vec::with_capacity(8 * (3 + root.dim + values.len()));
    let head = [root.dim as f64, root.depth as f64, root.side];
    for v in head.iter().chain(&root.origin).chain(values) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_root_examples() {
        let r = RootCube::new(1, 3, 1.0, &[0.0]).unwrap();
        assert_eq!(r.leaf_count(), 8);
        assert_eq!(r.leaf_side(), 0.125);
        let r = RootCube::new(2, 2, 2.0, &[0.0, 0.0]).unwrap();
        assert_eq!(r.leaf_count(), 16);
        assert_eq!(r.leaf_side(), 0.5);
        assert!(matches!(RootCube::new(2, 11, 1.0, &[0.0, 0.0]), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(RootCube::new(4, 1, 1.0, &[0.0; 4]), Err(Error::InvalidDimension(4))));
    }

    #[test]
    fn enumerate_examples() {
        let r = RootCube::unit(1, 3).unwrap();
        let c = enumerate_cubes(&r, CubeFamily::Dyadic, Some(5)).unwrap();
        assert_eq!(c.len(), 4);
        for (k, q) in c.iter().enumerate() {
            assert_eq!(q.as_dyadic(&r).unwrap().level(), k as u32);
            assert!(q.contains(&r.leaf_coords(5)));
        }
        let r2 = RootCube::unit(2, 2).unwrap();
        assert_eq!(enumerate_cubes(&r2, CubeFamily::Dyadic, None).unwrap().len(), 21);
        let r = RootCube::unit(1, 2).unwrap();
        let g = enumerate_cubes(&r, CubeFamily::GridAligned { budget: 1000 }, None).unwrap();
        assert_eq!(g.len(), 10);
    }

    #[test]
    fn families_are_nested() {
        for (dim, depth) in [(1, 5), (2, 3)] {
            let r = RootCube::unit(dim, depth).unwrap();
            let d = enumerate_cubes(&r, CubeFamily::Dyadic, None).unwrap();
            let s = enumerate_cubes(&r, CubeFamily::ShiftedDyadic, None).unwrap();
            let g = enumerate_cubes(&r, CubeFamily::GridAligned { budget: 1 << 20 }, None).unwrap();
            let gs = enumerate_cubes(&r, CubeFamily::GridAligned { budget: s.len() + 7 }, None).unwrap();
            assert!(d.iter().all(|q| s.contains(q)));
            assert!(s.iter().all(|q| g.contains(q)));
            assert!(s.iter().all(|q| gs.contains(q)));
            assert!(gs.len() <= s.len() + 7);
        }
    }

    #[test]
    fn ancestor_chain_is_nested() {
        let r = RootCube::unit(2, 4).unwrap();
        for leaf in [0, 17, 255] {
            let chain = enumerate_cubes(&r, CubeFamily::Dyadic, Some(leaf)).unwrap();
            for w in chain.windows(2) {
                let inner = w[1].to_box().leaves(&r);
                let outer = w[0].to_box().leaves(&r);
                assert!(inner.iter().all(|i| outer.contains(i)));
            }
        }
    }

    #[test]
    fn restrict_examples() {
        let r = RootCube::unit(1, 2).unwrap();
        let f = GridFunction::new(r.clone(), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let right = DyadicCube::new(1, 1, [1, 0, 0]).unwrap().to_grid(&r);
        assert_eq!(f.restrict(&right).unwrap().to_vec(), vec![3.0, 4.0]);
        assert_eq!(f.restrict(&r.root_cube()).unwrap().to_vec(), f.values());
        let left = LeafSet::from_leaves(&r, [0, 1]).unwrap().indicator();
        assert!(left.restrict(&right).unwrap().iter().all(|v| v == 0.0));
        let outside = GridCube::new(1, [3, 0, 0], 2);
        assert!(matches!(f.restrict(&outside), Err(Error::OutsideRoot)));
    }

    #[test]
    fn children_tile_parent() {
        let r = RootCube::unit(3, 3).unwrap();
        let q = DyadicCube::new(1, 3, [1, 0, 1]).unwrap();
        let kids = q.children();
        assert_eq!(kids.len(), 8);
        let mut leaves: Vec<usize> = kids.iter().flat_map(|c| c.to_grid(&r).to_box().leaves(&r)).collect();
        leaves.sort_unstable();
        let mut all = q.to_grid(&r).to_box().leaves(&r);
        all.sort_unstable();
        assert_eq!(leaves, all);
        assert!(kids.iter().all(|c| c.parent() == Some(q)));
    }

    #[test]
    fn dilation_rounds_outward_and_clips() {
        let r = RootCube::unit(1, 3).unwrap();
        let q = GridCube::new(1, [2, 0, 0], 1);
        let b = q.dilate_clipped(&r, 1).unwrap();
        assert_eq!((b.lo()[0], b.hi()[0]), (1, 4));
        let b = q.dilate_clipped(&r, 3).unwrap();
        assert_eq!((b.lo()[0], b.hi()[0]), (0, 7));
        let left = GridCube::new(1, [0, 0, 0], 4);
        let b = left.dilate_clipped(&r, 1).unwrap();
        assert_eq!((b.lo()[0], b.hi()[0]), (0, 6));
    }

    #[test]
    fn container_of_box() {
        let r = RootCube::unit(1, 3).unwrap();
        let b = GridBox::new(1, [2, 0, 0], [4, 0, 0]).unwrap();
        assert_eq!(b.container(&r), DyadicCube::new(2, 1, [1, 0, 0]).unwrap());
        let b = GridBox::new(1, [3, 0, 0], [5, 0, 0]).unwrap();
        assert_eq!(b.container(&r), DyadicCube::root(1));
    }

    #[test]
    fn file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let r = RootCube::new(2, 2, 1.5, &[-1.0, 0.25]).unwrap();
        let f = GridFunction::from_fn(&r, |x| x[0] * 3.1 - x[1].sin()).unwrap();
        for name in ["f.grid", "f.bin"] {
            let p = dir.path().join(name);
            f.write(&p).unwrap();
            assert_eq!(GridFunction::read(&p).unwrap(), f);
        }
        let e = LeafSet::from_leaves(&r, [1, 5, 9]).unwrap();
        let p = dir.path().join("e.set");
        e.write(&p).unwrap();
        assert_eq!(LeafSet::read(&p).unwrap(), e);
    }

    #[test]
    fn cube_json_shape() {
        let q = DyadicCube::new(2, 2, [1, 3, 0]).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, r#"{"level":2,"coords":[1,3]}"#);
        assert_eq!(serde_json::from_str::<DyadicCube>(&s).unwrap(), q);
    }
}
