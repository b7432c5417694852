//! Layer-cake Choquet integrals of step functions.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::content::{ball_content_estimate, ContentEngine, ContentParams, Flavor};
use crate::error::{Error, Result};
use crate::lattice::{GridCube, GridFunction, LeafSet, Region, RootCube};

/// Distinct positive values `v_1 < ... < v_m` of a nonnegative function on a
/// region together with `H_i = H({g >= v_i})`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContentProfile {
    values: Vec<f64>,
    contents: Vec<f64>,
    base: f64,
}

impl ContentProfile {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contents(&self) -> &[f64] {
        &self.contents
    }

    /// Content of the whole region.
    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `sum_i (v_i - v_{i-1}) H_i`.
    pub fn integral(&self) -> f64 {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (&v, &h) in self.values.iter().zip(&self.contents) {
            acc += (v - prev) * h;
            prev = v;
        }
        acc
    }

    /// Integral of `phi(g)` for nondecreasing `phi` with `phi(0) >= 0`.
    pub fn integral_of(&self, phi: impl Fn(f64) -> f64) -> f64 {
        let mut prev = phi(0.0);
        let mut acc = prev * self.base;
        for (&v, &h) in self.values.iter().zip(&self.contents) {
            let cur = phi(v);
            acc += (cur - prev) * h;
            prev = cur;
        }
        acc
    }

    /// `H({g > t})`.
    pub fn content_above(&self, t: f64) -> f64 {
        let i = self.values.partition_point(|&v| v <= t);
        self.contents.get(i).copied().unwrap_or(0.0)
    }

    /// Right-continuous distribution `(t, H({g > t}))` starting at `t = 0`.
    pub fn level_pairs(&self) -> Vec<(f64, f64)> {
        if self.values.is_empty() {
            return vec![(0.0, 0.0)];
        }
        let mut out = Vec::with_capacity(self.values.len() + 1);
        out.push((0.0, self.contents[0]));
        for i in 0..self.values.len() {
            out.push((self.values[i], self.contents.get(i + 1).copied().unwrap_or(0.0)));
        }
        out
    }
}

/// Reusable builder of content profiles on one root.
#[derive(Clone, Debug)]
pub struct Profiler {
    root: RootCube,
    params: ContentParams,
    engine: ContentEngine,
    scratch: Vec<(f64, usize)>,
}

impl Profiler {
    pub fn new(root: &RootCube, params: &ContentParams) -> Result<Self> {
        params.check_root(root)?;
        Ok(Profiler {
            root: root.clone(),
            params: *params,
            engine: ContentEngine::new(root, params),
            scratch: Vec::new(),
        })
    }

    pub fn root(&self) -> &RootCube {
        &self.root
    }

    pub fn params(&self) -> &ContentParams {
        &self.params
    }

    pub fn engine(&mut self) -> &mut ContentEngine {
        &mut self.engine
    }

    /// Profile of `g` (nonnegative) on `region`.
    pub fn profile(&mut self, region: Region<'_>, g: impl Fn(usize) -> f64) -> ContentProfile {
        let leaves = region.leaves(&self.root);
        let container = region.container(&self.root);
        self.profile_leaves(&leaves, container, g)
    }

    pub fn profile_leaves(
        &mut self,
        leaves: &[usize],
        container: crate::lattice::DyadicCube,
        g: impl Fn(usize) -> f64,
    ) -> ContentProfile {
        self.scratch.clear();
        self.scratch.extend(leaves.iter().map(|&i| (g(i), i)));
        self.scratch.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        self.engine.begin(container);
        let mut values = Vec::new();
        let mut contents = Vec::new();
        let mut i = 0;
        let n = self.scratch.len();
        while i < n && self.scratch[i].0 > 0.0 {
            let v = self.scratch[i].0;
            while i < n && self.scratch[i].0 == v {
                self.engine.insert(self.scratch[i].1);
                i += 1;
            }
            values.push(v);
            contents.push(self.engine.value());
        }
        for &(_, leaf) in &self.scratch[i..] {
            self.engine.insert(leaf);
        }
        let base = self.engine.value();
        values.reverse();
        contents.reverse();
        ContentProfile { values, contents, base }
    }

    /// Content of a region.
    pub fn content(&mut self, region: Region<'_>) -> f64 {
        self.engine.begin(region.container(&self.root));
        for leaf in region.leaves(&self.root) {
            self.engine.insert(leaf);
        }
        self.engine.value()
    }
}

fn check_nonnegative(f: &GridFunction, leaves: &[usize]) -> Result<()> {
    for &i in leaves {
        if f.get(i) < 0.0 {
            return Err(Error::NegativeValue { leaf: i, value: f.get(i) });
        }
    }
    Ok(())
}

/// Profile of `|f|` on a region.
pub fn content_profile(f: &GridFunction, over: Region<'_>, params: &ContentParams) -> Result<ContentProfile> {
    over.validate(f.root())?;
    let mut p = Profiler::new(f.root(), params)?;
    let v = f.values();
    Ok(p.profile(over, |i| v[i].abs()))
}

/// `int_over f dH` for `f >= 0` on the region.
pub fn choquet_integral(f: &GridFunction, over: Region<'_>, params: &ContentParams) -> Result<f64> {
    over.validate(f.root())?;
    check_nonnegative(f, &over.leaves(f.root()))?;
    Ok(content_profile(f, over, params)?.integral())
}

/// Layer-cake against the ball-content interval of each superlevel set.
pub fn choquet_integral_ball(f: &GridFunction, over: Region<'_>, params: &ContentParams) -> Result<(f64, f64)> {
    if params.flavor() != Flavor::Ball {
        return Err(Error::param("ball integral needs ball-flavored params"));
    }
    over.validate(f.root())?;
    let leaves = over.leaves(f.root());
    check_nonnegative(f, &leaves)?;
    let region = LeafSet::from_leaves(f.root(), leaves)?;
    let mut vals: Vec<f64> = region.members().map(|i| f.get(i)).filter(|&v| v > 0.0).collect();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    let (mut lo, mut hi, mut prev) = (0.0, 0.0, 0.0);
    for v in vals {
        let level = LeafSet::superlevel(f, v).intersection(&region);
        let (l, h) = ball_content_estimate(&level, params)?;
        lo += (v - prev) * l;
        hi += (v - prev) * h;
        prev = v;
    }
    Ok((lo, hi))
}

/// `(int |f|^p dH)^{1/p}`.
pub fn lp_quasinorm(f: &GridFunction, p: f64, params: &ContentParams, over: Region<'_>) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::param(format!("p must be positive, got {p}")));
    }
    let prof = content_profile(f, over, params)?;
    Ok(lp_from_profile(&prof, p))
}

pub fn lp_from_profile(prof: &ContentProfile, p: f64) -> f64 {
    if p == 1.0 {
        prof.integral()
    } else {
        prof.integral_of(|v| v.powf(p)).powf(1.0 / p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Denominator {
    /// `H(Q)`
    Content,
    /// `l(Q)^beta`
    SidePower,
}

/// `int_Q |f| dH` divided by `H(Q)` or `l(Q)^beta`.
pub fn content_average(
    f: &GridFunction,
    q: &GridCube,
    params: &ContentParams,
    denominator: Denominator,
) -> Result<f64> {
    let region = Region::Cube(*q);
    region.validate(f.root())?;
    if q.width() == 0 {
        return Err(Error::Degenerate("cube of zero width".into()));
    }
    let mut p = Profiler::new(f.root(), params)?;
    let v = f.values();
    let prof = p.profile(region, |i| v[i].abs());
    let denom = match denominator {
        Denominator::Content => prof.base(),
        Denominator::SidePower => q.side(f.root()).powf(params.beta()),
    };
    Ok(prof.integral() / denom)
}

/// `(t, H({|g| > t}))` at `0` and every distinct value of `|g|`.
pub fn level_profile(g: &GridFunction, params: &ContentParams) -> Result<Vec<(f64, f64)>> {
    Ok(content_profile(g, Region::Root, params)?.level_pairs())
}

/// Writes `# header` and tab-separated rows.
pub fn write_tsv(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut out = Vec::new();
    let _ = writeln!(out, "# {}", header.join("\t"));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", cells.join("\t"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_profile_tsv(path: impl AsRef<Path>, profile: &[(f64, f64)]) -> Result<()> {
    let rows: Vec<Vec<f64>> = profile.iter().map(|&(t, h)| vec![t, h]).collect();
    write_tsv(path, &["t", "content"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::dyadic_content;
    use crate::lattice::DyadicCube;
    use proptest::prelude::*;

    fn f12() -> GridFunction {
        GridFunction::new(RootCube::unit(1, 1).unwrap(), vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn spec_examples() {
        let p = ContentParams::dyadic(1.0).unwrap();
        let f = f12();
        assert_eq!(choquet_integral(&f, Region::Root, &p).unwrap(), 1.5);
        assert_eq!(lp_quasinorm(&f, 2.0, &p, Region::Root).unwrap(), 2.5f64.sqrt());
        assert_eq!(level_profile(&f, &p).unwrap(), vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.0)]);
        let z = GridFunction::zeros(f.root());
        assert_eq!(level_profile(&z, &p).unwrap(), vec![(0.0, 0.0)]);
        let neg = f.scale(-1.0);
        assert!(matches!(choquet_integral(&neg, Region::Root, &p), Err(Error::NegativeValue { .. })));
        assert!(lp_quasinorm(&f, 0.0, &p, Region::Root).is_err());
    }

    #[test]
    fn indicator_and_average() {
        let r = RootCube::unit(1, 4).unwrap();
        let p = ContentParams::dyadic(0.6).unwrap();
        let e = LeafSet::from_leaves(&r, [1, 2, 9]).unwrap();
        let h = dyadic_content(&e, &p).unwrap();
        let f = e.indicator().scale(3.0);
        assert_eq!(choquet_integral(&f, Region::Root, &p).unwrap(), 3.0 * h);
        assert_eq!(level_profile(&e.indicator(), &p).unwrap(), vec![(0.0, h), (1.0, 0.0)]);

        let r = RootCube::unit(1, 3).unwrap();
        let p = ContentParams::dyadic(1.0).unwrap();
        let half = LeafSet::from_leaves(&r, 0..4).unwrap().indicator();
        let q0 = r.root_cube();
        assert_eq!(content_average(&half, &q0, &p, Denominator::Content).unwrap(), 0.5);
        let c = GridFunction::constant(&r, -2.5);
        let q = DyadicCube::new(1, 1, [1, 0, 0]).unwrap().to_grid(&r);
        assert_eq!(content_average(&c, &q, &p, Denominator::Content).unwrap(), 2.5);
        let pp = ContentParams::dyadic(0.7).unwrap();
        let g = GridFunction::from_fn(&r, |x| x[0].sin()).unwrap();
        assert_eq!(
            content_average(&g, &q, &pp, Denominator::Content).unwrap(),
            content_average(&g, &q, &pp, Denominator::SidePower).unwrap()
        );
    }

    #[test]
    fn ball_interval_brackets() {
        let r = RootCube::unit(2, 3).unwrap();
        let p = ContentParams::ball(1.2).unwrap();
        let f = GridFunction::from_fn(&r, |x| (x[0] * 7.0).sin().max(0.0) + x[1]).unwrap();
        let (lo, hi) = choquet_integral_ball(&f, Region::Root, &p).unwrap();
        let d = choquet_integral(&f, Region::Root, &p).unwrap();
        assert!(lo <= hi && lo > 0.0);
        assert!(lo <= d * (1.0 + 1e-12));
    }

    fn arb_fn(dim: usize, depth: u32) -> impl Strategy<Value = GridFunction> {
        let root = RootCube::unit(dim, depth).unwrap();
        let n = root.leaf_count();
        proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..5.0, (0u8..4).prop_map(f64::from)], n)
            .prop_map(move |v| GridFunction::new(root.clone(), v).unwrap())
    }

    proptest! {
        // independent route: contents of strict superlevel sets by the full DP,
        // one per interval between breakpoints
        #[test]
        fn prop_layer_cake_matches_level_integration(f in arb_fn(2, 3), beta in 0.1f64..2.0) {
            let p = ContentParams::dyadic(beta).unwrap();
            let direct = choquet_integral(&f, Region::Root, &p).unwrap();
            let mut br: Vec<f64> = f.values().iter().copied().filter(|&v| v > 0.0).collect();
            br.push(0.0);
            br.sort_by(f64::total_cmp);
            br.dedup();
            let mut quad = 0.0;
            for w in br.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                quad += (w[1] - w[0]) * dyadic_content(&LeafSet::strict_superlevel(&f, mid), &p).unwrap();
            }
            prop_assert!((direct - quad).abs() <= 1e-12 * direct.max(1e-300));
        }

        #[test]
        fn prop_lebesgue_reduction(f in arb_fn(1, 6)) {
            let r = f.root().clone();
            let p = ContentParams::dyadic(1.0).unwrap();
            let riemann: f64 = f.values().iter().sum::<f64>() * r.leaf_volume();
            let c = choquet_integral(&f, Region::Root, &p).unwrap();
            prop_assert!((c - riemann).abs() <= 1e-12 * (1.0 + riemann));
        }

        #[test]
        fn prop_homogeneity_power_of_two(f in arb_fn(1, 5), k in -6i32..6, beta in 0.1f64..1.0) {
            let p = ContentParams::dyadic(beta).unwrap();
            let a = 2f64.powi(k);
            let lhs = choquet_integral(&f.scale(a), Region::Root, &p).unwrap();
            prop_assert_eq!(lhs, a * choquet_integral(&f, Region::Root, &p).unwrap());
        }

        #[test]
        fn prop_profile_matches_superlevels(f in arb_fn(1, 5), t in 0.0f64..5.0, beta in 0.1f64..1.0) {
            let p = ContentParams::dyadic(beta).unwrap();
            let prof = content_profile(&f, Region::Root, &p).unwrap();
            let direct = dyadic_content(&LeafSet::strict_superlevel(&f.abs(), t), &p).unwrap();
            prop_assert_eq!(prof.content_above(t), direct);
        }
    }
}
