//! Registry entries. Each check maps a configuration and one depth to
//! per-claim ratio samples.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::choquet::{lp_from_profile, ContentProfile, Profiler};
use crate::content::ContentParams;
use crate::error::Result;
use crate::lattice::{DyadicCube, GridCube, GridFunction, Region, RootCube, MAX_DIM};
use crate::operators::{RieszMethod, RieszOperator, RieszParams};

use super::config::CheckConfig;
use super::generators::{normalized_symbol, rng_for, sample_specs};
use super::report::LevelData;

pub(crate) mod bmo;
pub(crate) mod choquet;
pub(crate) mod commutator;
pub(crate) mod orlicz;
pub(crate) mod riesz;

/// One depth of one check.
pub(crate) struct Level<'a> {
    pub id: &'static str,
    pub cfg: &'a CheckConfig,
    pub depth: u32,
    pub root: RootCube,
    pub params: ContentParams,
}

/// Normalized symbol and test function of one sample.
pub(crate) struct Sample {
    pub b: GridFunction,
    pub f: GridFunction,
    /// `1` for normalized symbols, `0` for constants.
    pub b_norm: f64,
}

impl<'a> Level<'a> {
    pub fn new(id: &'static str, cfg: &'a CheckConfig, depth: u32) -> Result<Self> {
        Ok(Level { id, cfg, depth, root: cfg.root(depth)?, params: cfg.content()? })
    }

    pub fn sample(&self, k: usize) -> Result<Sample> {
        let (bk, bs, _, fs) = sample_specs(self.cfg, self.id, k)?;
        let b = normalized_symbol(bk, &bs, self.cfg, &self.root)?;
        let b_norm = if b.is_constant() { 0.0 } else { 1.0 };
        Ok(Sample { b, f: fs.discretize(&self.root)?, b_norm })
    }

    /// Depth-independent randomness for sample `k`.
    pub fn rng(&self, k: usize, tag: &str) -> ChaCha8Rng {
        rng_for(self.cfg.seed, &format!("{}/{tag}", self.id), k as u64)
    }

    /// Evaluates every sample (in parallel, results in sample order).
    pub fn each<T: Send>(&self, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        (0..self.cfg.samples).into_par_iter().map(f).collect()
    }

    pub fn riesz(&self) -> Result<RieszOperator> {
        RieszOperator::new(&self.root, &RieszParams::new(self.cfg.alpha, self.cfg.n, RieszMethod::Fft)?)
    }

    pub fn profiler(&self) -> Result<Profiler> {
        Profiler::new(&self.root, &self.params)
    }

    /// Profile of `|g|` on a region.
    pub fn profile(&self, g: &GridFunction, region: Region<'_>) -> Result<ContentProfile> {
        let v = g.values();
        Ok(self.profiler()?.profile(region, |i| v[i].abs()))
    }

    /// `(int |g|^p dH)^{1/p}` over the root.
    pub fn lp(&self, g: &GridFunction, p: f64) -> Result<f64> {
        Ok(lp_from_profile(&self.profile(g, Region::Root)?, p))
    }

    pub fn beta(&self) -> f64 {
        self.cfg.beta
    }

    /// Random dyadic cube at an absolute level in `levels`, clamped to the depth.
    pub fn random_cube(&self, rng: &mut ChaCha8Rng, levels: std::ops::RangeInclusive<u32>) -> GridCube {
        let lo = (*levels.start()).min(self.depth);
        let hi = (*levels.end()).min(self.depth);
        let level = rng.gen_range(lo..=hi);
        let mut c = [0u32; MAX_DIM];
        for x in c.iter_mut().take(self.cfg.n) {
            *x = rng.gen_range(0..1u32 << level);
        }
        DyadicCube::new(level, self.cfg.n, c).expect("coords in range").to_grid(&self.root)
    }

    /// Dyadic cubes at the absolute levels in `levels`.
    pub fn dyadic_at(&self, levels: std::ops::RangeInclusive<u32>) -> Vec<GridCube> {
        let n = self.cfg.n;
        let mut out = Vec::new();
        for level in levels.filter(|&l| l <= self.depth) {
            let m = 1u32 << level;
            for idx in 0..(m as usize).pow(n as u32) {
                let mut c = [0u32; MAX_DIM];
                let mut rest = idx;
                for a in (0..n).rev() {
                    c[a] = (rest % m as usize) as u32;
                    rest /= m as usize;
                }
                out.push(DyadicCube::new(level, n, c).expect("coords in range").to_grid(&self.root));
            }
        }
        out
    }
}

/// Largest pointwise ratio `lhs / rhs` (`0 / 0 = 0`).
pub(crate) fn max_ratio(lhs: &GridFunction, rhs: &GridFunction) -> f64 {
    lhs.values()
        .iter()
        .zip(rhs.values())
        .map(|(&a, &b)| super::report::ratio(a, b))
        .fold(0.0, |m: f64, r| if r.is_nan() || r > m { r } else { m })
}

pub(crate) type LevelFn = fn(&Level<'_>) -> Result<LevelData>;
pub(crate) type RequireFn = fn(&CheckConfig) -> Result<()>;

pub(crate) fn no_requirements(_: &CheckConfig) -> Result<()> {
    Ok(())
}
