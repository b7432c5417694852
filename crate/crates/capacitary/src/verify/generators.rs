//! Seeded symbols `b` and test functions `f`.
//!
//! Every function is defined on the continuum `[0, 1)^n` and sampled at leaf
//! centers, so one seed yields the same function at every depth.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bmo::bmo_norm;
use crate::error::{Error, Result};
use crate::lattice::{GridCube, GridFunction, LeafSet, RootCube, MAX_DIM};

use super::config::CheckConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    BmoLog,
    RandomStepBmo,
    Bump,
    Indicator,
    Constant,
    FourierWitness,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::BmoLog,
        Kind::RandomStepBmo,
        Kind::Bump,
        Kind::Indicator,
        Kind::Constant,
        Kind::FourierWitness,
    ];

    /// Kinds usable as a nonnegative test function `f`.
    pub fn is_test_function(self) -> bool {
        matches!(self, Kind::RandomStepBmo | Kind::Bump | Kind::Indicator | Kind::Constant)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::BmoLog => "bmo-log",
            Kind::RandomStepBmo => "random-step-bmo",
            Kind::Bump => "bump",
            Kind::Indicator => "indicator",
            Kind::Constant => "constant",
            Kind::FourierWitness => "fourier-witness",
        })
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.to_string() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown function kind `{s}`")))
    }
}

/// A function on `[0, 1)^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FunctionSpec {
    /// `log max(|x - x0|, h/2)` with `h` the leaf side.
    Log { x0: Vec<f64> },
    /// Constant on the dyadic cells of `level`, row-major values; optionally
    /// restricted to the central half.
    Step { level: u32, values: Vec<f64>, central: bool },
    /// `amp (1 - |x - c|^2 / r^2)_+^2`.
    Bump { center: Vec<f64>, radius: f64, amp: f64 },
    /// Indicator of the half-open box `[lo, hi)`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Constant { value: f64 },
}

fn in_central_half(x: &[f64]) -> bool {
    x.iter().all(|&t| (0.25..0.75).contains(&t))
}

impl FunctionSpec {
    pub fn eval(&self, x: &[f64], h: f64) -> f64 {
        match self {
            FunctionSpec::Log { x0 } => {
                let d = x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                d.max(0.5 * h).ln()
            }
            FunctionSpec::Step { level, values, central } => {
                if *central && !in_central_half(x) {
                    return 0.0;
                }
                let m = 1usize << level;
                let idx = x.iter().fold(0usize, |acc, &t| acc * m + ((t * m as f64) as usize).min(m - 1));
                values[idx]
            }
            FunctionSpec::Bump { center, radius, amp } => {
                let d2 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                let u = 1.0 - d2 / (radius * radius);
                if u > 0.0 {
                    amp * u * u
                } else {
                    0.0
                }
            }
            FunctionSpec::Box { lo, hi } => {
                if x.iter().zip(lo.iter().zip(hi)).all(|(&t, (&a, &b))| t >= a && t < b) {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionSpec::Constant { value } => *value,
        }
    }

    /// Samples at leaf centers of a unit root.
    pub fn discretize(&self, root: &RootCube) -> Result<GridFunction> {
        let h = root.leaf_side();
        GridFunction::from_fn(root, |x| self.eval(x, h))
    }

    /// Draws a symbol of `kind` in dimension `n`.
    pub fn symbol(kind: Kind, n: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        Ok(match kind {
            Kind::BmoLog => FunctionSpec::Log { x0: (0..n).map(|_| rng.gen_range(0.3..0.7)).collect() },
            Kind::RandomStepBmo => random_step(n, 3, false, rng),
            Kind::Constant => FunctionSpec::Constant { value: 1.0 },
            Kind::Bump | Kind::Indicator => FunctionSpec::test_function(kind, n, rng)?,
            Kind::FourierWitness => {
                return Err(Error::param("fourier-witness functions are built from a symbol and a cube"))
            }
        })
    }

    /// Draws a nonnegative test function supported in the central half.
    pub fn test_function(kind: Kind, n: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        Ok(match kind {
            Kind::Bump => {
                let radius = rng.gen_range(1.0 / 16.0..1.0 / 8.0);
                FunctionSpec::Bump {
                    center: (0..n).map(|_| rng.gen_range(0.25 + radius..0.75 - radius)).collect(),
                    radius,
                    amp: rng.gen_range(0.5..2.0),
                }
            }
            Kind::Indicator => {
                let mut lo = Vec::with_capacity(n);
                let mut hi = Vec::with_capacity(n);
                for _ in 0..n {
                    let a = rng.gen_range(0.25..0.625);
                    lo.push(a);
                    hi.push(rng.gen_range(a + 0.125..=0.75));
                }
                FunctionSpec::Box { lo, hi }
            }
            Kind::RandomStepBmo => random_step(n, 3, true, rng),
            Kind::Constant => FunctionSpec::Box { lo: vec![0.25; n], hi: vec![0.75; n] },
            other => return Err(Error::param(format!("`{other}` is not a test function kind"))),
        })
    }
}

fn random_step(n: usize, level: u32, central: bool, rng: &mut ChaCha8Rng) -> FunctionSpec {
    let cells = 1usize << (level as usize * n);
    let values = (0..cells)
        .map(|_| if central { rng.gen_range(0.0..1.0) } else { rng.gen_range(-1.0..1.0) })
        .collect();
    FunctionSpec::Step { level, values, central }
}

/// FNV-1a over the base seed, a label and an index.
pub fn sub_seed(seed: u64, label: &str, k: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(&seed.to_le_bytes());
    eat(label.as_bytes());
    eat(&k.to_le_bytes());
    h
}

pub fn rng_for(seed: u64, label: &str, k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, label, k))
}

/// Symbol and test function specs of sample `k`: kinds cycle through the
/// configured lists, `b` fastest.
pub fn sample_specs(cfg: &CheckConfig, label: &str, k: usize) -> Result<(Kind, FunctionSpec, Kind, FunctionSpec)> {
    let bk = cfg.b_kinds[k % cfg.b_kinds.len()];
    let fk = cfg.f_kinds[(k / cfg.b_kinds.len()) % cfg.f_kinds.len()];
    let mut rng = rng_for(cfg.seed, label, k as u64);
    let b = FunctionSpec::symbol(bk, cfg.n, &mut rng)?;
    let f = FunctionSpec::test_function(fk, cfg.n, &mut rng)?;
    Ok((bk, b, fk, f))
}

/// Discretizes a symbol and scales it to unit BMO norm (constants are left alone).
pub fn normalized_symbol(kind: Kind, spec: &FunctionSpec, cfg: &CheckConfig, root: &RootCube) -> Result<GridFunction> {
    let b = spec.discretize(root)?;
    if kind == Kind::Constant {
        return Ok(b);
    }
    let norm = bmo_norm(&b, &cfg.content()?, cfg.family)?;
    Ok(if norm > 0.0 { b.scale(1.0 / norm) } else { b })
}

/// `(b, f)` for sample `k` at `depth`.
pub fn gen_pair(cfg: &CheckConfig, label: &str, k: usize, depth: u32) -> Result<(GridFunction, GridFunction)> {
    let root = cfg.root(depth)?;
    let (bk, bs, _, fs) = sample_specs(cfg, label, k)?;
    Ok((normalized_symbol(bk, &bs, cfg, &root)?, fs.discretize(&root)?))
}

/// `cfg.samples` pairs with `b` of the given kind and `f` cycling through
/// `cfg.f_kinds`. For `fourier-witness`, `b` is drawn from `cfg.b_kinds[0]`
/// and the witness functions of its most oscillating admissible cube are
/// returned as the `f`s.
pub fn gen_functions(kind: Kind, cfg: &CheckConfig, depth: u32, seed: u64) -> Result<Vec<(GridFunction, GridFunction)>> {
    let root = cfg.root(depth)?;
    let mut out = Vec::new();
    if kind == Kind::FourierWitness {
        let bk = cfg.b_kinds[0];
        let mut rng = rng_for(seed, "gen", 0);
        let b = normalized_symbol(bk, &FunctionSpec::symbol(bk, cfg.n, &mut rng)?, cfg, &root)?;
        let q = witness_target(&b, cfg)?
            .ok_or_else(|| Error::param("no cube admits a fourier witness at this depth"))?;
        for f in fourier_witness(&b, &q, 2)?.functions {
            out.push((b.clone(), f));
        }
        return Ok(out);
    }
    for k in 0..cfg.samples {
        let mut rng = rng_for(seed, "gen", k as u64);
        let b = normalized_symbol(kind, &FunctionSpec::symbol(kind, cfg.n, &mut rng)?, cfg, &root)?;
        let fk = cfg.f_kinds[k % cfg.f_kinds.len()];
        let f = FunctionSpec::test_function(fk, cfg.n, &mut rng)?.discretize(&root)?;
        out.push((b, f));
    }
    Ok(out)
}

/// Test functions of the necessity argument for a cube `Q`.
#[derive(Clone, Debug)]
pub struct Witness {
    /// `l(P) = 4 l(Q)`, same lower corner as `Q`.
    pub p: GridCube,
    /// Upper half of `P` in every coordinate.
    pub p_r: GridCube,
    /// Lebesgue mean of `b` on `P_R`.
    pub c_q: f64,
    /// `sgn(b - c_Q)`.
    pub sigma: GridFunction,
    /// Real and imaginary parts of `e^{-i k.y / (2 sqrt(n) l(P))} chi_{P_R}`, `|k_a| <= kmax`.
    pub functions: Vec<GridFunction>,
}

pub fn fourier_witness(b: &GridFunction, q: &GridCube, kmax: u32) -> Result<Witness> {
    let root = b.root();
    let n = root.dim();
    let w = q.width();
    let mut lo = [0u32; MAX_DIM];
    let mut lo_r = [0u32; MAX_DIM];
    for a in 0..n {
        if q.lo()[a] as u64 + 4 * w as u64 > root.per_axis() as u64 {
            return Err(Error::OutsideRoot);
        }
        lo[a] = q.lo()[a];
        lo_r[a] = q.lo()[a] + 2 * w;
    }
    let p = GridCube::new(n, lo, 4 * w);
    let p_r = GridCube::new(n, lo_r, 2 * w);
    let members = p_r.to_box().leaves(root);
    let c_q = members.iter().map(|&i| b.get(i)).sum::<f64>() / members.len() as f64;
    let sigma = b.map(|v| if v > c_q { 1.0 } else if v < c_q { -1.0 } else { 0.0 });
    let chi = LeafSet::from_leaves(root, members.iter().copied())?;
    let scale = 1.0 / (2.0 * (n as f64).sqrt() * p.side(root));
    let km = kmax as i64;
    let mut ks = vec![Vec::<i64>::new()];
    for _ in 0..n {
        ks = ks
            .into_iter()
            .flat_map(|k| (-km..=km).map(move |j| [k.clone(), vec![j]].concat()))
            .collect();
    }
    let mut functions = Vec::new();
    for k in ks {
        let phase = |leaf: usize| {
            let c = root.leaf_center(leaf);
            (0..n).map(|a| k[a] as f64 * c[a]).sum::<f64>() * scale
        };
        let re = GridFunction::from_parts_unchecked(
            root.clone(),
            (0..root.leaf_count()).map(|i| if chi.contains(i) { phase(i).cos() } else { 0.0 }).collect(),
        );
        let im = GridFunction::from_parts_unchecked(
            root.clone(),
            (0..root.leaf_count()).map(|i| if chi.contains(i) { -phase(i).sin() } else { 0.0 }).collect(),
        );
        for g in [re, im] {
            if g.max_abs() > 0.0 {
                functions.push(g);
            }
        }
    }
    Ok(Witness { p, p_r, c_q, sigma, functions })
}

/// Cube of largest oscillation among those whose `P` fits in the root.
pub fn witness_target(b: &GridFunction, cfg: &CheckConfig) -> Result<Option<GridCube>> {
    let root = b.root();
    let oscs = crate::bmo::cube_oscillations(b, &cfg.content()?, crate::lattice::CubeFamily::Dyadic, 1.0)?;
    let m = root.per_axis() as u64;
    Ok(oscs
        .into_iter()
        .filter(|(q, _)| q.lo()[..root.dim()].iter().all(|&l| l as u64 + 4 * q.width() as u64 <= m))
        .fold(None, |best: Option<(GridCube, f64)>, (q, o)| match best {
            Some((_, v)) if v >= o.value => best,
            _ => Some((q, o.value)),
        })
        .map(|(q, _)| q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip() {
        for k in Kind::ALL {
            assert_eq!(k.to_string().parse::<Kind>().unwrap(), k);
        }
        assert!("nope".parse::<Kind>().is_err());
    }

    #[test]
    fn specs_are_depth_consistent_and_supported_centrally() {
        let cfg = CheckConfig::quick();
        for k in 0..8 {
            let (_, _, _, fs) = sample_specs(&cfg, "t", k).unwrap();
            let r = cfg.root(6).unwrap();
            let f = fs.discretize(&r).unwrap();
            for leaf in 0..r.leaf_count() {
                let c = r.leaf_center(leaf);
                if !in_central_half(&c[..1]) {
                    assert_eq!(f.get(leaf), 0.0);
                }
                assert!(f.get(leaf) >= 0.0);
            }
        }
        let (a, b) = (sample_specs(&cfg, "t", 3).unwrap(), sample_specs(&cfg, "t", 3).unwrap());
        assert_eq!(a.1, b.1);
        assert_ne!(sub_seed(7, "t", 3), sub_seed(7, "u", 3));
    }

    #[test]
    fn symbols_have_unit_norm() {
        let cfg = CheckConfig::quick();
        let root = cfg.root(5).unwrap();
        for k in 0..4 {
            let (b, _) = gen_pair(&cfg, "norm", k, 5).unwrap();
            let n = bmo_norm(&b, &cfg.content().unwrap(), cfg.family).unwrap();
            assert!((n - 1.0).abs() < 1e-12, "{n}");
            assert_eq!(b.root(), &root);
        }
        let pairs = gen_functions(Kind::Constant, &cfg, 4, 1).unwrap();
        assert!(pairs.iter().all(|(b, _)| b.values().iter().all(|&v| v == 1.0)));
    }

    #[test]
    fn witness_geometry() {
        let cfg = CheckConfig::quick();
        let root = cfg.root(4).unwrap();
        let b = FunctionSpec::Log { x0: vec![0.4] }.discretize(&root).unwrap();
        // a level-2 cube: four leaves at depth 4
        let q = GridCube::new(1, [0, 0, 0], 4);
        let w = fourier_witness(&b, &q, 2).unwrap();
        assert_eq!(w.p.width(), 16);
        assert_eq!(w.p_r.width(), 2 * q.width());
        assert_eq!(w.p_r.lo()[0], 8);
        assert_eq!(w.functions.len(), 9);
        for f in &w.functions {
            assert!(f.values()[..8].iter().all(|&v| v == 0.0));
        }
        assert!(fourier_witness(&b, &GridCube::new(1, [4, 0, 0], 4), 2).is_err());
        assert_eq!(gen_functions(Kind::FourierWitness, &cfg, 5, 3).unwrap().len(), 9);
    }
}
