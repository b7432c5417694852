use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::content::ContentParams;
use crate::error::{Error, Result};
use crate::lattice::{CubeFamily, RootCube};
use crate::operators::ExponentPair;
use crate::young::{EndpointFns, YoungSpec};

use super::generators::Kind;

/// Every key accepted by [`CheckConfig::set`], with its meaning.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("n", "dimension, 1..=3"),
    ("L", "coarsest leaf depth (alias: depth)"),
    ("refine", "number of extra refinement levels"),
    ("beta", "content dimension in (0, n]"),
    ("alpha", "Riesz order in (0, beta)"),
    ("p", "strong-type exponent; q follows from 1/p - 1/q = alpha/beta"),
    ("s", "power in the sharp pointwise bound"),
    ("t", "power in the Orlicz-free pointwise bound"),
    ("family", "cube family: dyadic | shifted | grid[:budget]"),
    ("samples", "samples per level"),
    ("seed", "base seed"),
    ("tolerance", "allowed growth of the empirical constant per refinement"),
    ("young", "Young function, e.g. t*log(e+t) or pow:2 (alias: B)"),
    ("b_kinds", "comma list of symbol kinds"),
    ("f_kinds", "comma list of test function kinds"),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub n: usize,
    pub depth: u32,
    pub refine: u32,
    pub beta: f64,
    pub alpha: f64,
    pub p: f64,
    pub s: f64,
    pub t: f64,
    pub family: CubeFamily,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub young: YoungSpec,
    pub b_kinds: Vec<Kind>,
    pub f_kinds: Vec<Kind>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig::desk()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Desk,
    Quick,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "quick" => Ok(Profile::Quick),
            other => Err(Error::Parse(format!("unknown profile `{other}` (desk | quick)"))),
        }
    }
}

impl CheckConfig {
    /// Desk-scale defaults: n = 1 on levels 8 and 9.
    pub fn desk() -> Self {
        CheckConfig {
            n: 1,
            depth: 8,
            refine: 1,
            beta: 1.0,
            alpha: 0.25,
            p: 2.0,
            s: 2.0,
            t: 2.0,
            family: CubeFamily::Dyadic,
            samples: 20,
            seed: 7,
            tolerance: 2.0,
            young: YoungSpec::t_log(),
            b_kinds: vec![Kind::BmoLog, Kind::RandomStepBmo],
            f_kinds: vec![Kind::Bump, Kind::Indicator],
        }
    }

    /// Small grids for smoke runs.
    pub fn quick() -> Self {
        CheckConfig { depth: 5, samples: 3, ..CheckConfig::desk() }
    }

    pub fn profile(p: Profile) -> Self {
        match p {
            Profile::Desk => CheckConfig::desk(),
            Profile::Quick => CheckConfig::quick(),
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |e: &dyn fmt::Display| Error::Parse(format!("bad value `{value}` for `{key}`: {e}"));
        macro_rules! num {
            () => {
                value.parse().map_err(|e| bad(&e))?
            };
        }
        match key.trim() {
            "n" => self.n = num!(),
            "L" | "depth" => self.depth = num!(),
            "refine" => self.refine = num!(),
            "beta" => self.beta = num!(),
            "alpha" => self.alpha = num!(),
            "p" => self.p = num!(),
            "s" => self.s = num!(),
            "t" => self.t = num!(),
            "family" => self.family = value.parse()?,
            "samples" => self.samples = num!(),
            "seed" => self.seed = num!(),
            "tolerance" => self.tolerance = num!(),
            "young" | "B" => self.young = value.parse()?,
            "b_kinds" => self.b_kinds = parse_kinds(value)?,
            "f_kinds" => self.f_kinds = parse_kinds(value)?,
            other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_str(&text)
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", no + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn levels(&self) -> Vec<u32> {
        (self.depth..=self.depth + self.refine).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) {
            return Err(Error::InvalidDimension(self.n));
        }
        if !(self.beta > 0.0 && self.beta <= self.n as f64) {
            return Err(Error::param(format!("beta must lie in (0, {}], got {}", self.n, self.beta)));
        }
        if !(self.alpha > 0.0 && self.alpha < self.beta) {
            return Err(Error::param(format!("alpha must lie in (0, beta), got {}", self.alpha)));
        }
        if !(self.s > 1.0 && self.t > 1.0) {
            return Err(Error::param("s and t must exceed 1"));
        }
        if !(self.tolerance >= 1.0) {
            return Err(Error::param("tolerance must be at least 1"));
        }
        if self.b_kinds.is_empty() || self.f_kinds.is_empty() {
            return Err(Error::param("b_kinds and f_kinds must be nonempty"));
        }
        if let Some(k) = self.f_kinds.iter().find(|k| !k.is_test_function()) {
            return Err(Error::param(format!("`{k}` is not a test function kind")));
        }
        if self.f_kinds.contains(&Kind::FourierWitness) || self.b_kinds.contains(&Kind::FourierWitness) {
            return Err(Error::param("fourier-witness is generated per symbol, not listed as a kind"));
        }
        RootCube::unit(self.n, self.depth + self.refine)?;
        Ok(())
    }

    pub fn content(&self) -> Result<ContentParams> {
        ContentParams::dyadic(self.beta)
    }

    pub fn root(&self, depth: u32) -> Result<RootCube> {
        RootCube::unit(self.n, depth)
    }

    pub fn exponents(&self) -> Result<ExponentPair> {
        ExponentPair::new(self.p, self.alpha, self.beta)
    }

    pub fn endpoint(&self) -> Result<EndpointFns> {
        EndpointFns::new(self.alpha, self.beta, self.young.clone())
    }

    /// `beta in (n - alpha, n]`.
    pub fn endpoint_range(&self) -> bool {
        self.beta > self.n as f64 - self.alpha && self.beta <= self.n as f64
    }

    /// Effective configuration as `key = value` lines.
    pub fn to_flat(&self) -> String {
        let kinds = |v: &[Kind]| v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
        format!(
            "n = {}\nL = {}\nrefine = {}\nbeta = {}\nalpha = {}\np = {}\ns = {}\nt = {}\nfamily = {}\nsamples = {}\nseed = {}\ntolerance = {}\nyoung = {}\nb_kinds = {}\nf_kinds = {}\n",
            self.n,
            self.depth,
            self.refine,
            self.beta,
            self.alpha,
            self.p,
            self.s,
            self.t,
            self.family,
            self.samples,
            self.seed,
            self.tolerance,
            self.young,
            kinds(&self.b_kinds),
            kinds(&self.f_kinds)
        )
    }
}

fn parse_kinds(s: &str) -> Result<Vec<Kind>> {
    s.split(',').filter(|k| !k.trim().is_empty()).map(|k| k.trim().parse()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_round_trip() {
        let mut c = CheckConfig::desk();
        c.apply_str("beta = 0.6 # comment\n\nL=6\nfamily = shifted\nb_kinds = indicator,constant\n").unwrap();
        assert_eq!((c.beta, c.depth), (0.6, 6));
        assert_eq!(c.family, CubeFamily::ShiftedDyadic);
        let mut d = CheckConfig::quick();
        d.apply_str(&c.to_flat()).unwrap();
        assert_eq!(c, d);
        assert!(c.clone().set("bogus", "1").is_err());
        assert!(c.apply_str("beta 1").is_err());
        assert_eq!(c.levels(), vec![6, 7]);
    }

    #[test]
    fn validation() {
        let mut c = CheckConfig::desk();
        assert!(c.validate().is_ok());
        c.alpha = 1.5;
        assert!(c.validate().is_err());
        let mut c = CheckConfig::desk();
        c.f_kinds = vec![Kind::BmoLog];
        assert!(c.validate().is_err());
        assert!((CheckConfig::desk().exponents().unwrap().q - 4.0).abs() < 1e-12);
    }
}
