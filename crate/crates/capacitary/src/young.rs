//! Young functions, their complements, `h_B`, the endpoint functions and
//! Luxemburg quasinorms.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::choquet::{ContentProfile, Profiler};
use crate::content::ContentParams;
use crate::error::{Error, Result};
use crate::lattice::{GridCube, GridFunction, Region};
use crate::numeric::{golden_max, log_grid};

/// Search window for `h_B` and the complementary function.
pub const SEARCH_WINDOW: (f64, f64) = (1e-12, 1e12);
const SCAN_POINTS: usize = 601;
const BISECTION_LIMIT: usize = 200;
const LUXEMBURG_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YoungKind {
    Power(f64),
    TLog,
    PowLog { a: f64, b: f64 },
    ExpMinusOne,
    /// Piecewise linear through `(0, 0)` and the given points, extended with the last slope.
    Table(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YoungSpec {
    kind: YoungKind,
}

impl YoungSpec {
    pub fn new(kind: YoungKind) -> Result<Self> {
        match &kind {
            YoungKind::Power(r) if !(*r >= 1.0) || !r.is_finite() => {
                return Err(Error::param(format!("power Young function needs r >= 1, got {r}")))
            }
            YoungKind::PowLog { a, b } if !(*a >= 1.0) || !(*b > 0.0) || !a.is_finite() || !b.is_finite() => {
                return Err(Error::param("t^a log(e+t)^b needs a >= 1 and b > 0"))
            }
            YoungKind::Table(pts) => {
                if pts.is_empty() {
                    return Err(Error::param("empty Young table"));
                }
                let mut prev = (0.0, 0.0);
                for &(t, b) in pts {
                    if !(t > prev.0) || !(b > prev.1) || !t.is_finite() || !b.is_finite() {
                        return Err(Error::param("Young table must be strictly increasing from (0, 0)"));
                    }
                    prev = (t, b);
                }
            }
            _ => {}
        }
        let spec = YoungSpec { kind };
        spec.validate()?;
        Ok(spec)
    }

    pub fn power(r: f64) -> Result<Self> {
        Self::new(YoungKind::Power(r))
    }

    /// `t log(e + t)`.
    pub fn t_log() -> Self {
        YoungSpec { kind: YoungKind::TLog }
    }

    pub fn kind(&self) -> &YoungKind {
        &self.kind
    }

    fn validate(&self) -> Result<()> {
        let grid = log_grid(SEARCH_WINDOW.0, SEARCH_WINDOW.1, 161);
        let vals: Vec<f64> = grid.iter().map(|&t| self.value(t)).collect();
        if self.value(0.0) != 0.0 {
            return Err(Error::param("Young function must vanish at 0"));
        }
        let mut prev_slope = 0.0;
        let mut prev = (0.0, 0.0);
        for (&t, &b) in grid.iter().zip(&vals) {
            if !b.is_finite() {
                break;
            }
            if !(b > prev.1) {
                return Err(Error::param(format!("Young function not strictly increasing near t = {t:e}")));
            }
            let slope = (b - prev.1) / (t - prev.0);
            if slope < prev_slope * (1.0 - 1e-9) {
                return Err(Error::param(format!("Young function not convex near t = {t:e}")));
            }
            prev_slope = slope;
            prev = (t, b);
        }
        let last = *vals.last().expect("grid");
        if last.is_finite() && last < SEARCH_WINDOW.1 * 1e-2 {
            return Err(Error::param("Young function does not grow to infinity"));
        }
        Ok(())
    }

    /// `B(t)` for `t >= 0`.
    pub fn value(&self, t: f64) -> f64 {
        match &self.kind {
            YoungKind::Power(r) => {
                if *r == 1.0 {
                    t
                } else if *r == 2.0 {
                    t * t
                } else {
                    t.powf(*r)
                }
            }
            YoungKind::TLog => t * (E + t).ln(),
            YoungKind::PowLog { a, b } => t.powf(*a) * (E + t).ln().powf(*b),
            YoungKind::ExpMinusOne => t.exp_m1(),
            YoungKind::Table(pts) => {
                let i = pts.partition_point(|&(x, _)| x < t);
                let (x0, y0) = if i == 0 { (0.0, 0.0) } else { pts[i - 1] };
                let (x1, y1) = if i < pts.len() {
                    pts[i]
                } else if pts.len() >= 2 {
                    let n = pts.len();
                    let slope = (pts[n - 1].1 - pts[n - 2].1) / (pts[n - 1].0 - pts[n - 2].0);
                    (pts[n - 1].0 + 1.0, pts[n - 1].1 + slope)
                } else {
                    (2.0 * pts[0].0, 2.0 * pts[0].1)
                };
                y0 + (t - x0) * (y1 - y0) / (x1 - x0)
            }
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::param(format!("Young function evaluated at {t}")));
        }
        Ok(self.value(t))
    }

    /// `sup_{s>0} (s t - B(s))`.
    pub fn eval_complementary(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::param(format!("complementary function evaluated at {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let phi = |ls: f64| {
            let s = ls.exp();
            let v = s * t - self.value(s);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        };
        Ok(scan_and_refine(phi).max(0.0))
    }

    /// `h_B(s) = sup_{t>0} B(st) / B(t)`.
    pub fn h(&self, s: f64) -> Result<f64> {
        if s < 0.0 || s.is_nan() {
            return Err(Error::param(format!("h_B evaluated at {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let ratio = |lt: f64| {
            let t = lt.exp();
            let r = self.value(s * t) / self.value(t);
            if r.is_nan() {
                f64::NEG_INFINITY
            } else {
                r
            }
        };
        Ok(scan_and_refine(ratio))
    }
}

/// Maximizes `f` over `log t` in the search window: grid scan then golden section.
fn scan_and_refine(f: impl Fn(f64) -> f64) -> f64 {
    let (a, b) = (SEARCH_WINDOW.0.ln(), SEARCH_WINDOW.1.ln());
    let step = (b - a) / (SCAN_POINTS - 1) as f64;
    let mut best = (f64::NEG_INFINITY, 0usize);
    for i in 0..SCAN_POINTS {
        let v = f(a + step * i as f64);
        if v > best.0 {
            best = (v, i);
        }
    }
    let i = best.1;
    let lo = a + step * i.saturating_sub(1) as f64;
    let hi = a + step * (i + 1).min(SCAN_POINTS - 1) as f64;
    let (_, v) = golden_max(&f, lo, hi, 120);
    best.0.max(v)
}

impl fmt::Display for YoungSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            YoungKind::Power(r) => write!(f, "pow:{r}"),
            YoungKind::TLog => f.write_str("t*log(e+t)"),
            YoungKind::PowLog { a, b } => write!(f, "powlog:{a},{b}"),
            YoungKind::ExpMinusOne => f.write_str("exp-1"),
            YoungKind::Table(pts) => {
                let cells: Vec<String> = pts.iter().map(|(t, b)| format!("{t}:{b}")).collect();
                write!(f, "table:{}", cells.join(";"))
            }
        }
    }
}

fn num(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

impl FromStr for YoungSpec {
    type Err = Error;

    /// Accepts `t*log(e+t)`, `pow:r`, `powlog:a,b`, `exp-1`, `table:t:b;...`,
    /// optionally prefixed by `B=`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("B=").unwrap_or(s).trim();
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let kind = match compact.as_str() {
            "t*log(e+t)" | "tlog" | "t-log" | "llogl" => YoungKind::TLog,
            "exp-1" | "e^t-1" | "exp" => YoungKind::ExpMinusOne,
            "t" => YoungKind::Power(1.0),
            "t^2" => YoungKind::Power(2.0),
            other => {
                if let Some(r) = other.strip_prefix("pow:") {
                    YoungKind::Power(num(r)?)
                } else if let Some(ab) = other.strip_prefix("powlog:") {
                    let (a, b) = ab.split_once(',').ok_or_else(|| Error::Parse("powlog needs `a,b`".into()))?;
                    YoungKind::PowLog { a: num(a)?, b: num(b)? }
                } else if let Some(tab) = other.strip_prefix("table:") {
                    let pts = tab
                        .split(';')
                        .filter(|c| !c.is_empty())
                        .map(|c| {
                            let (t, b) = c.split_once(':').ok_or_else(|| Error::Parse(format!("bad table cell `{c}`")))?;
                            Ok((num(t)?, num(b)?))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    YoungKind::Table(pts)
                } else {
                    return Err(Error::Parse(format!("unknown Young function `{s}`")));
                }
            }
        };
        YoungSpec::new(kind)
    }
}

/// `Psi` and `Phi_1` for a pair `0 < alpha < beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointFns {
    alpha: f64,
    beta: f64,
    young: YoungSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Psi,
    Phi1,
}

impl EndpointFns {
    pub fn new(alpha: f64, beta: f64, young: YoungSpec) -> Result<Self> {
        if !(alpha > 0.0) || !(alpha < beta) || !beta.is_finite() {
            return Err(Error::param(format!("need 0 < alpha < beta, got alpha = {alpha}, beta = {beta}")));
        }
        Ok(EndpointFns { alpha, beta, young })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn young(&self) -> &YoungSpec {
        &self.young
    }

    /// `[t log(e + t^{alpha/beta})]^{beta/(beta-alpha)}`.
    pub fn psi(&self, t: f64) -> f64 {
        let r = self.alpha / self.beta;
        (t * (E + t.powf(r)).ln()).powf(self.beta / (self.beta - self.alpha))
    }

    /// `s / h_B(s^{alpha/beta})`.
    pub fn phi1(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(s / self.young.h(s.powf(self.alpha / self.beta))?)
    }

    pub fn eval(&self, which: Endpoint, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::param(format!("endpoint function evaluated at {t}")));
        }
        match which {
            Endpoint::Psi => Ok(self.psi(t)),
            Endpoint::Phi1 => self.phi1(t),
        }
    }
}

impl FromStr for EndpointFns {
    type Err = Error;

    /// `Psi:alpha=0.25,beta=1` with an optional `,B=<young>` tail.
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix("Psi:")
            .or_else(|| s.trim().strip_prefix("Phi1:"))
            .ok_or_else(|| Error::Parse(format!("endpoint spec must start with `Psi:`, got `{s}`")))?;
        let (mut alpha, mut beta, mut young) = (None, None, YoungSpec::t_log());
        let (pairs, tail) = match body.find("B=") {
            Some(i) => (&body[..i], Some(&body[i..])),
            None => (body, None),
        };
        for kv in pairs.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad pair `{kv}`")))?;
            match k.trim() {
                "alpha" => alpha = Some(num(v)?),
                "beta" => beta = Some(num(v)?),
                other => return Err(Error::Parse(format!("unknown endpoint key `{other}`"))),
            }
        }
        if let Some(t) = tail {
            young = t.parse()?;
        }
        let alpha = alpha.ok_or_else(|| Error::Parse("missing alpha".into()))?;
        let beta = beta.ok_or_else(|| Error::Parse("missing beta".into()))?;
        EndpointFns::new(alpha, beta, young)
    }
}

/// `inf { lambda : modular(lambda) <= 1 }` with
/// `modular(lambda) = normalizer^{-1} int B(g / lambda) dH`.
pub fn luxemburg_from_profile(prof: &ContentProfile, b: &YoungSpec, normalizer: f64) -> Result<f64> {
    if prof.is_zero() {
        return Ok(0.0);
    }
    let modular = |lambda: f64| prof.integral_of(|v| b.value(v / lambda)) / normalizer;
    let mut lambda = prof.max_value();
    let (mut lo, mut hi);
    if modular(lambda) <= 1.0 {
        hi = lambda;
        let mut steps = 0;
        loop {
            lambda *= 0.5;
            if modular(lambda) > 1.0 {
                lo = lambda;
                break;
            }
            hi = lambda;
            steps += 1;
            if steps > 2100 {
                return Err(Error::NonConvergence("Luxemburg bracket collapsed to 0".into()));
            }
        }
    } else {
        lo = lambda;
        let mut steps = 0;
        loop {
            lambda *= 2.0;
            if modular(lambda) <= 1.0 {
                hi = lambda;
                break;
            }
            lo = lambda;
            steps += 1;
            if steps > 2100 {
                return Err(Error::NonConvergence("Luxemburg bracket diverged".into()));
            }
        }
    }
    let mut iters = 0;
    while hi - lo > LUXEMBURG_RTOL * hi {
        if iters == BISECTION_LIMIT {
            return Err(Error::NonConvergence(format!("Luxemburg bisection stalled in [{lo}, {hi}]")));
        }
        let mid = 0.5 * (lo + hi);
        if modular(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    Ok(lo)
}

/// Mean Luxemburg quasinorm `||f||_{B,Q}`.
pub fn luxemburg_mean(f: &GridFunction, q: &GridCube, b: &YoungSpec, params: &ContentParams) -> Result<f64> {
    let region = Region::Cube(*q);
    region.validate(f.root())?;
    let mut p = Profiler::new(f.root(), params)?;
    let v = f.values();
    let prof = p.profile(region, |i| v[i].abs());
    luxemburg_from_profile(&prof, b, q.side(f.root()).powf(params.beta()))
}

/// Luxemburg quasinorm of `f` over a region.
pub fn luxemburg_global(f: &GridFunction, over: Region<'_>, b: &YoungSpec, params: &ContentParams) -> Result<f64> {
    over.validate(f.root())?;
    let mut p = Profiler::new(f.root(), params)?;
    let v = f.values();
    let prof = p.profile(over, |i| v[i].abs());
    luxemburg_from_profile(&prof, b, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::dyadic_content;
    use crate::lattice::{LeafSet, RootCube};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    // root of t log(e+t) = 1 by plain bisection on the formula
    fn t1() -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m * (E + m).ln() < 1.0 {
                lo = m
            } else {
                hi = m
            }
        }
        lo
    }

    #[test]
    fn young_basics() {
        let b = YoungSpec::t_log();
        assert_eq!(b.value(0.0), 0.0);
        assert!(b.eval(-1.0).is_err());
        let sq = YoungSpec::power(2.0).unwrap();
        for t in [0.01, 0.5, 1.0, 3.0, 40.0] {
            assert!(close(sq.eval_complementary(t).unwrap(), t * t / 4.0, 1e-10), "t = {t}");
        }
        assert!(1.0 <= b.value(1.0) + b.eval_complementary(1.0).unwrap());
        assert!(YoungSpec::power(0.5).is_err());
        assert!(YoungSpec::new(YoungKind::Table(vec![(1.0, 1.0), (2.0, 1.5)])).is_err());
        assert!(YoungSpec::new(YoungKind::Table(vec![(1.0, 1.0), (2.0, 3.0)])).is_ok());
    }

    #[test]
    fn young_inequality_on_grid() {
        for spec in ["t*log(e+t)", "pow:3", "powlog:1.5,2", "exp-1"] {
            let b: YoungSpec = spec.parse().unwrap();
            for &s in &[0.01, 0.3, 1.0, 2.0, 7.0] {
                for &t in &[0.01, 0.5, 1.0, 3.0, 9.0] {
                    let bt = b.eval_complementary(t).unwrap();
                    assert!(s * t <= (b.value(s) + bt) * (1.0 + 1e-12), "{spec} s={s} t={t}");
                }
            }
        }
    }

    #[test]
    fn complement_of_tlog_is_below_exp() {
        let b = YoungSpec::t_log();
        let ratio = [0.5, 1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&t| b.eval_complementary(t).unwrap() / t.exp_m1())
            .fold(0.0, f64::max);
        assert!(ratio.is_finite() && ratio < 1.0);
    }

    #[test]
    fn h_b_examples() {
        for spec in ["t*log(e+t)", "pow:2", "exp-1", "powlog:2,1"] {
            let b: YoungSpec = spec.parse().unwrap();
            assert_eq!(b.h(1.0).unwrap(), 1.0, "{spec}");
            assert_eq!(b.h(0.0).unwrap(), 0.0);
        }
        let b = YoungSpec::power(2.5).unwrap();
        for s in [0.1, 0.7, 3.0] {
            assert!(close(b.h(s).unwrap(), s.powf(2.5), 1e-12));
        }
    }

    #[test]
    fn h_b_monotone_and_submultiplicative() {
        let b = YoungSpec::t_log();
        let grid = [0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0];
        let hs: Vec<f64> = grid.iter().map(|&s| b.h(s).unwrap()).collect();
        assert!(hs.windows(2).all(|w| w[0] <= w[1]));
        for &s in &grid {
            for &t in &grid {
                let lhs = b.h(s * t).unwrap();
                assert!(lhs <= (1.0 + 1e-9) * b.h(s).unwrap() * b.h(t).unwrap());
            }
        }
    }

    #[test]
    fn endpoint_examples() {
        let e: EndpointFns = "Psi:alpha=0.25,beta=1".parse().unwrap();
        assert_eq!(e.eval(Endpoint::Psi, 0.0).unwrap(), 0.0);
        assert!(close(e.psi(1.0), (E + 1.0).ln().powf(1.0 / 0.75), 1e-15));
        assert_eq!(e.eval(Endpoint::Phi1, 1.0).unwrap(), 1.0);
        assert_eq!(e.eval(Endpoint::Phi1, 0.0).unwrap(), 0.0);
        assert!(EndpointFns::new(1.0, 1.0, YoungSpec::t_log()).is_err());
        let e: EndpointFns = "Psi:alpha=0.5,beta=1,B=pow:2".parse().unwrap();
        assert_eq!(e.young().kind(), &YoungKind::Power(2.0));
    }

    #[test]
    fn endpoint_shapes() {
        let e = EndpointFns::new(0.5, 1.0, YoungSpec::t_log()).unwrap();
        let grid: Vec<f64> = (0..40).map(|i| 1e-3 * 1.4f64.powi(i)).collect();
        let phi: Vec<f64> = grid.iter().map(|&s| e.phi1(s).unwrap()).collect();
        let psi: Vec<f64> = grid.iter().map(|&s| e.psi(s)).collect();
        for i in 1..grid.len() {
            assert!(phi[i] >= phi[i - 1] && psi[i] > psi[i - 1]);
            assert!(phi[i] / grid[i] <= (phi[i - 1] / grid[i - 1]) * (1.0 + 1e-9));
        }
        let xs = [0.3, 0.01, 2.0, 0.7];
        let total: f64 = xs.iter().sum();
        let sum: f64 = xs.iter().map(|&x| e.phi1(x).unwrap()).sum();
        assert!(e.phi1(total).unwrap() <= sum * (1.0 + 1e-9));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["t*log(e+t)", "pow:2", "powlog:1.5,2", "exp-1", "table:1:1;2:3;3:6"] {
            let b: YoungSpec = s.parse().unwrap();
            assert_eq!(b.to_string().parse::<YoungSpec>().unwrap(), b);
        }
        assert_eq!("B=pow:2".parse::<YoungSpec>().unwrap(), YoungSpec::power(2.0).unwrap());
        assert!("B=cosh".parse::<YoungSpec>().is_err());
    }

    #[test]
    fn luxemburg_examples() {
        let r = RootCube::unit(1, 4).unwrap();
        let p = ContentParams::dyadic(0.8).unwrap();
        let q = r.root_cube();
        let a = 3.0;
        let f = GridFunction::constant(&r, a);
        let lin = YoungSpec::power(1.0).unwrap();
        assert!(close(luxemburg_mean(&f, &q, &lin, &p).unwrap(), a, 1e-12));
        let l = luxemburg_mean(&f, &q, &YoungSpec::t_log(), &p).unwrap();
        assert!(close(l, a / t1(), 1e-11));
        assert_eq!(luxemburg_mean(&GridFunction::zeros(&r), &q, &lin, &p).unwrap(), 0.0);

        let e = LeafSet::from_leaves(&r, [2, 3, 11]).unwrap();
        let w = dyadic_content(&e, &p).unwrap();
        let g = e.indicator().scale(a);
        assert!(close(luxemburg_global(&g, Region::Root, &lin, &p).unwrap(), a * w, 1e-12));
    }

    proptest! {
        #[test]
        fn prop_luxemburg_scaling_and_monotonicity(
            v in proptest::collection::vec(0.0f64..4.0, 16),
            c in 0.1f64..10.0,
            beta in 0.2f64..1.0,
        ) {
            let r = RootCube::unit(1, 4).unwrap();
            let p = ContentParams::dyadic(beta).unwrap();
            let f = GridFunction::new(r.clone(), v).unwrap();
            let b = YoungSpec::t_log();
            let n = luxemburg_global(&f, Region::Root, &b, &p).unwrap();
            let nc = luxemburg_global(&f.scale(c), Region::Root, &b, &p).unwrap();
            prop_assert!(close(nc, c * n, 1e-10));
            let g = f.map(|x| x + 0.5);
            prop_assert!(luxemburg_global(&g, Region::Root, &b, &p).unwrap() >= n);
        }
    }
}
