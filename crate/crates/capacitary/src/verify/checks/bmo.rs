use rand::Rng;

use crate::bmo::{bmo_norm, cube_oscillations, shifted_mean_gap, truncate};
use crate::error::Result;
use crate::lattice::{GridFunction, Region};
use crate::operators::{maximal_content, maximal_sharp};
use crate::verify::generators::{normalized_symbol, FunctionSpec};
use crate::verify::report::{ratio, two_sided, LevelData};

use super::Level;

pub(crate) fn fefferman_stein(lvl: &Level<'_>) -> Result<LevelData> {
    let family = lvl.cfg.family;
    let ratios = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let g = s.b.zip_map(&s.f, |x, y| x * y)?;
        let m = maximal_content(&g, &lvl.params, family)?;
        let sharp = maximal_sharp(&g, &lvl.params, family)?;
        Ok(ratio(lvl.lp(&m, lvl.cfg.p)?, lvl.lp(&sharp, lvl.cfg.p)?))
    })?;
    let mut d = LevelData::default();
    d.claim("fefferman_stein", None, ratios);
    Ok(d)
}

/// `sup_t phi(t) H({g > t})` for nondecreasing `phi`, attained at the values of `g`.
fn weak_sup(lvl: &Level<'_>, g: &GridFunction, phi: &impl Fn(f64) -> f64) -> Result<f64> {
    let prof = lvl.profile(g, Region::Root)?;
    Ok(prof
        .values()
        .iter()
        .zip(prof.contents())
        .fold(0.0f64, |m, (&v, &h)| m.max(phi(v) * h)))
}

pub(crate) fn modular_fs(lvl: &Level<'_>) -> Result<LevelData> {
    let family = lvl.cfg.family;
    let ep = lvl.cfg.endpoint()?;
    let young = &lvl.cfg.young;
    let phi = |t: f64| 1.0 / ep.psi(young.value(1.0 / t));
    let ratios = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let g = s.b.zip_map(&s.f, |x, y| x * y)?;
        let m = maximal_content(&g, &lvl.params, family)?;
        let sharp = maximal_sharp(&g, &lvl.params, family)?;
        Ok(ratio(weak_sup(lvl, &m, &phi)?, weak_sup(lvl, &sharp, &phi)?))
    })?;
    let mut d = LevelData::default();
    d.claim("modular_fs", None, ratios);
    Ok(d)
}

pub(crate) fn bmo_shift(lvl: &Level<'_>) -> Result<LevelData> {
    let per_axis = lvl.root.per_axis();
    let ratios = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let q = lvl.random_cube(&mut lvl.rng(k, "cube"), 3..=5);
        let mut worst = 0.0f64;
        let mut j = 1u32;
        loop {
            let gap = shifted_mean_gap(&s.b, &q, j, &lvl.params)?;
            worst = worst.max(ratio(gap, j as f64 * s.b_norm));
            let big = q.dilate_clipped(&lvl.root, j)?;
            let covers = (0..lvl.cfg.n).all(|a| big.lo()[a] == 0 && big.hi()[a] == per_axis);
            if covers {
                break;
            }
            j += 1;
        }
        Ok(worst)
    })?;
    let mut d = LevelData::default();
    d.claim("bmo_shift", None, ratios);
    Ok(d)
}

/// Target for the exponential mean in the exponential integrability check.
const EXP_TARGET: f64 = 4.0;

/// Smallest `C` on the grid `2^{j/4}`, `1/16 <= C <= 64`, with
/// `l(Q)^{-beta} int_Q exp(|b - b_Q| / C) dH <= 4` on every dyadic cube;
/// infinite when the largest fails.
pub(crate) fn exp_constant(lvl: &Level<'_>, b: &GridFunction) -> Result<f64> {
    let grid: Vec<f64> = (-16..=24).map(|j| (j as f64 / 4.0).exp2()).collect();
    let mut need = 0usize;
    let beta = lvl.beta();
    let oscs = cube_oscillations(b, &lvl.params, crate::lattice::CubeFamily::Dyadic, 1.0)?;
    let mut profiler = lvl.profiler()?;
    let v = b.values();
    for (q, o) in &oscs {
        let prof = profiler.profile(Region::Cube(*q), |i| (v[i] - o.c_star).abs());
        let norm = q.side(&lvl.root).powf(beta);
        let ok = |c: f64| prof.integral_of(|t| (t / c).exp()) / norm <= EXP_TARGET;
        if ok(grid[need]) {
            continue;
        }
        if !ok(grid[grid.len() - 1]) {
            return Ok(f64::INFINITY);
        }
        let (mut lo, mut hi) = (need, grid.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ok(grid[mid]) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        need = hi;
    }
    Ok(grid[need])
}

pub(crate) fn exp_bmo(lvl: &Level<'_>) -> Result<LevelData> {
    let ratios = lvl.each(|k| {
        let s = lvl.sample(k)?;
        if s.b_norm == 0.0 {
            return Ok(0.0);
        }
        exp_constant(lvl, &s.b)
    })?;
    let mut d = LevelData::default();
    d.claim("exp_bmo", None, ratios);
    d.diag("exp_mean_target", EXP_TARGET);
    Ok(d)
}

pub(crate) fn jn_p(lvl: &Level<'_>) -> Result<LevelData> {
    let family = lvl.cfg.family;
    let ratios = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let mut worst = 0.0f64;
        for p in [1.0, 2.0, 4.0, 8.0] {
            let sup = cube_oscillations(&s.b, &lvl.params, family, p)?
                .iter()
                .fold(0.0f64, |m, (_, o)| m.max(o.value));
            worst = worst.max(ratio(sup, p * s.b_norm));
        }
        Ok(worst)
    })?;
    let mut d = LevelData::default();
    d.claim("jn_p", None, ratios);
    Ok(d)
}

pub(crate) fn bmo_lattice(lvl: &Level<'_>) -> Result<LevelData> {
    let cfg = lvl.cfg;
    let rows = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let mut rng = lvl.rng(k, "second");
        let gk = cfg.b_kinds[rng.gen_range(0..cfg.b_kinds.len())];
        let gspec = FunctionSpec::symbol(gk, cfg.n, &mut rng)?;
        let g = normalized_symbol(gk, &gspec, cfg, &lvl.root)?;
        let lambda = (rng.gen_range(-3i32..=3) as f64).exp2() * if rng.gen::<bool>() { -1.0 } else { 1.0 };
        let norm = |h: &GridFunction| bmo_norm(h, &lvl.params, cfg.family);
        let (nb, ng) = (norm(&s.b)?, norm(&g)?);
        let sum = ratio(norm(&s.b.zip_map(&g, |x, y| x + y)?)?, nb + ng);
        let scaled = two_sided(norm(&s.b.scale(lambda))?, lambda.abs() * nb);
        let abs = ratio(norm(&s.b.abs())?, nb);
        let max = ratio(norm(&s.b.zip_map(&g, f64::max)?)?, nb + ng);
        let min = ratio(norm(&s.b.zip_map(&g, f64::min)?)?, nb + ng);
        let mut trunc = 0.0f64;
        for level in [0.5, 1.0, 2.0] {
            trunc = trunc.max(ratio(norm(&truncate(&s.b, level)?)?, nb));
        }
        Ok([sum, scaled, abs, max, min, trunc])
    })?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let mut d = LevelData::default();
    d.claim("sum", Some(2.0), col(0));
    d.claim("scaling", Some(1.0), col(1));
    d.claim("absolute_value", None, col(2));
    d.claim("maximum", None, col(3));
    d.claim("minimum", None, col(4));
    d.claim("truncation", None, col(5));
    Ok(d)
}
