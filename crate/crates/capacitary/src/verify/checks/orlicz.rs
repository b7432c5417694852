use std::collections::HashMap;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::lattice::{enumerate_cubes, CubeFamily, GridCube, GridFunction, LeafSet, Region, MAX_DIM};
use crate::numeric::log_grid;
use crate::operators::maximal_orlicz_fractional;
use crate::verify::config::CheckConfig;
use crate::verify::report::{ratio, LevelData};
use crate::young::{luxemburg_from_profile, YoungKind, YoungSpec};

use super::Level;

/// Piecewise linear majorant of the complementary function on `[1e-3, 64]`.
/// `B̄` vanishes near 0 for some `B`, so `1e-9 t` is added to keep the table
/// strictly increasing; the relative margin absorbs the error of the sup.
pub(crate) fn complementary_table(b: &YoungSpec) -> Result<YoungSpec> {
    let mut pts = Vec::new();
    for t in log_grid(1e-3, 64.0, 241) {
        pts.push((t, (1.0 + 1e-9) * b.eval_complementary(t)? + 1e-9 * t));
    }
    YoungSpec::new(YoungKind::Table(pts))
}

fn cube_norm(lvl: &Level<'_>, g: &GridFunction, q: &GridCube, b: &YoungSpec) -> Result<f64> {
    let v = g.values();
    let prof = lvl.profiler()?.profile(Region::Cube(*q), |i| v[i].abs());
    luxemburg_from_profile(&prof, b, q.side(&lvl.root).powf(lvl.beta()))
}

pub(crate) fn holder(lvl: &Level<'_>) -> Result<LevelData> {
    let young = &lvl.cfg.young;
    let bar = complementary_table(young)?;
    let beta = lvl.beta();
    let cubes = lvl.dyadic_at(3..=4);
    let ratios = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let mut rng = lvl.rng(k, "cubes");
        let picked: Vec<&GridCube> = cubes.choose_multiple(&mut rng, 8).collect();
        let prod = s.f.zip_map(&s.b, |x, y| x * y)?;
        let mut worst = 0.0f64;
        for q in picked {
            let lhs = lvl.profile(&prod, Region::Cube(*q))?.integral() / q.side(&lvl.root).powf(beta);
            let rhs = cube_norm(lvl, &s.f, q, young)? * cube_norm(lvl, &s.b, q, &bar)?;
            worst = worst.max(ratio(lhs, rhs));
        }
        Ok(worst)
    })?;
    let mut d = LevelData::default();
    d.claim("holder", Some(2.0), ratios);
    Ok(d)
}

/// `2^{1+n+beta}`: the localization constant with the factor 2 of the
/// Choquet quasi-triangle inequality.
fn localization_constant(cfg: &CheckConfig) -> f64 {
    (1.0 + cfg.n as f64 + cfg.beta).exp2()
}

pub(crate) fn dyadic_localization(lvl: &Level<'_>) -> Result<LevelData> {
    let cfg = lvl.cfg;
    let young = &cfg.young;
    let alpha = cfg.alpha;
    let n = cfg.n;
    let root = &lvl.root;
    let shifted = enumerate_cubes(root, CubeFamily::ShiftedDyadic, None)?;
    let dyadic = enumerate_cubes(root, CubeFamily::Dyadic, None)?;
    let cst = localization_constant(cfg);
    let rows = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let f = s.f.zip_map(&s.b, |x, y| x + y.abs())?;
        let weighted = |q: &GridCube| -> Result<f64> { Ok(q.side(root).powf(alpha) * cube_norm(lvl, &f, q, young)?) };
        let dvals: HashMap<GridCube, f64> = dyadic
            .iter()
            .map(|q| Ok((*q, weighted(q)?)))
            .collect::<Result<_>>()?;
        let mut neighbour = 0.0f64;
        for q in &shifted {
            let t = weighted(q)?;
            let w = q.width();
            let mut best = 0.0f64;
            let axes: Vec<[u32; 2]> = (0..n).map(|a| [q.lo()[a] / w, q.lo()[a].div_ceil(w)]).collect();
            for mask in 0..(1usize << n) {
                let mut lo = [0u32; MAX_DIM];
                for a in 0..n {
                    lo[a] = axes[a][(mask >> a) & 1] * w;
                }
                let p = GridCube::new(n, lo, w);
                let v = *dvals.get(&p).ok_or_else(|| Error::Degenerate("dyadic neighbour outside root".into()))?;
                best = best.max(v);
            }
            neighbour = neighbour.max(ratio(t, best));
        }

        let m_all = maximal_orlicz_fractional(&f, alpha, young, &lvl.params, CubeFamily::ShiftedDyadic)?;
        let m_dy = maximal_orlicz_fractional(&f, alpha, young, &lvl.params, CubeFamily::Dyadic)?;
        let mut profiler = lvl.profiler()?;
        let mut levels: Vec<f64> = m_all.values().to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        levels.pop();
        let mut cor = 0.0f64;
        for t in levels {
            let e = LeafSet::strict_superlevel(&m_all, t);
            let l = LeafSet::strict_superlevel(&m_dy, t / cst);
            let he = profiler.content(Region::Set(&e));
            let hl = profiler.content(Region::Set(&l));
            cor = cor.max(ratio(he, 3f64.powi(n as i32) * hl));
        }
        Ok([neighbour, cor])
    })?;
    let mut d = LevelData::default();
    d.claim("dyadic_neighbour", Some(cst), rows.iter().map(|r| r[0]).collect());
    d.claim("level_sets", Some(1.0), rows.iter().map(|r| r[1]).collect());
    Ok(d)
}

/// `B(t) / t^{beta/alpha}` nonincreasing on a log grid.
pub(crate) fn require_decreasing_quotient(cfg: &CheckConfig) -> Result<()> {
    let r = cfg.beta / cfg.alpha;
    let grid = log_grid(1e-6, 1e6, 241);
    let q: Vec<f64> = grid.iter().map(|&t| cfg.young.value(t) / t.powf(r)).collect();
    if q.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)) {
        Ok(())
    } else {
        Err(Error::param(format!("B(t)/t^(beta/alpha) is not decreasing for B = {}", cfg.young)))
    }
}

pub(crate) fn weak(lvl: &Level<'_>) -> Result<LevelData> {
    let cfg = lvl.cfg;
    let ep = cfg.endpoint()?;
    let ratios = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let f = s.f.zip_map(&s.b, |x, y| x + y.abs())?;
        let m = maximal_orlicz_fractional(&f, cfg.alpha, &cfg.young, &lvl.params, cfg.family)?;
        let fprof = lvl.profile(&f, Region::Root)?;
        let mut profiler = lvl.profiler()?;
        let mut levels: Vec<f64> = m.values().to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        levels.pop();
        let mut worst = 0.0f64;
        for t in levels.into_iter().filter(|&t| t > 0.0) {
            let h = profiler.content(Region::Set(&LeafSet::strict_superlevel(&m, t)));
            let rhs = fprof.integral_of(|v| cfg.young.value(v / t));
            worst = worst.max(ratio(ep.phi1(h)?, rhs));
        }
        Ok(worst)
    })?;
    let mut d = LevelData::default();
    d.claim("modular_weak_type", None, ratios);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complementary_table_majorizes() {
        let b = YoungSpec::t_log();
        let bar = complementary_table(&b).unwrap();
        for t in log_grid(1e-3, 50.0, 37) {
            let (x, y) = (bar.value(t), b.eval_complementary(t).unwrap());
            assert!(x >= y, "{t} {x} {y}");
        }
    }

    #[test]
    fn quotient_requirement() {
        let mut cfg = CheckConfig::quick();
        assert!(require_decreasing_quotient(&cfg).is_ok());
        cfg.young = YoungSpec::new(YoungKind::ExpMinusOne).unwrap();
        assert!(require_decreasing_quotient(&cfg).is_err());
    }
}
