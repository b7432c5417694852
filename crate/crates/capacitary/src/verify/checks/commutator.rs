use crate::bmo::oscillation_region;
use crate::error::{Error, Result};
use crate::lattice::{GridFunction, LeafSet, Region, MAX_DIM};
use crate::operators::{
    commutator_with, maximal_content, maximal_fractional, maximal_orlicz_fractional, maximal_sharp, ExponentPair,
    RieszMethod, RieszOperator, RieszParams,
};
use crate::verify::config::CheckConfig;
use crate::verify::generators::{fourier_witness, rng_for, witness_target, FunctionSpec};
use crate::verify::report::{max_of, ratio, LevelData};

use super::{max_ratio, Level, Sample};

/// `[b, I] f`, identically zero for constant `b`.
fn commutator_of(op: &RieszOperator, s: &Sample) -> Result<GridFunction> {
    if s.b.is_constant() {
        return Ok(GridFunction::zeros(s.b.root()));
    }
    commutator_with(op, &s.b, &s.f)
}

/// `M(|g|^s)^{1/s}`.
fn power_maximal(lvl: &Level<'_>, g: &GridFunction, s: f64) -> Result<GridFunction> {
    let m = maximal_content(&g.map(|v| v.abs().powf(s)), &lvl.params, lvl.cfg.family)?;
    Ok(m.map(|v| v.powf(1.0 / s)))
}

fn s_values(cfg: &CheckConfig) -> Vec<f64> {
    let mut s = vec![1.5, 2.0, cfg.s];
    s.sort_by(f64::total_cmp);
    s.dedup();
    s
}

pub(crate) fn pointwise_sharp(lvl: &Level<'_>) -> Result<LevelData> {
    let cfg = lvl.cfg;
    let op = lvl.riesz()?;
    let ss = s_values(cfg);
    let eq2 = cfg.endpoint_range();
    let power_variant = cfg.alpha * cfg.t < cfg.beta;
    let cubes = lvl.dyadic_at(2..=4);
    let rows = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let g = commutator_of(&op, &s)?;
        let lhs = maximal_sharp(&g, &lvl.params, cfg.family)?;
        let i_f = op.apply(&s.f)?;
        let orlicz = maximal_orlicz_fractional(&s.f, cfg.alpha, &cfg.young, &lvl.params, cfg.family)?;
        let mut out = Vec::new();
        for &sv in &ss {
            let rhs = power_maximal(lvl, &i_f, sv)?.zip_map(&orlicz, |a, m| s.b_norm * (a + m))?;
            out.push(max_ratio(&lhs, &rhs));
        }
        out.push(if eq2 {
            let rhs = i_f.zip_map(&orlicz, |a, m| s.b_norm * (a.abs() + m))?;
            max_ratio(&lhs, &rhs)
        } else {
            0.0
        });
        out.push(if power_variant {
            let t = cfg.t;
            let ft = maximal_fractional(&s.f.map(|v| v.abs().powf(t)), cfg.alpha * t, &lvl.params, cfg.family)?;
            let rhs = power_maximal(lvl, &i_f, cfg.s)?.zip_map(&ft, |a, m| s.b_norm * (a + m.powf(1.0 / t)))?;
            max_ratio(&lhs, &rhs)
        } else {
            0.0
        });
        let terms = if s.b_norm == 0.0 { [0.0; 3] } else { decomposition(lvl, &op, &s, &cubes)? };
        out.extend(terms);
        Ok(out)
    })?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let mut d = LevelData::default();
    for (j, sv) in ss.iter().enumerate() {
        d.claim(format!("sharp_orlicz_s{sv}"), None, col(j));
    }
    let base = ss.len();
    if eq2 {
        d.claim("sharp_endpoint", None, col(base));
    }
    if power_variant {
        d.claim("sharp_power", None, col(base + 1));
    }
    for (j, name) in ["I1", "I2", "I3"].iter().enumerate() {
        d.diag(*name, max_of(&col(base + 2 + j)));
    }
    Ok(d)
}

/// Largest `I_1, I_2, I_3` of the local/far splitting over the given cubes.
fn decomposition(
    lvl: &Level<'_>,
    op: &RieszOperator,
    s: &Sample,
    cubes: &[crate::lattice::GridCube],
) -> Result<[f64; 3]> {
    let root = &lvl.root;
    let beta = lvl.beta();
    let n = lvl.cfg.n;
    let i_f = op.apply(&s.f)?;
    let mut worst = [0.0f64; 3];
    for q in cubes {
        let two = q.dilate_clipped(root, 1)?;
        let star = LeafSet::region(root, Region::Box(two))?;
        let norm = q.side(root).powf(beta);
        let c_star = oscillation_region(&s.b, Region::Box(two), 2f64.powf(beta) * norm, &lvl.params, 1.0)?.c_star;
        let db = s.b.map(|v| v - c_star);
        let f1 = s.f.masked(Region::Set(&star));
        let f2 = s.f.zip_map(&f1, |a, b| a - b)?;
        let t1 = db.zip_map(&i_f, |x, y| x * y)?;
        let t2 = op.apply(&db.zip_map(&f1, |x, y| x * y)?)?;
        let t3 = op.apply(&db.zip_map(&f2, |x, y| x * y)?)?;
        let mut c = [0u32; MAX_DIM];
        for a in 0..n {
            c[a] = q.lo()[a] + q.width() / 2;
        }
        let center = t3.get(root.leaf_index(&c));
        let t3 = t3.map(|v| v - center);
        for (slot, t) in worst.iter_mut().zip([t1, t2, t3]) {
            *slot = slot.max(lvl.profile(&t, Region::Cube(*q))?.integral() / norm);
        }
    }
    Ok(worst)
}

pub(crate) fn strong_type(lvl: &Level<'_>) -> Result<LevelData> {
    let ex = lvl.cfg.exponents()?;
    let op = lvl.riesz()?;
    let ratios = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let g = commutator_of(&op, &s)?;
        Ok(ratio(lvl.lp(&g, ex.q)?, s.b_norm * lvl.lp(&s.f, ex.p)?))
    })?;
    let mut d = LevelData::default();
    d.claim("strong_type", None, ratios);
    Ok(d)
}

/// Largest `||[b, I] f||_q / ||f||_p` over `cfg.samples` test functions drawn
/// independently of `b` and the oscillation witnesses of `b`; zero for
/// constant `b`.
pub fn estimate_operator_norm(b: &GridFunction, ex: &ExponentPair, cfg: &CheckConfig) -> Result<f64> {
    let root = b.root();
    let params = cfg.content()?;
    let op = RieszOperator::new(root, &RieszParams::new(ex.alpha, root.dim(), RieszMethod::Fft)?)?;
    let mut family = Vec::new();
    for k in 0..cfg.samples {
        let kind = cfg.f_kinds[k % cfg.f_kinds.len()];
        let mut rng = rng_for(cfg.seed, "operator-norm", k as u64);
        family.push(FunctionSpec::test_function(kind, root.dim(), &mut rng)?.discretize(root)?);
    }
    if let Some(q) = witness_target(b, cfg)? {
        family.extend(fourier_witness(b, &q, 2)?.functions);
    }
    if family.is_empty() {
        return Err(Error::Degenerate("empty test function family".into()));
    }
    if b.is_constant() {
        return Ok(0.0);
    }
    let lp = |g: &GridFunction, p: f64| crate::choquet::lp_quasinorm(g, p, &params, Region::Root);
    let mut best = 0.0f64;
    for f in &family {
        let g = commutator_with(&op, b, f)?;
        best = best.max(ratio(lp(&g, ex.q)?, lp(f, ex.p)?));
    }
    Ok(best)
}

pub(crate) fn necessity(lvl: &Level<'_>) -> Result<LevelData> {
    let ex = lvl.cfg.exponents()?;
    let rows = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let est = estimate_operator_norm(&s.b, &ex, lvl.cfg)?;
        Ok([ratio(s.b_norm, est), ratio(est, s.b_norm)])
    })?;
    let mut d = LevelData::default();
    d.claim("norm_lower", None, rows.iter().map(|r| r[0]).collect());
    d.claim("norm_upper", None, rows.iter().map(|r| r[1]).collect());
    Ok(d)
}

pub(crate) fn require_endpoint(cfg: &CheckConfig) -> Result<()> {
    if cfg.endpoint_range() {
        Ok(())
    } else {
        Err(Error::param(format!(
            "endpoint checks need beta in (n - alpha, n], got n={}, alpha={}, beta={}",
            cfg.n, cfg.alpha, cfg.beta
        )))
    }
}

pub(crate) fn require_exponents(cfg: &CheckConfig) -> Result<()> {
    cfg.exponents().map(|_| ())
}

pub(crate) fn modular_weak(lvl: &Level<'_>) -> Result<LevelData> {
    let cfg = lvl.cfg;
    let ep = cfg.endpoint()?;
    let op = lvl.riesz()?;
    let (alpha, beta) = (cfg.alpha, cfg.beta);
    let rows = lvl.each(|k| {
        let s = lvl.sample(k)?;
        let g = commutator_of(&op, &s)?;
        let fprof = lvl.profile(&s.f, Region::Root)?;
        let gprof = lvl.profile(&g, Region::Root)?;
        let mut modular = 0.0f64;
        for (&v, &h) in gprof.values().iter().zip(gprof.contents()) {
            let rhs = ep.psi(fprof.integral_of(|x| cfg.young.value(s.b_norm * x / v)));
            modular = modular.max(ratio(h, rhs));
        }
        let iprof = lvl.profile(&op.apply(&s.f)?, Region::Root)?;
        let mass = fprof.integral();
        let mut weak = 0.0f64;
        for (&v, &h) in iprof.values().iter().zip(iprof.contents()) {
            weak = weak.max(ratio(h, (mass / v).powf(beta / (beta - alpha))));
        }
        Ok([modular, weak])
    })?;
    let mut d = LevelData::default();
    d.claim("modular_weak", None, rows.iter().map(|r| r[0]).collect());
    d.claim("riesz_weak", None, rows.iter().map(|r| r[1]).collect());
    Ok(d)
}
