use rayon::prelude::*;

use crate::bmo::Oscillator;
use crate::choquet::{Denominator, Profiler};
use crate::content::ContentParams;
use crate::error::{Error, Result};
use crate::lattice::{enumerate_cubes, CubeFamily, GridCube, GridFunction, Region};
use crate::young::{luxemburg_from_profile, YoungSpec};

/// Per-leaf supremum of a cube functional over the family cubes containing the leaf.
pub fn family_sup<S, I, V>(f: &GridFunction, family: CubeFamily, init: I, value: V) -> Result<GridFunction>
where
    I: Fn() -> S + Sync + Send,
    V: Fn(&mut S, &GridCube) -> Result<f64> + Sync + Send,
{
    let root = f.root();
    let cubes = enumerate_cubes(root, family, None)?;
    let vals: Vec<f64> = cubes
        .par_iter()
        .map_init(&init, |s, q| value(s, q))
        .collect::<Result<_>>()?;
    let mut out = vec![0.0f64; root.leaf_count()];
    for (q, v) in cubes.iter().zip(vals) {
        for leaf in q.to_box().leaves(root) {
            if v > out[leaf] {
                out[leaf] = v;
            }
        }
    }
    Ok(GridFunction::from_parts_unchecked(root.clone(), out))
}

fn profiler(f: &GridFunction, params: &ContentParams) -> Result<impl Fn() -> Profiler + Sync + Send> {
    let p = Profiler::new(f.root(), params)?;
    Ok(move || p.clone())
}

/// `sup_{Q ∋ x} l(Q)^a * (denominator)^{-1} int_Q |f| dH`.
fn fractional_with(
    f: &GridFunction,
    weight: f64,
    params: &ContentParams,
    family: CubeFamily,
    denominator: Denominator,
) -> Result<GridFunction> {
    let root = f.root();
    let v = f.values();
    let beta = params.beta();
    family_sup(f, family, profiler(f, params)?, |p, q| {
        let prof = p.profile(Region::Cube(*q), |i| v[i].abs());
        if prof.is_zero() {
            return Ok(0.0);
        }
        let side = q.side(root);
        let denom = match denominator {
            Denominator::Content => prof.base(),
            Denominator::SidePower => side.powf(beta),
        };
        Ok(side.powf(weight) * (prof.integral() / denom))
    })
}

/// Content maximal function with `H(Q)` in the denominator.
pub fn maximal_content(f: &GridFunction, params: &ContentParams, family: CubeFamily) -> Result<GridFunction> {
    fractional_with(f, 0.0, params, family, Denominator::Content)
}

pub fn maximal_content_with(
    f: &GridFunction,
    params: &ContentParams,
    family: CubeFamily,
    denominator: Denominator,
) -> Result<GridFunction> {
    fractional_with(f, 0.0, params, family, denominator)
}

/// Sharp maximal function: supremum of the mean oscillation normalized by `l(Q)^beta`.
pub fn maximal_sharp(f: &GridFunction, params: &ContentParams, family: CubeFamily) -> Result<GridFunction> {
    let root = f.root();
    let osc = Oscillator::new(root, params)?;
    let beta = params.beta();
    family_sup(f, family, || osc.clone(), |o, q| {
        if q.width() == 1 {
            return Ok(0.0);
        }
        o.load(f, Region::Cube(*q));
        Ok(o.oscillation(q.side(root).powf(beta), 1.0).value)
    })
}

fn check_weight(weight: f64, params: &ContentParams) -> Result<()> {
    if !(weight >= 0.0 && weight < params.beta()) {
        return Err(Error::param(format!(
            "fractional weight must lie in [0, beta), got {weight} with beta {}",
            params.beta()
        )));
    }
    Ok(())
}

/// `sup l(Q)^a H(Q)^{-1} int_Q |f| dH`.
pub fn maximal_fractional(
    f: &GridFunction,
    weight: f64,
    params: &ContentParams,
    family: CubeFamily,
) -> Result<GridFunction> {
    check_weight(weight, params)?;
    fractional_with(f, weight, params, family, Denominator::Content)
}

/// `sup l(Q)^a ||f||_{B,Q}`.
pub fn maximal_orlicz_fractional(
    f: &GridFunction,
    weight: f64,
    b: &YoungSpec,
    params: &ContentParams,
    family: CubeFamily,
) -> Result<GridFunction> {
    check_weight(weight, params)?;
    let root = f.root();
    let v = f.values();
    let beta = params.beta();
    family_sup(f, family, profiler(f, params)?, |p, q| {
        let prof = p.profile(Region::Cube(*q), |i| v[i].abs());
        let side = q.side(root);
        Ok(side.powf(weight) * luxemburg_from_profile(&prof, b, side.powf(beta))?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LeafSet, RootCube};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn spec_examples() {
        let r = RootCube::unit(1, 2).unwrap();
        let p = ContentParams::dyadic(1.0).unwrap();
        let m = maximal_content(&GridFunction::constant(&r, -3.0), &p, CubeFamily::Dyadic).unwrap();
        assert!(m.values().iter().all(|&x| close(x, 3.0, 1e-15)));

        let f = LeafSet::from_leaves(&r, [0]).unwrap().indicator();
        let m = maximal_content(&f, &p, CubeFamily::Dyadic).unwrap();
        assert_eq!(m.get(3), 0.25);
        assert!(close(m.get(0), 1.0, 1e-15));

        let frac = maximal_fractional(&f, 0.5, &p, CubeFamily::Dyadic).unwrap();
        // ancestors of leaf 0: widths 1/4, 1/2, 1 with averages 1, 1/2, 1/4
        let expect = [0.25f64.sqrt(), 0.5f64.sqrt() * 0.5, 0.25].into_iter().fold(0.0, f64::max);
        assert!(close(frac.get(0), expect, 1e-15));
        assert_eq!(maximal_fractional(&f, 0.0, &p, CubeFamily::Dyadic).unwrap(), m);
        assert!(maximal_fractional(&f, 1.0, &p, CubeFamily::Dyadic).is_err());

        let r1 = RootCube::unit(1, 1).unwrap();
        let b = GridFunction::new(r1, vec![0.0, 1.0]).unwrap();
        let s = maximal_sharp(&b, &p, CubeFamily::Dyadic).unwrap();
        assert_eq!(s.values(), &[0.5, 0.5]);
        let c = maximal_sharp(&GridFunction::constant(&r, 2.0), &p, CubeFamily::Dyadic).unwrap();
        assert!(c.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn orlicz_examples() {
        let r = RootCube::unit(1, 3).unwrap();
        let p = ContentParams::dyadic(0.8).unwrap();
        let f = GridFunction::from_fn(&r, |x| (x[0] * 9.0).sin().abs()).unwrap();
        let lin = YoungSpec::power(1.0).unwrap();
        let a = maximal_orlicz_fractional(&f, 0.3, &lin, &p, CubeFamily::Dyadic).unwrap();
        let b = maximal_fractional(&f, 0.3, &p, CubeFamily::Dyadic).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!(close(*x, *y, 1e-11));
        }
        let t1 = {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if m * (std::f64::consts::E + m).ln() < 1.0 {
                    lo = m
                } else {
                    hi = m
                }
            }
            lo
        };
        let c = maximal_orlicz_fractional(&GridFunction::constant(&r, 2.0), 0.3, &YoungSpec::t_log(), &p, CubeFamily::Dyadic)
            .unwrap();
        assert!(c.values().iter().all(|&x| close(x, 2.0 / t1, 1e-11)));
        let z = maximal_orlicz_fractional(&GridFunction::zeros(&r), 0.3, &YoungSpec::t_log(), &p, CubeFamily::Dyadic).unwrap();
        assert!(z.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn denominators_agree_on_dyadic_cubes() {
        let r = RootCube::unit(2, 3).unwrap();
        let p = ContentParams::dyadic(1.3).unwrap();
        let f = GridFunction::from_fn(&r, |x| x[0] * x[1] + 0.1).unwrap();
        let a = maximal_content_with(&f, &p, CubeFamily::Dyadic, Denominator::Content).unwrap();
        let b = maximal_content_with(&f, &p, CubeFamily::Dyadic, Denominator::SidePower).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn prop_maximal_dominates_and_is_homogeneous(
            v in proptest::collection::vec(-4.0f64..4.0, 16), beta in 0.2f64..2.0, k in -3i32..3
        ) {
            let r = RootCube::unit(2, 2).unwrap();
            let p = ContentParams::dyadic(beta).unwrap();
            let f = GridFunction::new(r, v).unwrap();
            for fam in [CubeFamily::Dyadic, CubeFamily::ShiftedDyadic] {
                let m = maximal_content(&f, &p, fam).unwrap();
                for (a, b) in m.values().iter().zip(f.values()) {
                    prop_assert!(*a >= b.abs() * (1.0 - 1e-15));
                }
                let c = (k as f64).exp2();
                let mc = maximal_content(&f.scale(c), &p, fam).unwrap();
                prop_assert_eq!(mc, m.scale(c));
            }
        }

        #[test]
        fn prop_monotone(v in proptest::collection::vec(0.0f64..4.0, 16), beta in 0.2f64..1.0) {
            let r = RootCube::unit(1, 4).unwrap();
            let p = ContentParams::dyadic(beta).unwrap();
            let f = GridFunction::new(r, v).unwrap();
            let g = f.map(|x| x * 1.5 + 0.25);
            let (mf, mg) = (
                maximal_fractional(&f, 0.1, &p, CubeFamily::Dyadic).unwrap(),
                maximal_fractional(&g, 0.1, &p, CubeFamily::Dyadic).unwrap(),
            );
            for (a, b) in mf.values().iter().zip(mg.values()) {
                prop_assert!(a <= b);
            }
        }

        #[test]
        fn prop_orlicz_dominates_fractional(v in proptest::collection::vec(0.0f64..4.0, 16), beta in 0.3f64..1.0) {
            let r = RootCube::unit(1, 4).unwrap();
            let p = ContentParams::dyadic(beta).unwrap();
            let f = GridFunction::new(r, v).unwrap();
            let a = maximal_fractional(&f, 0.2, &p, CubeFamily::Dyadic).unwrap();
            let b = maximal_orlicz_fractional(&f, 0.2, &YoungSpec::t_log(), &p, CubeFamily::Dyadic).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!(*x <= 4.0 * y * (1.0 + 1e-12));
            }
        }
    }
}
