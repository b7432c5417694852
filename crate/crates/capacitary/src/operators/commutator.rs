use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::GridFunction;
use crate::numeric::binomial;

use super::riesz::{RieszOperator, RieszParams};

/// Strong-type exponents with `1/p - 1/q = alpha/beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ExponentPair {
    pub fn new(p: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && p > 1.0 && p < beta / alpha) {
            return Err(Error::param(format!(
                "need 1 < p < beta/alpha, got p={p}, alpha={alpha}, beta={beta}"
            )));
        }
        let q = 1.0 / (1.0 / p - alpha / beta);
        Ok(ExponentPair { p, q, alpha, beta })
    }
}

/// `b I f - I(b f)`.
pub fn commutator(b: &GridFunction, f: &GridFunction, params: &RieszParams) -> Result<GridFunction> {
    b.same_root(f)?;
    let op = RieszOperator::new(f.root(), params)?;
    commutator_with(&op, b, f)
}

pub fn commutator_with(op: &RieszOperator, b: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    b.same_root(f)?;
    let i_f = op.apply(f)?;
    let i_bf = op.apply(&b.zip_map(f, |x, y| x * y)?)?;
    let lhs = b.zip_map(&i_f, |x, y| x * y)?;
    lhs.zip_map(&i_bf, |x, y| x - y)
}

/// `sum_j C(m,j) (-1)^j b^{m-j} I(b^j f)`.
pub fn iterated_commutator(b: &GridFunction, f: &GridFunction, m: u32, params: &RieszParams) -> Result<GridFunction> {
    if m == 0 {
        return Err(Error::param("commutator order must be at least 1"));
    }
    b.same_root(f)?;
    let op = RieszOperator::new(f.root(), params)?;
    let mut acc = GridFunction::zeros(f.root());
    for j in 0..=m {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let coef = sign * binomial(m, j);
        let bj_f = b.zip_map(f, |x, y| x.powi(j as i32) * y)?;
        let term = op.apply(&bj_f)?;
        let term = b.zip_map(&term, |x, t| coef * (x.powi((m - j) as i32) * t))?;
        acc = acc.zip_map(&term, |a, t| a + t)?;
    }
    Ok(acc)
}
