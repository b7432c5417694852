use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::choquet::Profiler;
use crate::content::ContentParams;
use crate::error::{Error, Result};
use crate::lattice::{GridFunction, Region, RootCube};
use crate::numeric::gauss_legendre;

const QUADRATURE_ORDER: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RieszMethod {
    Direct,
    #[default]
    Fft,
}

impl FromStr for RieszMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "direct" => Ok(RieszMethod::Direct),
            "fft" => Ok(RieszMethod::Fft),
            other => Err(Error::Parse(format!("unknown Riesz method `{other}`"))),
        }
    }
}

/// Average of `|z|^{alpha-n}` over the unit cell `[-1/2, 1/2]^n`.
///
/// The cell splits into `2n` pyramids over its faces; on each the radial
/// integral is explicit and the face integral is smooth.
pub fn self_cell_constant(dim: usize, alpha: f64) -> f64 {
    let radial = 2.0 * dim as f64 * (-alpha).exp2() / alpha;
    let e = 0.5 * (alpha - dim as f64);
    let face = match dim {
        1 => 1.0,
        2 => {
            let (x, w) = gauss_legendre(QUADRATURE_ORDER);
            x.iter().zip(&w).map(|(u, w)| w * (1.0 + u * u).powf(e)).sum()
        }
        _ => {
            let (x, w) = gauss_legendre(QUADRATURE_ORDER);
            let mut s = 0.0;
            for (u, wu) in x.iter().zip(&w) {
                for (v, wv) in x.iter().zip(&w) {
                    s += wu * wv * (1.0 + u * u + v * v).powf(e);
                }
            }
            s
        }
    };
    radial * face
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszParams {
    alpha: f64,
    dim: usize,
    method: RieszMethod,
    self_cell: f64,
}

impl RieszParams {
    pub fn new(alpha: f64, dim: usize, method: RieszMethod) -> Result<Self> {
        if !(alpha > 0.0 && alpha < dim as f64) {
            return Err(Error::param(format!("Riesz order must lie in (0, {dim}), got {alpha}")));
        }
        Ok(RieszParams { alpha, dim, method, self_cell: self_cell_constant(dim, alpha) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn method(&self) -> RieszMethod {
        self.method
    }

    pub fn with_method(mut self, method: RieszMethod) -> Self {
        self.method = method;
        self
    }

    /// Unit-cell average of the kernel.
    pub fn self_cell(&self) -> f64 {
        self.self_cell
    }
}

/// Discrete `I_alpha` on one root.
#[derive(Clone)]
pub struct RieszOperator {
    root: RootCube,
    params: RieszParams,
    // kernel weights K(d) h^n indexed by |d| per axis
    table: Vec<f64>,
    spectrum: Option<Arc<Vec<Complex64>>>,
}

impl std::fmt::Debug for RieszOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RieszOperator").field("root", &self.root).field("params", &self.params).finish()
    }
}

impl RieszOperator {
    pub fn new(root: &RootCube, params: &RieszParams) -> Result<Self> {
        if root.dim() != params.dim {
            return Err(Error::DimensionMismatch(format!(
                "Riesz params for n={} applied on n={}",
                params.dim,
                root.dim()
            )));
        }
        let n = root.dim();
        let m = root.per_axis() as usize;
        let h = root.leaf_side();
        let vol = root.leaf_volume();
        let e = params.alpha - n as f64;
        let size = m.pow(n as u32);
        let mut table = vec![0.0; size];
        for (idx, t) in table.iter_mut().enumerate() {
            let mut r2 = 0.0;
            let mut rest = idx;
            for _ in 0..n {
                let d = (rest % m) as f64;
                rest /= m;
                r2 += d * d;
            }
            *t = if idx == 0 {
                params.self_cell * h.powf(e) * vol
            } else {
                (r2.sqrt() * h).powf(e) * vol
            };
        }
        let mut op = RieszOperator { root: root.clone(), params: *params, table, spectrum: None };
        if params.method == RieszMethod::Fft {
            op.spectrum = Some(Arc::new(op.kernel_spectrum()));
        }
        Ok(op)
    }

    pub fn root(&self) -> &RootCube {
        &self.root
    }

    pub fn params(&self) -> &RieszParams {
        &self.params
    }

    /// `K(d) h^n` for a leaf offset.
    pub fn weight(&self, offset: &[i64]) -> f64 {
        let m = self.root.per_axis() as usize;
        let mut idx = 0;
        for &d in offset.iter().rev() {
            idx = idx * m + d.unsigned_abs() as usize;
        }
        self.table[idx]
    }

    fn table_index(&self, a: usize, b: usize) -> usize {
        let m = self.root.per_axis() as usize;
        let n = self.root.dim();
        let (mut a, mut b) = (a, b);
        let mut idx = 0;
        let mut scale = 1;
        for _ in 0..n {
            let d = (a % m).abs_diff(b % m);
            idx += d * scale;
            scale *= m;
            a /= m;
            b /= m;
        }
        idx
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.root() != &self.root {
            return Err(Error::DimensionMismatch("function lives on another root".into()));
        }
        let out = match self.params.method {
            RieszMethod::Direct => self.apply_direct(f.values()),
            RieszMethod::Fft => self.apply_fft(f.values()),
        };
        GridFunction::new(self.root.clone(), out)
    }

    fn apply_direct(&self, v: &[f64]) -> Vec<f64> {
        let support: Vec<usize> = (0..v.len()).filter(|&j| v[j] != 0.0).collect();
        (0..v.len())
            .into_par_iter()
            .map(|i| support.iter().map(|&j| self.table[self.table_index(i, j)] * v[j]).sum())
            .collect()
    }

    fn padded_len(&self) -> (usize, usize) {
        let p = 2 * self.root.per_axis() as usize;
        (p, p.pow(self.root.dim() as u32))
    }

    fn kernel_spectrum(&self) -> Vec<Complex64> {
        let m = self.root.per_axis() as usize;
        let n = self.root.dim();
        let (p, total) = self.padded_len();
        let mut data = vec![Complex64::new(0.0, 0.0); total];
        for (idx, slot) in data.iter_mut().enumerate() {
            let mut rest = idx;
            let mut off = [0i64; 3];
            let mut inside = true;
            for a in (0..n).rev() {
                let c = rest % p;
                rest /= p;
                let d = if c < m { c as i64 } else { c as i64 - p as i64 };
                if d.unsigned_abs() as usize >= m {
                    inside = false;
                }
                off[a] = d;
            }
            if inside {
                *slot = Complex64::new(self.weight(&off[..n]), 0.0);
            }
        }
        fft_nd(&mut data, p, n, false);
        data
    }

    fn apply_fft(&self, v: &[f64]) -> Vec<f64> {
        let m = self.root.per_axis() as usize;
        let n = self.root.dim();
        let (p, total) = self.padded_len();
        let spectrum = self.spectrum.clone().unwrap_or_else(|| Arc::new(self.kernel_spectrum()));
        let embed = |leaf: usize| {
            let (mut rest, mut idx, mut scale) = (leaf, 0, 1);
            for _ in 0..n {
                idx += (rest % m) * scale;
                rest /= m;
                scale *= p;
            }
            idx
        };
        let mut data = vec![Complex64::new(0.0, 0.0); total];
        for (leaf, &x) in v.iter().enumerate() {
            data[embed(leaf)] = Complex64::new(x, 0.0);
        }
        fft_nd(&mut data, p, n, false);
        for (d, k) in data.iter_mut().zip(spectrum.iter()) {
            *d *= k;
        }
        fft_nd(&mut data, p, n, true);
        let scale = 1.0 / total as f64;
        (0..v.len()).map(|leaf| data[embed(leaf)].re * scale).collect()
    }
}

// unnormalized n-dimensional transform on a cube of side `p`
fn fft_nd(data: &mut [Complex64], p: usize, n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(p) } else { planner.plan_fft_forward(p) };
    let mut line = vec![Complex64::new(0.0, 0.0); p];
    for axis in 0..n {
        let stride = p.pow((n - 1 - axis) as u32);
        let block = stride * p;
        for start in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for (k, x) in line.iter_mut().enumerate() {
                    *x = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, x) in line.iter().enumerate() {
                    data[base + k * stride] = *x;
                }
            }
        }
    }
}

/// `I_alpha f` on the leaf grid.
pub fn riesz_potential(f: &GridFunction, params: &RieszParams) -> Result<GridFunction> {
    RieszOperator::new(f.root(), params)?.apply(f)
}

/// `x -> int f(y) |x - y|^{alpha-n} dH(y)` with the cell kernel in `y`.
pub fn beta_riesz_potential(f: &GridFunction, alpha: f64, params: &ContentParams) -> Result<GridFunction> {
    let root = f.root();
    if let Some(i) = f.values().iter().position(|&x| x < 0.0) {
        return Err(Error::NegativeValue { leaf: i, value: f.get(i) });
    }
    let rp = RieszParams::new(alpha, root.dim(), RieszMethod::Direct)?;
    let op = RieszOperator::new(root, &rp)?;
    let vol = root.leaf_volume();
    let v = f.values();
    let prof = Profiler::new(root, params)?;
    let out: Vec<f64> = (0..root.leaf_count())
        .into_par_iter()
        .map_init(
            || prof.clone(),
            |p, x| {
                p.profile(Region::Root, |y| v[y] * op.table[op.table_index(x, y)] / vol)
                    .integral()
            },
        )
        .collect();
    GridFunction::new(root.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LeafSet;
    use proptest::prelude::*;

    fn central_bump(r: &RootCube, seed: u64) -> GridFunction {
        let mut s = seed;
        GridFunction::from_fn(r, |x| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let central = x.iter().all(|&c| (0.25..0.75).contains(&c));
            if central {
                (s >> 11) as f64 / (1u64 << 53) as f64
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn self_cell_closed_form_in_one_dimension() {
        for alpha in [0.1, 0.25, 0.5, 0.9] {
            let c = self_cell_constant(1, alpha);
            assert!((c - (1.0 - alpha).exp2() / alpha).abs() < 1e-14 * c);
        }
    }

    #[test]
    fn self_cell_against_midpoint_sum() {
        // singular but integrable: compare with a fine midpoint rule away from 0
        let alpha = 1.5;
        let k = 400;
        let h = 1.0 / k as f64;
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                let x = -0.5 + (i as f64 + 0.5) * h;
                let y = -0.5 + (j as f64 + 0.5) * h;
                s += (x * x + y * y).sqrt().powf(alpha - 2.0) * h * h;
            }
        }
        let c = self_cell_constant(2, alpha);
        assert!((c - s).abs() < 2e-3 * c, "{c} vs {s}");
    }

    #[test]
    fn methods_agree_and_far_field() {
        let r = RootCube::unit(2, 4).unwrap();
        let p = RieszParams::new(0.7, 2, RieszMethod::Direct).unwrap();
        let f = central_bump(&r, 3);
        let a = riesz_potential(&f, &p).unwrap();
        let b = riesz_potential(&f, &p.with_method(RieszMethod::Fft)).unwrap();
        let scale = a.max_abs();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-10 * scale);
        }
        let one = LeafSet::from_leaves(&r, [r.leaf_index(&[4, 4, 0])]).unwrap().indicator();
        let g = riesz_potential(&one, &p).unwrap();
        let h = r.leaf_side();
        let far = g.get(r.leaf_index(&[12, 4, 0]));
        let analytic = h * h * (8.0 * h).powf(0.7 - 2.0);
        assert!((far - analytic).abs() <= 0.01 * analytic);
        assert!(riesz_potential(&GridFunction::zeros(&r), &p).unwrap().values().iter().all(|&x| x == 0.0));
        assert!(RieszParams::new(2.0, 2, RieszMethod::Fft).is_err());
    }

    #[test]
    fn dihedral_symmetry() {
        let r = RootCube::unit(2, 4).unwrap();
        let p = RieszParams::new(0.5, 2, RieszMethod::Fft).unwrap();
        let f = GridFunction::from_fn(&r, |x| {
            let d = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
            if d < 0.25 { 1.0 - 4.0 * d } else { 0.0 }
        })
        .unwrap();
        let g = riesz_potential(&f, &p).unwrap();
        let m = r.per_axis();
        let scale = g.max_abs();
        for i in 0..m {
            for j in 0..m {
                let v = g.get(r.leaf_index(&[i, j, 0]));
                for (a, b) in [(j, i), (m - 1 - i, j), (i, m - 1 - j), (m - 1 - j, m - 1 - i)] {
                    assert!((v - g.get(r.leaf_index(&[a, b, 0]))).abs() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn beta_riesz_examples() {
        let r = RootCube::unit(1, 3).unwrap();
        let cp = ContentParams::dyadic(0.8).unwrap();
        let z = beta_riesz_potential(&GridFunction::zeros(&r), 0.5, &cp).unwrap();
        assert!(z.values().iter().all(|&x| x == 0.0));
        let e = LeafSet::from_leaves(&r, [2, 3, 6]).unwrap();
        let out = beta_riesz_potential(&e.indicator(), 0.5, &cp).unwrap();
        let rp = RieszParams::new(0.5, 1, RieszMethod::Direct).unwrap();
        let op = RieszOperator::new(&r, &rp).unwrap();
        let h = r.leaf_side();
        // brute-force layer enumeration
        for x in 0..8usize {
            let mut vals: Vec<(f64, usize)> = e
                .members()
                .map(|y| (op.weight(&[x as i64 - y as i64]) / h, y))
                .collect();
            vals.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut acc = 0.0;
            let mut prev = 0.0;
            for k in 0..vals.len() {
                let level = LeafSet::from_leaves(&r, vals[k..].iter().map(|v| v.1)).unwrap();
                acc += (vals[k].0 - prev) * crate::content::dyadic_content(&level, &cp).unwrap();
                prev = vals[k].0;
            }
            assert!((acc - out.get(x)).abs() <= 1e-13 * acc);
        }
        assert!(beta_riesz_potential(&GridFunction::constant(&r, -1.0), 0.5, &cp).is_err());
    }

    proptest! {
        #[test]
        fn prop_linear_positive(seed in 0u64..1000, c in 0.1f64..3.0) {
            let r = RootCube::unit(1, 5).unwrap();
            let p = RieszParams::new(0.3, 1, RieszMethod::Fft).unwrap();
            let f = central_bump(&r, seed);
            let g = central_bump(&r, seed + 1);
            let op = RieszOperator::new(&r, &p).unwrap();
            let (a, b) = (op.apply(&f).unwrap(), op.apply(&g).unwrap());
            let s = op.apply(&f.zip_map(&g, |x, y| x + c * y).unwrap()).unwrap();
            let scale = s.max_abs();
            for i in 0..r.leaf_count() {
                prop_assert!((s.get(i) - a.get(i) - c * b.get(i)).abs() <= 1e-12 * scale);
                prop_assert!(a.get(i) >= -1e-14 * a.max_abs());
            }
        }
    }
}
