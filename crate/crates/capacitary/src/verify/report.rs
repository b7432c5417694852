use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::choquet::write_tsv;
use crate::error::{Error, Result};

use super::config::CheckConfig;

/// Slack on stated bounds.
pub const BOUND_RTOL: f64 = 1e-12;

/// `lhs / rhs` with `0 / anything = 0`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// `max(a/b, b/a)`, `1` when both vanish.
pub fn two_sided(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else {
        (a / b).max(b / a)
    }
}

/// Growth of the empirical constant from one level to the next.
pub fn refinement(prev: f64, next: f64) -> f64 {
    if prev == next {
        1.0
    } else if prev == 0.0 {
        f64::INFINITY
    } else {
        next / prev
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub depth: u32,
    pub ratios: Vec<f64>,
    pub c_emp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub name: String,
    /// Constant stated by the claim, when it states one.
    pub bound: Option<f64>,
    pub levels: Vec<LevelResult>,
    /// Largest `C_emp(L+1) / C_emp(L)` over consecutive levels.
    pub refinement_ratio: f64,
    pub pass: bool,
}

impl Claim {
    pub fn c_emp(&self) -> f64 {
        self.levels.iter().fold(0.0, |m, l| m.max(l.c_emp))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub unix_ms: u128,
    pub runtime_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub config: CheckConfig,
    pub claims: Vec<Claim>,
    pub diagnostics: BTreeMap<String, f64>,
    pub pass: bool,
    pub timestamp: Timestamp,
}

/// Samples of one claim at one depth.
#[derive(Clone, Debug, Default)]
pub struct LevelData {
    pub claims: Vec<(String, Option<f64>, Vec<f64>)>,
    pub diagnostics: Vec<(String, f64)>,
}

impl LevelData {
    pub fn claim(&mut self, name: impl Into<String>, bound: Option<f64>, ratios: Vec<f64>) {
        self.claims.push((name.into(), bound, ratios));
    }

    pub fn diag(&mut self, name: impl Into<String>, value: f64) {
        self.diagnostics.push((name.into(), value));
    }
}

/// Largest entry, `0` for none; NaN propagates.
pub fn max_of(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| if x.is_nan() || x > m { x } else { m })
}

/// Assembles claims from per-depth data and applies the pass rule.
pub fn assemble(
    check_id: &str,
    cfg: &CheckConfig,
    depths: &[u32],
    data: Vec<LevelData>,
    timestamp: Timestamp,
) -> Result<CheckReport> {
    let mut claims: Vec<Claim> = Vec::new();
    let mut diagnostics = BTreeMap::new();
    for (&depth, level) in depths.iter().zip(data) {
        for (name, bound, ratios) in level.claims {
            let c_emp = max_of(&ratios);
            let lr = LevelResult { depth, ratios, c_emp };
            match claims.iter_mut().find(|c| c.name == name) {
                Some(c) => c.levels.push(lr),
                None => claims.push(Claim { name, bound, levels: vec![lr], refinement_ratio: 1.0, pass: false }),
            }
        }
        for (name, v) in level.diagnostics {
            diagnostics.insert(format!("{name}@L{depth}"), v);
        }
    }
    if claims.is_empty() {
        return Err(Error::Degenerate(format!("check `{check_id}` produced no claims")));
    }
    for c in &mut claims {
        let finite = c.levels.iter().all(|l| l.ratios.iter().all(|r| r.is_finite()));
        c.refinement_ratio = c
            .levels
            .windows(2)
            .map(|w| refinement(w[0].c_emp, w[1].c_emp))
            .fold(1.0f64, |m, r| if r.is_nan() || r > m { r } else { m });
        let bounded = match c.bound {
            Some(b) => c.levels.iter().all(|l| l.c_emp <= b * (1.0 + BOUND_RTOL)),
            None => true,
        };
        c.pass = finite && bounded && c.refinement_ratio <= cfg.tolerance;
    }
    let pass = claims.iter().all(|c| c.pass);
    Ok(CheckReport { check_id: check_id.to_string(), config: cfg.clone(), claims, diagnostics, pass, timestamp })
}

impl CheckReport {
    /// JSON without the timestamp; identical for identical inputs.
    pub fn canonical_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(m) = v.as_object_mut() {
            m.remove("timestamp");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Worst refinement ratio over the claims.
    pub fn refinement_ratio(&self) -> f64 {
        self.claims.iter().fold(1.0f64, |m, c| m.max(c.refinement_ratio))
    }

    /// Writes `reports/<id>/<unix_ms>.json` and `plots/<id>_<claim>.tsv`
    /// under `out`; returns the report path.
    pub fn write(&self, out: impl AsRef<Path>) -> Result<PathBuf> {
        let out = out.as_ref();
        let dir = out.join("reports").join(&self.check_id);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join(format!("{}.json", self.timestamp.unix_ms));
        std::fs::write(&path, self.to_json()? + "\n").map_err(|e| Error::io(&path, e))?;
        let plots = out.join("plots");
        std::fs::create_dir_all(&plots).map_err(|e| Error::io(&plots, e))?;
        for c in &self.claims {
            let rows: Vec<Vec<f64>> = c
                .levels
                .iter()
                .flat_map(|l| l.ratios.iter().enumerate().map(move |(i, &r)| vec![l.depth as f64, i as f64, r]))
                .collect();
            let p = plots.join(format!("{}_{}.tsv", self.check_id, c.name));
            write_tsv(&p, &["depth", "sample", "ratio"], &rows)?;
        }
        Ok(path)
    }
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    check_id: &'a str,
    claim: &'a str,
    bound: Option<f64>,
    c_emp: f64,
    refinement_ratio: f64,
    pass: bool,
}

/// One CSV row per claim.
pub fn write_summary_csv(reports: &[CheckReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in reports {
        for c in &r.claims {
            w.serialize(SummaryRow {
                check_id: &r.check_id,
                claim: &c.name,
                bound: c.bound,
                c_emp: c.c_emp(),
                refinement_ratio: c.refinement_ratio,
                pass: c.pass,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts() -> Timestamp {
        Timestamp { unix_ms: 5, runtime_ms: 1 }
    }

    #[test]
    fn ratios() {
        assert_eq!(ratio(0.0, 0.0), 0.0);
        assert_eq!(ratio(1.0, 0.0), f64::INFINITY);
        assert_eq!(two_sided(0.0, 0.0), 1.0);
        assert_eq!(two_sided(2.0, 1.0), 2.0);
        assert_eq!(refinement(0.0, 0.0), 1.0);
        assert_eq!(refinement(0.0, 1.0), f64::INFINITY);
    }

    #[test]
    fn pass_rule() {
        let cfg = CheckConfig::quick();
        let mk = |a: Vec<f64>, b: Vec<f64>, bound| {
            let mut l1 = LevelData::default();
            l1.claim("c", bound, a);
            let mut l2 = LevelData::default();
            l2.claim("c", bound, b);
            assemble("x", &cfg, &[5, 6], vec![l1, l2], ts()).unwrap()
        };
        assert!(mk(vec![1.0, 0.5], vec![1.5], None).pass);
        assert!(!mk(vec![1.0], vec![2.5], None).pass);
        assert!(!mk(vec![1.0], vec![f64::INFINITY], None).pass);
        assert!(!mk(vec![1.0], vec![f64::NAN], None).pass);
        assert!(!mk(vec![1.0], vec![1.2], Some(1.0)).pass);
        assert!(mk(vec![0.0], vec![0.0], Some(1.0)).pass);
        let r = mk(vec![1.0], vec![1.0], Some(1.0));
        assert_eq!(r.claims[0].refinement_ratio, 1.0);
        let mut other = r.clone();
        other.timestamp = Timestamp { unix_ms: 9, runtime_ms: 7 };
        assert_eq!(r.canonical_json().unwrap(), other.canonical_json().unwrap());
        assert!(!r.canonical_json().unwrap().contains("unix_ms"));
    }

    #[test]
    fn artifacts() {
        let cfg = CheckConfig::quick();
        let mut l = LevelData::default();
        l.claim("c", None, vec![0.5, 0.25]);
        l.diag("d", 3.0);
        let r = assemble("demo", &cfg, &[5], vec![l], ts()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = r.write(dir.path()).unwrap();
        let back: CheckReport = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        assert_eq!(back, r);
        let tsv = std::fs::read_to_string(dir.path().join("plots/demo_c.tsv")).unwrap();
        assert!(tsv.starts_with('#'));
        write_summary_csv(&[r], dir.path().join("summary.csv")).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(csv.starts_with("check_id,claim,bound,c_emp,refinement_ratio,pass"));
    }
}
