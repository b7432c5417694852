//! Empirical verification harness: generators, a registry of named checks,
//! empirical constants and their stability under refinement.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::error::{Error, Result};

mod checks;
pub mod config;
pub mod generators;
pub mod report;

pub use checks::commutator::estimate_operator_norm;
pub use config::{CheckConfig, Profile, CONFIG_KEYS};
pub use generators::{fourier_witness, gen_functions, gen_pair, witness_target, FunctionSpec, Kind, Witness};
pub use report::{write_summary_csv, CheckReport, Claim, LevelResult, Timestamp};

use checks::{bmo, choquet, commutator, no_requirements, orlicz, riesz, Level, LevelFn, RequireFn};

/// One registered check.
pub struct CheckDef {
    pub id: &'static str,
    pub claim: &'static str,
    requires: RequireFn,
    level: LevelFn,
}

impl std::fmt::Debug for CheckDef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CheckDef").field("id", &self.id).field("claim", &self.claim).finish()
    }
}

impl CheckDef {
    /// Whether `cfg` satisfies the hypotheses of the claim.
    pub fn applies(&self, cfg: &CheckConfig) -> Result<()> {
        (self.requires)(cfg)
    }
}

macro_rules! check {
    ($id:literal, $claim:literal, $req:expr, $level:expr) => {
        CheckDef { id: $id, claim: $claim, requires: $req, level: $level }
    };
}

pub static REGISTRY: &[CheckDef] = &[
    check!("choquet_homogeneity", "int a g dH = a int g dH", no_requirements, choquet::homogeneity),
    check!(
        "choquet_axioms",
        "homogeneity, quasi-subadditivity and Holder for the Choquet integral, strong subadditivity of the content, |f_Q - c| <= H(Q)^-1 int_Q |f - c|",
        no_requirements,
        choquet::axioms
    ),
    check!(
        "content_equivalence",
        "dyadic contents of a set on two shifted lattices are comparable",
        no_requirements,
        choquet::content_equivalence
    ),
    check!(
        "packing",
        "sum int_{Q_k} f <= 2 int_{U Q_k} f for packing families; cover, packing and content bounds of the ancestor construction",
        no_requirements,
        choquet::packing
    ),
    check!(
        "dimension_change",
        "int f dH^beta <= (beta/alpha) (int f^(alpha/beta) dH^alpha)^(beta/alpha)",
        no_requirements,
        choquet::dimension_change
    ),
    check!("fefferman_stein", "||M f||_p <= C ||M# f||_p", no_requirements, bmo::fefferman_stein),
    check!(
        "modular_fs",
        "sup phi(t) H(M f > t) <= C sup phi(t) H(M# f > t), phi(t) = 1/Psi(B(1/t))",
        no_requirements,
        bmo::modular_fs
    ),
    check!("bmo_shift", "|b_{2^k Q} - b_Q| <= C k ||b||", no_requirements, bmo::bmo_shift),
    check!(
        "exp_bmo",
        "l(Q)^-beta int_Q exp(|b - b_Q| / (C ||b||)) dH <= 4",
        no_requirements,
        bmo::exp_bmo
    ),
    check!("jn_p", "p-oscillation of b <= C p ||b||", no_requirements, bmo::jn_p),
    check!(
        "bmo_lattice",
        "||f + g|| <= 2(||f|| + ||g||), ||l f|| = |l| ||f||, bounds for |f|, max, min and truncations",
        no_requirements,
        bmo::bmo_lattice
    ),
    check!(
        "orlicz_holder",
        "l(Q)^-beta int_Q |f g| dH <= 2 ||f||_{B,Q} ||g||_{B bar,Q}",
        no_requirements,
        orlicz::holder
    ),
    check!(
        "orlicz_dyadic_localization",
        "each cube is dominated by a dyadic neighbour of the same size; H(M_{a,B} f > t) <= 3^n H(M^D_{a,B} f > c t)",
        no_requirements,
        orlicz::dyadic_localization
    ),
    check!(
        "orlicz_weak",
        "Phi_1(H(M_{a,B} f > t)) <= C int B(f/t) dH",
        orlicz::require_decreasing_quotient,
        orlicz::weak
    ),
    check!(
        "riesz_strong",
        "||I f||_q + ||M_a f||_q <= C ||f||_p, 1/p - 1/q = alpha/beta",
        commutator::require_exponents,
        riesz::strong
    ),
    check!(
        "riesz_local",
        "int_Q |I f| dH <= C l(Q)^alpha int_2Q |f| dH for supp f in 2Q",
        no_requirements,
        riesz::local
    ),
    check!(
        "riesz_farfield",
        "l(Q)^-beta int_Q |I f - c| dH <= C sum_k 2^-k (2^{k+1} l)^(alpha-beta) int_{2^{k+1} Q} |f| dH for supp f outside 2Q",
        no_requirements,
        riesz::farfield
    ),
    check!(
        "riesz_a1",
        "M(I f) <= (M K) * |f|, M(I f) <= C I|f| for beta in (n - alpha, n], reverse Holder for I f",
        no_requirements,
        riesz::a1
    ),
    check!(
        "pointwise_sharp",
        "M#([b, I] f) <= C ||b|| (M((I f)^s)^(1/s) + M_{a,B} f) and its variants",
        no_requirements,
        commutator::pointwise_sharp
    ),
    check!(
        "strong_type",
        "||[b, I] f||_q <= C ||b|| ||f||_p",
        commutator::require_exponents,
        commutator::strong_type
    ),
    check!(
        "necessity",
        "c ||b|| <= ||[b, I]||_(p,q) <= C ||b||",
        commutator::require_exponents,
        commutator::necessity
    ),
    check!(
        "modular_weak",
        "H(|[b, I] f| > t) <= C Psi(int B(||b|| |f| / t) dH) and the weak type of I",
        commutator::require_endpoint,
        commutator::modular_weak
    ),
];

pub fn find_check(id: &str) -> Result<&'static CheckDef> {
    REGISTRY.iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownCheck(id.to_string()))
}

pub fn check_ids() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|c| c.id)
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Runs one check at every refinement level of `cfg`.
pub fn run_check(id: &str, cfg: &CheckConfig) -> Result<CheckReport> {
    let def = find_check(id)?;
    cfg.validate()?;
    def.applies(cfg)?;
    let start = Instant::now();
    let unix = unix_ms();
    let depths = cfg.levels();
    let data = depths
        .iter()
        .map(|&d| (def.level)(&Level::new(def.id, cfg, d)?))
        .collect::<Result<Vec<_>>>()?;
    let timestamp = Timestamp { unix_ms: unix, runtime_ms: start.elapsed().as_millis() };
    report::assemble(def.id, cfg, &depths, data, timestamp)
}

/// Outcome of a full run.
#[derive(Debug)]
pub struct Suite {
    pub reports: Vec<CheckReport>,
    /// Checks whose hypotheses `cfg` does not meet, with the reason.
    pub skipped: Vec<(&'static str, String)>,
}

impl Suite {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Runs every registered check whose hypotheses hold, in registry order.
pub fn suite(cfg: &CheckConfig) -> Result<Suite> {
    cfg.validate()?;
    let outcomes: Vec<Result<std::result::Result<CheckReport, (&'static str, String)>>> = REGISTRY
        .par_iter()
        .map(|def| match def.applies(cfg) {
            Err(e) => Ok(Err((def.id, e.to_string()))),
            Ok(()) => run_check(def.id, cfg).map(Ok),
        })
        .collect();
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o? {
            Ok(r) => reports.push(r),
            Err(s) => skipped.push(s),
        }
    }
    Ok(Suite { reports, skipped })
}
