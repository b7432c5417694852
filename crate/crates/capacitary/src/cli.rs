//! Batch front end behind the `capacitary` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bmo::{bmo_norm, truncate};
use crate::choquet::{content_profile, lp_from_profile, write_profile_tsv};
use crate::content::{ball_content_estimate, dyadic_content, minimal_cover, ContentParams};
use crate::error::{Error, Result};
use crate::lattice::{CubeFamily, GridFunction, LeafSet, Region};
use crate::operators::{
    beta_riesz_potential, commutator, iterated_commutator, maximal_content, maximal_fractional,
    maximal_orlicz_fractional, maximal_sharp, RieszMethod, RieszParams,
};
use crate::verify::{gen_functions, run_check, suite, write_summary_csv, CheckConfig, CheckReport, Kind, Profile};
use crate::young::YoungSpec;

#[derive(Debug, Parser)]
#[command(name = "capacitary", version, about = "Choquet integrals against dyadic Hausdorff content")]
struct Cli {
    /// Directory for reports, plots and generated functions.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dyadic content of a leaf set and its minimal cover.
    Content {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        beta: f64,
        /// Also print the ball content interval.
        #[arg(long)]
        ball: bool,
        /// Cover witness path [default: <out>/cover.json].
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Choquet integral and level profile of |f|.
    Choquet {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        beta: f64,
        /// Also print the L^p quasinorm.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Maximal functions.
    Maximal {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = MaximalKind::Content)]
        kind: MaximalKind,
        /// Fractional weight for `fractional` and `orlicz`.
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value = "t*log(e+t)")]
        young: String,
        #[arg(long, default_value = "dyadic")]
        family: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Riesz potential of f; with --beta, the content-weighted potential.
    Riesz {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value = "fft")]
        method: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Commutator [b, I] f, or its m-fold iterate.
    Commutator {
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value = "fft")]
        method: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// BMO norm of b; with --truncate, also writes the truncation.
    Bmo {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value = "dyadic")]
        family: String,
        #[arg(long)]
        truncate: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Runs one registered check.
    Check {
        check_id: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Runs every registered check.
    Suite {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Writes generated (b, f) pairs at depth L.
    Gen {
        #[arg(long, default_value = "bmo-log")]
        kind: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MaximalKind {
    Content,
    Sharp,
    Fractional,
    Orlicz,
}

/// Check configuration: profile, then file, then flags.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// Base profile (desk: n=1, L=8, refine=1, samples=20; quick: L=5, samples=3).
    #[arg(long, default_value = "desk")]
    profile: String,
    /// Flat `key = value` file applied over the profile.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimension, 1..=3 [desk: 1].
    #[arg(long)]
    n: Option<String>,
    /// Coarsest leaf depth [desk: 8].
    #[arg(long = "L", alias = "depth")]
    l: Option<String>,
    /// Extra refinement levels [desk: 1].
    #[arg(long)]
    refine: Option<String>,
    /// Content dimension in (0, n] [desk: 1].
    #[arg(long)]
    beta: Option<String>,
    /// Riesz order in (0, beta) [desk: 0.25].
    #[arg(long)]
    alpha: Option<String>,
    /// Strong-type exponent [desk: 2].
    #[arg(long)]
    p: Option<String>,
    /// Power in the sharp pointwise bound [desk: 2].
    #[arg(long)]
    s: Option<String>,
    /// Power in the Orlicz-free pointwise bound [desk: 2].
    #[arg(long)]
    t: Option<String>,
    /// Cube family: dyadic | shifted | grid[:budget] [desk: dyadic].
    #[arg(long)]
    family: Option<String>,
    /// Samples per level [desk: 20].
    #[arg(long)]
    samples: Option<String>,
    /// Base seed [desk: 7].
    #[arg(long)]
    seed: Option<String>,
    /// Allowed growth of the empirical constant per refinement [desk: 2].
    #[arg(long)]
    tolerance: Option<String>,
    /// Young function [desk: t*log(e+t)].
    #[arg(long, alias = "B")]
    young: Option<String>,
    /// Symbol kinds [desk: bmo-log,random-step-bmo].
    #[arg(long = "b_kinds", alias = "b-kinds")]
    b_kinds: Option<String>,
    /// Test function kinds [desk: bump,indicator].
    #[arg(long = "f_kinds", alias = "f-kinds")]
    f_kinds: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<CheckConfig> {
        let mut cfg = CheckConfig::profile(self.profile.parse::<Profile>()?);
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("n", &self.n),
            ("L", &self.l),
            ("refine", &self.refine),
            ("beta", &self.beta),
            ("alpha", &self.alpha),
            ("p", &self.p),
            ("s", &self.s),
            ("t", &self.t),
            ("family", &self.family),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("tolerance", &self.tolerance),
            ("young", &self.young),
            ("b_kinds", &self.b_kinds),
            ("f_kinds", &self.f_kinds),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Failure of a command run.
enum Failure {
    Usage(Error),
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

/// Parses `argv` (program name first) and runs the command; returns the exit
/// code: 0 on success, 1 when a check fails, 2 on a usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Check) => 1,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn family(s: &str) -> Result<CubeFamily> {
    s.parse()
}

fn riesz_params(alpha: f64, n: usize, method: &str) -> Result<RieszParams> {
    RieszParams::new(alpha, n, method.parse::<RieszMethod>()?)
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

fn write_fn(g: &GridFunction, path: &Path) -> Result<()> {
    create_parent(path)?;
    g.write(path)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn print_claims(r: &CheckReport, out: &mut impl Write) {
    for c in &r.claims {
        let bound = c.bound.map_or("-".to_string(), |b| format!("{b}"));
        let _ = writeln!(
            out,
            "{}\t{}\t{:.6e}\t{}\t{:.4}\t{}",
            r.check_id,
            c.name,
            c.c_emp(),
            bound,
            c.refinement_ratio,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
}

fn execute(cli: &Cli) -> std::result::Result<(), Failure> {
    let out = &cli.out;
    let stdout = std::io::stdout();
    let mut so = stdout.lock();
    match &cli.cmd {
        Command::Content { input, beta, ball, witness } => {
            let e = LeafSet::read(input)?;
            let params = ContentParams::dyadic(*beta)?;
            let h = dyadic_content(&e, &params)?;
            let _ = writeln!(so, "{h}");
            if *ball {
                let (lo, hi) = ball_content_estimate(&e, &ContentParams::ball(*beta)?)?;
                let _ = writeln!(so, "ball content in [{lo}, {hi}]");
            }
            let cover = minimal_cover(&e, &params)?;
            let path = witness.clone().unwrap_or_else(|| out.join("cover.json"));
            create_parent(&path)?;
            std::fs::write(&path, serde_json::to_string_pretty(&cover).map_err(Error::from)? + "\n")
                .map_err(|e| Error::io(&path, e))?;
            eprintln!("wrote {}", path.display());
        }
        Command::Choquet { input, beta, p } => {
            let f = GridFunction::read(input)?;
            let prof = content_profile(&f, Region::Root, &ContentParams::dyadic(*beta)?)?;
            let _ = writeln!(so, "{}", prof.integral());
            if let Some(p) = p {
                let _ = writeln!(so, "L^{p} quasinorm {}", lp_from_profile(&prof, *p));
            }
            let path = out.join("plots").join("choquet_profile.tsv");
            create_parent(&path)?;
            write_profile_tsv(&path, &prof.level_pairs())?;
            eprintln!("wrote {}", path.display());
        }
        Command::Maximal { input, beta, kind, alpha, young, family: fam, output } => {
            let f = GridFunction::read(input)?;
            let params = ContentParams::dyadic(*beta)?;
            let fam = family(fam)?;
            let m = match kind {
                MaximalKind::Content => maximal_content(&f, &params, fam)?,
                MaximalKind::Sharp => maximal_sharp(&f, &params, fam)?,
                MaximalKind::Fractional => maximal_fractional(&f, *alpha, &params, fam)?,
                MaximalKind::Orlicz => {
                    maximal_orlicz_fractional(&f, *alpha, &young.parse::<YoungSpec>()?, &params, fam)?
                }
            };
            write_fn(&m, output)?;
        }
        Command::Riesz { input, alpha, beta, method, output } => {
            let f = GridFunction::read(input)?;
            let g = match beta {
                Some(b) => beta_riesz_potential(&f, *alpha, &ContentParams::dyadic(*b)?)?,
                None => crate::operators::riesz_potential(&f, &riesz_params(*alpha, f.root().dim(), method)?)?,
            };
            write_fn(&g, output)?;
        }
        Command::Commutator { b, f, alpha, m, method, output } => {
            let b = GridFunction::read(b)?;
            let f = GridFunction::read(f)?;
            let rp = riesz_params(*alpha, f.root().dim(), method)?;
            let g = if *m == 1 { commutator(&b, &f, &rp)? } else { iterated_commutator(&b, &f, *m, &rp)? };
            write_fn(&g, output)?;
        }
        Command::Bmo { input, beta, family: fam, truncate: k, output } => {
            let b = GridFunction::read(input)?;
            let params = ContentParams::dyadic(*beta)?;
            let _ = writeln!(so, "{}", bmo_norm(&b, &params, family(fam)?)?);
            if let Some(k) = k {
                let t = truncate(&b, *k)?;
                let _ = writeln!(so, "truncated {}", bmo_norm(&t, &params, family(fam)?)?);
                if let Some(path) = output {
                    write_fn(&t, path)?;
                }
            }
        }
        Command::Check { check_id, cfg } => {
            let cfg = cfg.resolve()?;
            let report = run_check(check_id, &cfg)?;
            let path = report.write(out)?;
            let _ = writeln!(so, "{}", report.to_json()?);
            eprintln!("wrote {}", path.display());
            if !report.pass {
                return Err(Failure::Check);
            }
        }
        Command::Suite { cfg } => {
            let cfg = cfg.resolve()?;
            let s = suite(&cfg)?;
            for r in &s.reports {
                r.write(out)?;
                print_claims(r, &mut so);
            }
            for (id, why) in &s.skipped {
                let _ = writeln!(so, "{id}\tskipped\t{why}");
            }
            let path = out.join("summary.csv");
            write_summary_csv(&s.reports, &path)?;
            eprintln!("wrote {}", path.display());
            if !s.pass() {
                return Err(Failure::Check);
            }
        }
        Command::Gen { kind, cfg } => {
            let cfg = cfg.resolve()?;
            let kind: Kind = kind.parse()?;
            let pairs = gen_functions(kind, &cfg, cfg.depth, cfg.seed)?;
            let dir = out.join("functions");
            for (k, (b, f)) in pairs.iter().enumerate() {
                write_fn(b, &dir.join(format!("b_{k}.txt")))?;
                write_fn(f, &dir.join(format!("f_{k}.txt")))?;
            }
            let _ = writeln!(so, "{} pairs of kind {kind} at L = {}", pairs.len(), cfg.depth);
        }
    }
    Ok(())
}
