//! Runs registered checks and prints one line per claim.
//!
//! ```bash
//! cargo run --release --example verify_suite                  # quick profile, every check
//! cargo run --release --example verify_suite -- desk jn_p     # desk profile, selected checks
//! ```

use std::time::Instant;

use capacitary::verify::{check_ids, run_check, CheckConfig, Profile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).peekable();
    let profile = match args.peek().map(|a| a.parse::<Profile>()) {
        Some(Ok(p)) => {
            args.next();
            p
        }
        _ => Profile::Quick,
    };
    let cfg = CheckConfig::profile(profile);
    let mut ids: Vec<String> = args.collect();
    if ids.is_empty() {
        ids = check_ids().map(String::from).collect();
    }
    println!("L = {:?}, samples = {}, seed = {}", cfg.levels(), cfg.samples, cfg.seed);
    for id in &ids {
        let start = Instant::now();
        match run_check(id, &cfg) {
            Ok(report) => {
                for c in &report.claims {
                    let bound = c.bound.map_or("-".to_string(), |b| format!("{b:.3}"));
                    println!(
                        "{:<28} {:<24} C_emp {:>11.4e}  bound {:>7}  growth {:>7.3}  {}",
                        id,
                        c.name,
                        c.c_emp(),
                        bound,
                        c.refinement_ratio,
                        if c.pass { "ok" } else { "FAIL" }
                    );
                }
                for (k, v) in &report.diagnostics {
                    println!("{:<28}   {k} = {v:.4e}", "");
                }
                println!("{:<28} {:.2} s", "", start.elapsed().as_secs_f64());
            }
            Err(e) => println!("{id:<28} skipped: {e}"),
        }
    }
    Ok(())
}
