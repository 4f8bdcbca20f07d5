//! One line per acceptance criterion, then a nonzero exit if any failed.
//!
//! The scale defaults to full; set `FLAGCALC_ACCEPTANCE_SCALE=small` for a
//! quicker run. Positional arguments select criteria by number.

use std::process::ExitCode;

use flagcalc::selftest::{run_criterion, Scale, SelftestConfig, CRITERIA};

const SEED: u64 = 1;

fn main() -> ExitCode {
    let scale = match std::env::var("FLAGCALC_ACCEPTANCE_SCALE").as_deref() {
        Ok("small") => Scale::Small,
        _ => Scale::Full,
    };
    let picked: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cfg = SelftestConfig::new(scale, SEED);
    let mut failed = 0;
    for id in 1..=CRITERIA.len() {
        if !picked.is_empty() && !picked.contains(&id) {
            continue;
        }
        let result = run_criterion(id, &cfg);
        println!("{result}");
        failed += usize::from(!result.passed);
    }
    println!("acceptance ({scale} scale, seed {SEED}): {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
