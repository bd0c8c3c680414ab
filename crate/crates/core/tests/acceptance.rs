//! Runs every acceptance criterion at full scale, one line per criterion.
//! Set `DHL_ACCEPTANCE_QUICK=1` for the reduced sample sizes.

use dhl_rg::acceptance::{run_criterion, Scale, CRITERIA};

fn main() {
    let scale = if std::env::var_os("DHL_ACCEPTANCE_QUICK").is_some() {
        Scale::Quick
    } else {
        Scale::Full
    };
    println!("\nacceptance suite ({scale:?} scale)");
    let mut failed = Vec::new();
    for &(id, _) in CRITERIA.iter() {
        let r = run_criterion(id, scale);
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:<26} {:>7.2}s  {}", r.label(), r.seconds, r.detail);
        if !r.passed {
            failed.push(r.label());
        }
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed.len(), CRITERIA.len());
    if !failed.is_empty() {
        eprintln!("failed: {}", failed.join("; "));
        std::process::exit(1);
    }
}
