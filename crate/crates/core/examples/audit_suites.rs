//! Runs every audit suite at the default bounds and prints a summary line
//! per schema.

use std::time::Instant;

use pqg::kripke::closure_contrast_report;
use pqg::search::{audit_suite, Suite, DEFAULT_AUDIT_BOUNDS};

fn main() {
    let bounds = DEFAULT_AUDIT_BOUNDS;
    println!("bounds: {bounds}");
    for suite in [Suite::Axioms, Suite::Principles, Suite::Closure] {
        let t = Instant::now();
        let report = audit_suite(suite, &bounds).expect("audit runs");
        for e in &report.entries {
            println!("{suite:>10}  {:<48} {:<17} after {} models", e.name, e.classification.name(), e.models_checked);
        }
        if let Some(paired) = &report.paired_belief {
            println!("{suite:>10}  paired-belief condition diverges in {} of {} cases", paired.divergences, paired.cases_checked);
        }
        println!("{suite:>10}  ({:.1}s)", t.elapsed().as_secs_f64());
    }
    let t = Instant::now();
    let contrast = closure_contrast_report(&bounds).expect("contrast runs");
    for row in &contrast.rows {
        println!(
            "  contrast  {:<48} pqg {:<17} kripke {}",
            row.pqg.name,
            row.pqg.classification.name(),
            row.kripke.classification.name()
        );
    }
    println!("  contrast  ({:.1}s)", t.elapsed().as_secs_f64());
}
