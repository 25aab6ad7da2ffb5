//! Evaluates belief closure on a small relational model, then prints the
//! side-by-side classification of the closure schemas.

use std::collections::{BTreeMap, BTreeSet};

use pqg::kripke::{closure_contrast_report, eval_kripke, KripkeModel};
use pqg::parse;
use pqg::search::DEFAULT_AUDIT_BOUNDS;

fn main() {
    let km = KripkeModel {
        worlds: 2,
        relation: BTreeSet::from([(0, 0), (0, 1)]),
        valuation: BTreeMap::from([
            ("p".to_string(), BTreeSet::from([0, 1])),
            ("q".to_string(), BTreeSet::from([1])),
        ]),
    };
    for text in ["B p", "B q", "B p & B(p -> q) -> B q", "K p"] {
        println!("w0 |= {text:<24} {}", eval_kripke(&km, 0, &parse(text).unwrap()).unwrap());
    }

    let report = closure_contrast_report(&DEFAULT_AUDIT_BOUNDS).expect("contrast runs");
    println!();
    println!("{:<34} {:<18} kripke", "schema", "pqg");
    for row in &report.rows {
        println!("{:<34} {:<18} {}", row.pqg.name, row.pqg.classification.name(), row.kripke.classification.name());
    }
}
