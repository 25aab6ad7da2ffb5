//! Searches the canonical enumeration for a countermodel to a schema and
//! prints the witness.
//!
//! Usage: `cargo run --release --example countermodel_search -- "K(phi & psi) -> K phi"`

use pqg::search::{find_countermodel, reverify, DEFAULT_AUDIT_BOUNDS};
use pqg::{save, Schema};

fn main() {
    let text = std::env::args().nth(1).unwrap_or_else(|| "K(phi -> psi) -> (K phi -> K psi)".into());
    let schema = Schema::parse(&text).expect("schema parses");
    let out = find_countermodel(&schema, &DEFAULT_AUDIT_BOUNDS).expect("search runs");
    match out.witness {
        None => println!("no countermodel within {DEFAULT_AUDIT_BOUNDS} ({} models)", out.models_checked),
        Some(w) => {
            println!("countermodel {} of the enumeration", w.model_number);
            println!("index:   {}", w.index);
            println!("formula: {}", w.formula);
            println!("re-verified: {}", reverify(&w));
            print!("{}", save(&w.model));
        }
    }
}
