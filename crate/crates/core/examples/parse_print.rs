//! Parses formulas, prints them back in canonical form and shows a parse
//! error.

use pqg::formula::{parse, Schema};

fn main() {
    for text in ["B(p -> q)", "Km[2] p & ~<s> q", "(p & q) -> r", "p -> (q -> r)", "(p -> q) -> r", "[] G rain"] {
        let f = parse(text).unwrap();
        println!("{text:<20} => {f:<20} depth {}", f.depth());
    }
    let schema = Schema::parse("K phi & K(phi -> psi) -> K psi").unwrap();
    for inst in schema.instantiations(&["a1", "a2"]).iter().take(3) {
        println!("instance: {}", schema.instantiate(inst));
    }
    match parse("p ->") {
        Ok(_) => unreachable!(),
        Err(e) => println!("error: {e}"),
    }
}
