//! Evaluates a handful of formulas at one index of the fixture.
//!
//! Usage: `cargo run --example check_formula -- "K rain -> rain"`

use pqg::fixtures::fix1;
use pqg::{parse, Evaluator, Index};

fn main() {
    let model = fix1();
    let ev = Evaluator::new(&model);
    let idx = Index::new("w0", "s1", "l1");
    let mut formulas: Vec<String> = std::env::args().skip(1).collect();
    if formulas.is_empty() {
        formulas = ["rain", "B rain", "K rain", "K look", "[s] rain", "<s> rain", "P look", "B(look -> look)", "[] rain"]
            .map(String::from)
            .to_vec();
    }
    for text in formulas {
        match parse(&text).map_err(|e| e.to_string()).and_then(|f| ev.evaluate(&idx, &f).map_err(|e| e.to_string())) {
            Ok(v) => println!("{idx}  {text:<20} {v}"),
            Err(e) => println!("{idx}  {text:<20} error: {e}"),
        }
    }
}
