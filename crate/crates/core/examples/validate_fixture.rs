//! Loads the bundled fixture, prints its validation report, then breaks
//! one containment and validates again.

use pqg::fixtures::fix1;
use pqg::validate::validate_model;

fn main() {
    let model = fix1();
    println!("fixture: {}", validate_model(&model));

    let mut broken = model.into_inner();
    broken.belief_states.get_mut("b0").unwrap().tower[0].minimal = ["r2".to_string()].into();
    print!("broken:  {}", validate_model(&broken));
}
