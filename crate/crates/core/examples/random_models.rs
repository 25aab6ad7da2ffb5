//! Draws seeded random models, checks they validate and round-trip, and
//! prints a short description of each.

use pqg::search::{random_model, Bounds};
use pqg::validate::validate_model;
use pqg::{load, save};

fn main() {
    let bounds = Bounds { max_worlds: 2, max_tower_depth: 4, ..Bounds::all(3) };
    for seed in 0..5 {
        let m = random_model(seed, &bounds);
        let text = save(&m);
        assert!(validate_model(&m).is_clean());
        assert_eq!(load(&text).unwrap(), m);
        println!(
            "seed {seed}: {} worlds, {} moments, {} belief states, {} rules, {} bytes",
            m.worlds.len(),
            m.linear_moments.len(),
            m.belief_states.len(),
            m.rules.len(),
            text.len()
        );
    }
}
