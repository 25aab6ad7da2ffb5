//! The two canonical fixture models shipped with the crate.
//!
//! FIX1 has one world `w0` with moments `s0 < s1`, each holding one linear
//! moment. Belief state `b0` at `s1` targets `p1->g1` with level-1 rules
//! {r1}, minimal {r1} and maximal {r1, r2}, while only `r1` is active.
//! FIX2 swaps in `b1`, whose rules are {r1, r2}.

use crate::format::load;
use crate::model::ValidModel;

pub const FIX1_JSON: &str = include_str!("../fixtures/fix1.json");
pub const FIX2_JSON: &str = include_str!("../fixtures/fix2.json");

pub fn fix1() -> ValidModel {
    load(FIX1_JSON).expect("FIX1 is valid")
}

pub fn fix2() -> ValidModel {
    load(FIX2_JSON).expect("FIX2 is valid")
}
