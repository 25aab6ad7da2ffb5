//! The fixture-based examples across validation, machinery, format and
//! semantics, driven through the public API.

use pqg::fixtures::{fix1, fix2, FIX1_JSON};
use pqg::format::{load, read, save, FormatError};
use pqg::formula::parse;
use pqg::machinery::{
    check_invariance, check_tier, derive_concepts, evaluate_prime, evaluate_rqs, pre_belief_sequence,
    run_up_sequence,
};
use pqg::model::{FormingFunction, FormingPair, Index, Model, Tier};
use pqg::quanta::QuantaString;
use pqg::validate::{validate_model, MINIMAL_IN_RULES, W_NONEMPTY};
use pqg::{evaluate, ValidModel};

fn qs(t: &str) -> QuantaString {
    QuantaString::parse(t).unwrap()
}

fn at_s1(m: &ValidModel, text: &str) -> bool {
    evaluate(m, &Index::new("w0", "s1", "l1"), &parse(text).unwrap()).unwrap()
}

#[test]
fn validation_examples() {
    let empty = validate_model(&Model::default());
    assert!(empty.mentions(W_NONEMPTY));
    assert!(empty.to_string().contains("W nonempty violated"));
    assert!(validate_model(&fix1()).is_clean());

    let mut m = fix1().into_inner();
    m.belief_states.get_mut("b0").unwrap().tower[0].minimal = ["r2".to_string()].into();
    let report = validate_model(&m);
    assert!(report.mentions(MINIMAL_IN_RULES));
    assert!(report.to_string().contains("𝔖 ⊆ 𝔻 violated"));
}

#[test]
fn machinery_examples() {
    let m = fix1();
    let b0 = m.belief_state("b0").unwrap();
    let s1 = m.sim("s1").unwrap();
    let seq = vec![(m.lin("l0").unwrap(), m.sim("s0").unwrap()), (m.lin("l1").unwrap(), s1)];
    assert!(check_invariance(&m, b0, &seq).unwrap());
    assert_eq!(run_up_sequence(&m, "w0", "s1"), seq);

    assert!(check_tier(&m, b0, s1.context(), Tier::Minimal));
    assert!(check_tier(&m, b0, s1.context(), Tier::Full));
    assert!(!check_tier(&m, b0, s1.context(), Tier::Maximal));

    let pre: Vec<&str> = pre_belief_sequence(&m, b0).iter().map(|p| p.id.as_str()).collect();
    assert_eq!(pre, ["pb0"]);
    let m2 = fix2();
    assert!(pre_belief_sequence(&m2, m2.belief_state("b1").unwrap()).is_empty());

    let f_i = s1.assembly.function("f_i").unwrap();
    assert_eq!(evaluate_rqs(&m.concepts, f_i).unwrap(), &qs("q1"));
    assert_eq!(evaluate_prime(&m.concepts, &s1.assembly).unwrap(), &qs("p1->g1"));
}

#[test]
fn shared_inputs_give_distinct_concepts() {
    let forming = |id: &str| FormingFunction {
        id: id.into(),
        taking_source: "T1".into(),
        pairs: vec![FormingPair { input: qs("q1"), output: qs("q1") }],
    };
    let a = derive_concepts(&forming("F1"));
    let b = derive_concepts(&forming("F2"));
    assert_eq!(a[0].input, b[0].input);
    assert_ne!(a[0].id, b[0].id);
}

#[test]
fn format_examples() {
    let m = load(FIX1_JSON).unwrap();
    assert_eq!(m, fix1());
    assert_eq!(save(&m), FIX1_JSON, "save(FIX1) is the committed file");

    let mut doc: serde_json::Value = serde_json::from_str(FIX1_JSON).unwrap();
    doc.as_object_mut().unwrap().remove("worlds");
    match load(&doc.to_string()) {
        Err(FormatError::Malformed { path, .. }) => assert_eq!(path, "$.worlds"),
        other => panic!("expected malformed document, got {other:?}"),
    }

    let mut bad = fix1().into_inner();
    bad.belief_states.get_mut("b0").unwrap().tower[0].minimal = ["r2".to_string()].into();
    match load(&save(&bad)) {
        Err(FormatError::Validation(r)) => assert!(r.mentions(MINIMAL_IN_RULES)),
        other => panic!("expected validation findings, got {other:?}"),
    }
    assert_eq!(read(&save(&bad)).unwrap(), bad);
}

#[test]
fn semantics_examples() {
    let (m1, m2) = (fix1(), fix2());
    assert!(at_s1(&m1, "rain"));
    assert!(!evaluate(&m1, &Index::new("w0", "s0", "l0"), &parse("rain").unwrap()).unwrap());
    assert!(evaluate(&m1, &Index::new("w0", "s1", "l1"), &parse("zap").unwrap()).is_err());

    assert!(at_s1(&m1, "B rain"));
    assert!(!at_s1(&m2, "B rain"));
    assert!(at_s1(&m1, "B(look -> look)"));
    assert!(at_s1(&m1, "K rain"));
    assert!(!at_s1(&m1, "K look"));
    assert!(!at_s1(&m1, "Bm[1] rain"));
    assert!(!at_s1(&m1, "[s] rain"));
    assert!(at_s1(&m2, "<s> rain"));
    assert!(!at_s1(&m1, "<s> rain"));
    assert!(at_s1(&m1, "P look"));
    assert!(!at_s1(&m1, "P rain"));
    assert!(at_s1(&m1, "K rain -> rain"));
    assert!(at_s1(&m1, "[] rain"));
    assert!(at_s1(&m1, "look | ~look"));

    let mut raw = fix1().into_inner();
    raw.linear_moments.get_mut("l1").unwrap().realized = None;
    assert!(!at_s1(&ValidModel::new(raw).unwrap(), "K rain"));

    let mut raw = fix1().into_inner();
    let b0 = raw.belief_states.get_mut("b0").unwrap();
    b0.tower.push(pqg::model::DeterminationSet::flat(2, ["r1".to_string()].into()));
    assert!(at_s1(&ValidModel::new(raw).unwrap(), "Bm[1] rain"));
}
