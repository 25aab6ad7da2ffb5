//! Operational machinery over a model: taking and forming functions,
//! concepts, volitional functions, rule checks, acceptance, invariance and
//! the gated pre-belief sequence.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{
    BeliefState, Concept, FormingFunction, FunctionArgs, Id, LinearMoment, Model,
    PreBeliefMoment, Rule, RuleAtom, RuleContext, SimultaneousMoment, TakingFunction, Tier,
    VolitionalAssembly, VolitionalFunction,
};
use crate::quanta::QuantaString;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineryError {
    #[error("`{string}` at position {position} is not in the domain of `{function}`")]
    NotInDomain {
        function: Id,
        string: String,
        position: i64,
    },
    #[error("`{string}` is not in the domain of forming function `{function}`")]
    NotInFormingDomain { function: Id, string: String },
    #[error("`{string}` is not a target of taking function `{taking}`")]
    InputNotFromTaking { taking: Id, string: String },
    #[error("function `{function}` references missing concept `{concept}`")]
    DanglingConcept { function: Id, concept: Id },
    #[error("function `{function}` is prime; recommended strings come from order > 0")]
    NotRecommending { function: Id },
    #[error("assembly has no prime function")]
    NoPrime,
    #[error("prime function references missing child `{0}`")]
    MissingChild(Id),
    #[error("linear moment `{lin}` is not contained in simultaneous moment `{sim}`")]
    MalformedSequence { lin: Id, sim: Id },
}

/// Looks up the earlier string a taking function retrieves.
pub fn apply_taking<'t>(
    taking: &'t TakingFunction,
    source: &QuantaString,
    source_position: i64,
) -> Result<&'t QuantaString, MachineryError> {
    taking
        .pairs
        .iter()
        .find(|p| p.source_position == source_position && p.source == *source)
        .map(|p| &p.target)
        .ok_or_else(|| MachineryError::NotInDomain {
            function: taking.id.clone(),
            string: source.to_string(),
            position: source_position,
        })
}

/// Applies a forming function. The input must have been produced by the
/// forming function's taking source.
pub fn apply_forming<'f>(
    forming: &'f FormingFunction,
    taking: &TakingFunction,
    input: &QuantaString,
) -> Result<&'f QuantaString, MachineryError> {
    if !taking.pairs.iter().any(|p| p.target == *input) {
        return Err(MachineryError::InputNotFromTaking {
            taking: taking.id.clone(),
            string: input.to_string(),
        });
    }
    forming
        .pairs
        .iter()
        .find(|p| p.input == *input)
        .map(|p| &p.output)
        .ok_or_else(|| MachineryError::NotInFormingDomain {
            function: forming.id.clone(),
            string: input.to_string(),
        })
}

/// One concept per mapping of the forming function, in listing order.
/// Ids are `<forming id>.c<n>` with `n` counting from 1.
pub fn derive_concepts(forming: &FormingFunction) -> Vec<Concept> {
    forming
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| Concept {
            id: format!("{}.c{}", forming.id, i + 1),
            input: p.input.clone(),
            output: p.output.clone(),
        })
        .collect()
}

/// Checks that every concept argument resolves and yields the declared
/// recommended string.
pub fn evaluate_rqs<'f>(
    concepts: &BTreeMap<Id, Concept>,
    function: &'f VolitionalFunction,
) -> Result<&'f QuantaString, MachineryError> {
    match &function.args {
        FunctionArgs::Children(_) => Err(MachineryError::NotRecommending {
            function: function.id.clone(),
        }),
        FunctionArgs::Concepts(args) => {
            for arg in args {
                if !concepts.contains_key(&arg.concept) {
                    return Err(MachineryError::DanglingConcept {
                        function: function.id.clone(),
                        concept: arg.concept.clone(),
                    });
                }
            }
            Ok(&function.output)
        }
    }
}

/// Resolves every child of the prime function and yields the prime's
/// output, the moment's output string.
pub fn evaluate_prime<'a>(
    concepts: &BTreeMap<Id, Concept>,
    assembly: &'a VolitionalAssembly,
) -> Result<&'a QuantaString, MachineryError> {
    let prime = assembly.prime().ok_or(MachineryError::NoPrime)?;
    if let FunctionArgs::Children(children) = &prime.args {
        for child in children {
            let f = assembly
                .function(child)
                .ok_or_else(|| MachineryError::MissingChild(child.clone()))?;
            evaluate_rqs(concepts, f)?;
        }
    }
    Ok(&prime.output)
}

fn atom_holds(atom: &RuleAtom, assembly: &VolitionalAssembly) -> bool {
    match atom {
        RuleAtom::Arity { function, n } => {
            assembly.function(function).is_some_and(|f| f.args.len() == *n)
        }
        RuleAtom::UsesConcept { function, concept } => {
            assembly.function(function).is_some_and(|f| match &f.args {
                FunctionArgs::Concepts(args) => args.iter().any(|a| a.concept == *concept),
                FunctionArgs::Children(_) => false,
            })
        }
        RuleAtom::OutputMatches { function, pattern } => assembly
            .function(function)
            .is_some_and(|f| pattern.matches(&f.output)),
        RuleAtom::ArgMatches {
            function,
            slot,
            pattern,
        } => assembly.function(function).is_some_and(|f| match &f.args {
            FunctionArgs::Concepts(args) => {
                args.get(*slot).is_some_and(|a| pattern.matches(&a.string))
            }
            FunctionArgs::Children(children) => children
                .get(*slot)
                .and_then(|c| assembly.function(c))
                .is_some_and(|c| pattern.matches(&c.output)),
        }),
        RuleAtom::OrderedBefore { a, b } => a < b,
    }
}

/// Opaque rules hold outright; otherwise every conjunct must hold against
/// the context's assembly.
pub fn check_rule(rule: &Rule, ctx: RuleContext<'_>) -> bool {
    match &rule.predicate {
        None => true,
        Some(atoms) => atoms.iter().all(|a| atom_holds(a, ctx.assembly)),
    }
}

/// Every rule of `set` is active in the context and its predicate holds.
pub fn rules_satisfied(
    rules: &BTreeMap<Id, Rule>,
    set: &BTreeSet<Id>,
    ctx: RuleContext<'_>,
) -> bool {
    set.iter().all(|id| {
        ctx.active_rules.contains(id) && rules.get(id).is_some_and(|r| check_rule(r, ctx))
    })
}

/// Volitional acceptance of the level-1 determination set.
pub fn check_acceptance(model: &Model, b: &BeliefState, ctx: RuleContext<'_>) -> bool {
    check_tier(model, b, ctx, Tier::Full)
}

pub fn check_tier(model: &Model, b: &BeliefState, ctx: RuleContext<'_>, tier: Tier) -> bool {
    b.base()
        .is_some_and(|d| rules_satisfied(&model.rules, d.tier(tier), ctx))
}

pub type RunUp<'m> = Vec<(&'m LinearMoment, &'m SimultaneousMoment)>;

/// Acceptance of the level-1 determination set at every pair of `seq`.
pub fn check_invariance(
    model: &Model,
    b: &BeliefState,
    seq: &[(&LinearMoment, &SimultaneousMoment)],
) -> Result<bool, MachineryError> {
    match b.base() {
        Some(d) => set_invariant(model, &d.rules, seq),
        None => Ok(false),
    }
}

/// Invariance of an arbitrary rule set over a sequence.
pub fn set_invariant(
    model: &Model,
    set: &BTreeSet<Id>,
    seq: &[(&LinearMoment, &SimultaneousMoment)],
) -> Result<bool, MachineryError> {
    for (lin, sim) in seq {
        if lin.container_sim != sim.id {
            return Err(MachineryError::MalformedSequence {
                lin: lin.id.clone(),
                sim: sim.id.clone(),
            });
        }
    }
    Ok(seq
        .iter()
        .all(|(_, sim)| rules_satisfied(&model.rules, set, sim.context())))
}

/// The run-up to `sim` inside `world`: every simultaneous moment of the
/// world at or before `sim` in `<_s`, each paired with its linear moments
/// in `<_l` order.
pub fn run_up_sequence<'m>(model: &'m Model, world: &str, sim: &str) -> RunUp<'m> {
    let Some(limit) = model.sim(sim).map(|s| s.position) else {
        return Vec::new();
    };
    let mut seq = Vec::new();
    for s in model.sims_of_world(world) {
        if s.position > limit {
            continue;
        }
        for l in model.lins_in(world, &s.id) {
            seq.push((l, s));
        }
    }
    seq
}

/// The belief state's pre-belief moments in hypothetical-time order, or
/// nothing when acceptance fails at any of their snapshots.
pub fn pre_belief_sequence<'m>(model: &'m Model, b: &BeliefState) -> Vec<&'m PreBeliefMoment> {
    let mut moments: Vec<&PreBeliefMoment> = b
        .pre_belief
        .iter()
        .filter_map(|id| model.pre_belief(id))
        .collect();
    moments.sort_by(|x, y| (x.position, &x.id).cmp(&(y.position, &y.id)));
    if moments
        .iter()
        .all(|pb| check_acceptance(model, b, pb.snapshot.context()))
    {
        moments
    } else {
        Vec::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConceptArg, DeterminationSet, FormingPair, TakingPair};
    use crate::quanta::QuantaPattern;

    fn qs(t: &str) -> QuantaString {
        QuantaString::parse(t).unwrap()
    }

    fn ids(xs: &[&str]) -> BTreeSet<Id> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn taking() -> TakingFunction {
        TakingFunction {
            id: "t1".into(),
            pairs: vec![
                TakingPair {
                    source_position: 5,
                    source: qs("p1->g1"),
                    target_position: 2,
                    target: qs("q1"),
                },
                TakingPair {
                    source_position: 3,
                    source: qs("p1"),
                    target_position: 1,
                    target: qs("p1"),
                },
            ],
        }
    }

    #[test]
    fn taking_lookup_and_partiality() {
        let t = taking();
        assert_eq!(apply_taking(&t, &qs("p1->g1"), 5).unwrap(), &qs("q1"));
        assert!(matches!(
            apply_taking(&t, &qs("q2"), 5),
            Err(MachineryError::NotInDomain { .. })
        ));
        assert_eq!(apply_taking(&t, &qs("p1"), 3).unwrap(), &qs("p1"));
    }

    #[test]
    fn forming_requires_taking_targets() {
        let t = taking();
        let f = FormingFunction {
            id: "F1".into(),
            taking_source: "t1".into(),
            pairs: vec![
                FormingPair {
                    input: qs("q1"),
                    output: qs("g2->q1"),
                },
                FormingPair {
                    input: qs("p1"),
                    output: qs("p1"),
                },
            ],
        };
        assert_eq!(apply_forming(&f, &t, &qs("q1")).unwrap(), &qs("g2->q1"));
        assert!(matches!(
            apply_forming(&f, &t, &qs("p9")),
            Err(MachineryError::InputNotFromTaking { .. })
        ));
        assert_eq!(apply_forming(&f, &t, &qs("p1")).unwrap(), &qs("p1"));
    }

    #[test]
    fn concepts_follow_pair_order_without_dedup() {
        let f = |id: &str, n: usize| FormingFunction {
            id: id.into(),
            taking_source: "t1".into(),
            pairs: (0..n)
                .map(|i| FormingPair {
                    input: qs("q1"),
                    output: QuantaString::single(crate::quanta::Quantum::cognition(i as u32 + 1)),
                })
                .collect(),
        };
        let two = derive_concepts(&f("F1", 2));
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].id, "F1.c1");
        assert_eq!(two[1].output, qs("g2"));
        assert!(derive_concepts(&f("F1", 0)).is_empty());
        let a = derive_concepts(&f("F1", 1));
        let b = derive_concepts(&f("F2", 1));
        assert_eq!(a[0].input, b[0].input);
        assert_ne!(a[0].id, b[0].id);
    }

    fn concepts() -> BTreeMap<Id, Concept> {
        let mut m = BTreeMap::new();
        m.insert(
            "c1".to_string(),
            Concept {
                id: "c1".into(),
                input: qs("q1"),
                output: qs("q1"),
            },
        );
        m
    }

    fn child(id: &str, concept: &str, out: &str) -> VolitionalFunction {
        VolitionalFunction {
            id: id.into(),
            order: 1,
            args: FunctionArgs::Concepts(vec![ConceptArg {
                concept: concept.into(),
                string: qs("q1"),
            }]),
            output: qs(out),
        }
    }

    fn prime(children: &[&str], out: &str) -> VolitionalFunction {
        VolitionalFunction {
            id: "f_v".into(),
            order: 0,
            args: FunctionArgs::Children(children.iter().map(|c| c.to_string()).collect()),
            output: qs(out),
        }
    }

    #[test]
    fn rqs_and_prime_outputs() {
        let c = concepts();
        assert_eq!(evaluate_rqs(&c, &child("f_i", "c1", "p1")).unwrap(), &qs("p1"));
        assert!(matches!(
            evaluate_rqs(&c, &child("f_i", "c9", "p1")),
            Err(MachineryError::DanglingConcept { .. })
        ));
        let asm = VolitionalAssembly {
            functions: vec![child("f_i", "c1", "q1"), prime(&["f_i"], "p1->g1")],
        };
        assert_eq!(evaluate_prime(&c, &asm).unwrap(), &qs("p1->g1"));
        let broken = VolitionalAssembly {
            functions: vec![child("f_i", "c1", "q1"), prime(&["f_x"], "p1->g1")],
        };
        assert_eq!(
            evaluate_prime(&c, &broken),
            Err(MachineryError::MissingChild("f_x".into()))
        );
    }

    #[test]
    fn rule_predicates() {
        let asm = VolitionalAssembly {
            functions: vec![child("f_i", "c1", "p1"), prime(&["f_i"], "p1->g1")],
        };
        let active = ids(&["r1"]);
        let ctx = RuleContext {
            assembly: &asm,
            active_rules: &active,
        };
        assert!(check_rule(&Rule::opaque("r1"), ctx));
        let out = Rule {
            id: "r2".into(),
            predicate: Some(vec![RuleAtom::OutputMatches {
                function: "f_i".into(),
                pattern: QuantaPattern::parse("p1").unwrap(),
            }]),
        };
        assert!(check_rule(&out, ctx));
        let arity = Rule {
            id: "r3".into(),
            predicate: Some(vec![RuleAtom::Arity {
                function: "f_v".into(),
                n: 2,
            }]),
        };
        assert!(!check_rule(&arity, ctx));
        let uses = Rule {
            id: "r4".into(),
            predicate: Some(vec![
                RuleAtom::UsesConcept {
                    function: "f_i".into(),
                    concept: "c1".into(),
                },
                RuleAtom::ArgMatches {
                    function: "f_v".into(),
                    slot: 0,
                    pattern: QuantaPattern::parse("*").unwrap(),
                },
                RuleAtom::OrderedBefore { a: 0, b: 1 },
            ]),
        };
        assert!(check_rule(&uses, ctx));
    }

    fn model_with_rules(n: usize) -> Model {
        let mut m = Model::default();
        for i in 1..=n {
            let id = format!("r{i}");
            m.rules.insert(id.clone(), Rule::opaque(id));
        }
        m
    }

    fn belief(d: &[&str], s: &[&str], x: &[&str]) -> BeliefState {
        BeliefState {
            id: "b".into(),
            sim: "s".into(),
            target: qs("p1"),
            tower: vec![DeterminationSet {
                level: 1,
                rules: ids(d),
                minimal: ids(s),
                maximal: ids(x),
            }],
            pre_belief: vec![],
        }
    }

    #[test]
    fn acceptance_is_subset_test() {
        let m = model_with_rules(4);
        let asm = VolitionalAssembly::default();
        let active = ids(&["r1", "r2"]);
        let ctx = RuleContext {
            assembly: &asm,
            active_rules: &active,
        };
        assert!(check_acceptance(&m, &belief(&["r1"], &[], &["r1"]), ctx));
        assert!(check_acceptance(&m, &belief(&[], &[], &[]), ctx));
        let only_r1 = ids(&["r1"]);
        let ctx1 = RuleContext {
            assembly: &asm,
            active_rules: &only_r1,
        };
        assert!(!check_acceptance(&m, &belief(&["r1", "r4"], &[], &["r1", "r4"]), ctx1));
    }

    #[test]
    fn tiers_collapse_when_equal() {
        let m = model_with_rules(3);
        let asm = VolitionalAssembly::default();
        let active = ids(&["r1"]);
        let ctx = RuleContext {
            assembly: &asm,
            active_rules: &active,
        };
        for b in [belief(&["r1"], &["r1"], &["r1"]), belief(&["r2"], &["r2"], &["r2"])] {
            let full = check_tier(&m, &b, ctx, Tier::Full);
            assert_eq!(check_tier(&m, &b, ctx, Tier::Minimal), full);
            assert_eq!(check_tier(&m, &b, ctx, Tier::Maximal), full);
        }
    }

    fn sim(id: &str, active: &[&str]) -> SimultaneousMoment {
        SimultaneousMoment {
            id: id.into(),
            position: 0,
            belief_states: BTreeSet::new(),
            assembly: VolitionalAssembly::default(),
            active_rules: ids(active),
        }
    }

    fn lin(id: &str, sim: &str) -> LinearMoment {
        LinearMoment {
            id: id.into(),
            world: "w0".into(),
            position: 0,
            container_sim: sim.into(),
            realized: None,
        }
    }

    #[test]
    fn invariance_over_sequences() {
        let m = model_with_rules(2);
        let b = belief(&["r1"], &[], &["r1"]);
        assert!(check_invariance(&m, &b, &[]).unwrap());
        let (s0, s1) = (sim("s0", &["r1"]), sim("s1", &["r2"]));
        let (l0, l1) = (lin("l0", "s0"), lin("l1", "s1"));
        assert!(!check_invariance(&m, &b, &[(&l0, &s0), (&l1, &s1)]).unwrap());
        assert!(check_invariance(&m, &b, &[(&l0, &s0)]).unwrap());
        assert!(matches!(
            check_invariance(&m, &b, &[(&l0, &s1)]),
            Err(MachineryError::MalformedSequence { .. })
        ));
    }
}
