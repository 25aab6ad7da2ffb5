//! Seeded random models and formulas.
//!
//! The generator is PCG32 (`Lcg64Xsh32`, 64-bit state) seeded through
//! `seed_from_u64`, so a seed and bounds always give the same model.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng as _, SeedableRng};

use crate::formula::{Conn, Formula, Op};
use crate::model::{
    BeliefState, DeterminationSet, FunctionArgs, Id, LinearMoment, Model, PreBeliefMoment, Rule,
    RuleAtom, SimSnapshot, SimultaneousMoment, ValidModel, VolitionalAssembly, World,
};
use crate::quanta::{PatternElement, QuantaPattern, QuantaString, Quantum};

use super::enumerate::{canonical_assembly, install_concepts};
use super::Bounds;

pub type Rng = rand_pcg::Pcg32;

const ALPHABET: [Quantum; 3] = [Quantum::percept(1), Quantum::qualia(1), Quantum::cognition(1)];

fn string(rng: &mut Rng, max_len: u32) -> QuantaString {
    let n = rng.random_range(1..=max_len.max(1)) as usize;
    let items: Vec<Quantum> = (0..n).map(|_| *ALPHABET.choose(rng).expect("nonempty")).collect();
    let chained = n > 1 && rng.random_bool(0.7);
    QuantaString::new(items, chained).expect("nonempty")
}

fn pattern(rng: &mut Rng, max_len: u32) -> QuantaPattern {
    let n = rng.random_range(1..=max_len.max(1)) as usize;
    let elements = (0..n)
        .map(|_| match rng.random_range(0..10) {
            0 => PatternElement::Many,
            1 | 2 => PatternElement::One,
            _ => PatternElement::Literal(*ALPHABET.choose(rng).expect("nonempty")),
        })
        .collect();
    QuantaPattern { elements }
}

fn subset(rng: &mut Rng, from: &BTreeSet<Id>, p: f64) -> BTreeSet<Id> {
    from.iter().filter(|_| rng.random_bool(p)).cloned().collect()
}

fn predicate(rng: &mut Rng, max_len: u32) -> Vec<RuleAtom> {
    let n = rng.random_range(1..=2);
    (0..n)
        .map(|_| {
            let function: Id = ["f_v", "f_i"].choose(rng).expect("nonempty").to_string();
            match rng.random_range(0..5) {
                0 => RuleAtom::Arity { function, n: rng.random_range(0..=2) },
                1 => RuleAtom::UsesConcept { function, concept: "c1".into() },
                2 => RuleAtom::OutputMatches { function, pattern: pattern(rng, max_len) },
                3 => RuleAtom::ArgMatches { function, slot: rng.random_range(0..=1), pattern: pattern(rng, max_len) },
                _ => RuleAtom::OrderedBefore { a: rng.random_range(0..3), b: rng.random_range(0..3) },
            }
        })
        .collect()
}

/// The canonical assembly with random outputs, sometimes with a second
/// non-prime function.
fn assembly(rng: &mut Rng, max_len: u32) -> VolitionalAssembly {
    let mut a = canonical_assembly();
    if rng.random_bool(0.3) {
        let mut extra = a.functions[1].clone();
        extra.id = "f_j".into();
        extra.order = 2;
        a.functions.push(extra);
        a.functions[0].args = FunctionArgs::Children(vec!["f_i".into(), "f_j".into()]);
    }
    for f in &mut a.functions {
        if rng.random_bool(0.5) {
            f.output = string(rng, max_len);
        }
    }
    a
}

fn tower(rng: &mut Rng, rules: &BTreeSet<Id>, depth: u32) -> Vec<DeterminationSet> {
    let levels = rng.random_range(1..=depth.max(1));
    (1..=levels)
        .map(|level| {
            let d = subset(rng, rules, 0.4);
            let minimal = subset(rng, &d, 0.5);
            let mut maximal = d.clone();
            maximal.extend(subset(rng, rules, 0.3));
            DeterminationSet { level, rules: d, minimal, maximal }
        })
        .collect()
}

/// A valid model drawn from `seed`. Worlds share one moment layout so that
/// `[]` and `<>` always find image indexes.
pub fn random_model(seed: u64, bounds: &Bounds) -> ValidModel {
    let mut rng = Rng::seed_from_u64(seed);
    let rng = &mut rng;
    let q = bounds.max_quanta_per_string;
    let mut m = Model::default();
    install_concepts(&mut m);

    let rule_count = rng.random_range(1..=bounds.max_rules.max(1));
    let rule_ids: BTreeSet<Id> = (1..=rule_count).map(|i| format!("r{i}")).collect();
    for id in &rule_ids {
        let predicate = rng.random_bool(0.3).then(|| predicate(rng, q));
        m.rules.insert(id.clone(), Rule { id: id.clone(), predicate });
    }

    let atom_count = rng.random_range(1..=bounds.max_atoms.max(1));
    for j in 1..=atom_count {
        m.valuation.insert(format!("a{j}"), pattern(rng, q + 1));
    }

    let worlds = rng.random_range(1..=bounds.max_worlds.max(1));
    let sims = rng.random_range(1..=bounds.max_sim_moments.max(1));
    let lins_per_sim: Vec<u32> = (0..sims).map(|_| if rng.random_bool(0.25) { 2 } else { 1 }).collect();
    let world_ids: Vec<Id> = (0..worlds).map(|w| format!("w{w}")).collect();

    let mut belief_counter = 0;
    for (wi, wid) in world_ids.iter().enumerate() {
        let mut accessible: BTreeSet<Id> = world_ids.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
        if wi == 0 && accessible.is_empty() {
            accessible.insert(wid.clone());
        }
        let mut world = World { id: wid.clone(), linear_moments: Vec::new(), accessible };
        let mut lin_pos = 0i64;
        for si in 0..sims {
            let sid = format!("s{wi}_{si}");
            let asm = assembly(rng, q);
            let active = subset(rng, &rule_ids, 0.7);
            let mut belief_states = BTreeSet::new();
            for _ in 0..rng.random_range(0..=bounds.max_belief_states_per_sim) {
                let bid = format!("b{belief_counter}");
                belief_counter += 1;
                let mut pre_belief = Vec::new();
                for p in 0..rng.random_range(0..=2) {
                    let pid = format!("{bid}_p{p}");
                    let snapshot_rules = if rng.random_bool(0.7) { active.clone() } else { subset(rng, &rule_ids, 0.5) };
                    m.pre_belief_moments.insert(
                        pid.clone(),
                        PreBeliefMoment {
                            id: pid.clone(),
                            owner: bid.clone(),
                            position: p,
                            hypothetical: string(rng, q),
                            snapshot: SimSnapshot { assembly: asm.clone(), active_rules: snapshot_rules },
                        },
                    );
                    pre_belief.push(pid);
                }
                m.belief_states.insert(
                    bid.clone(),
                    BeliefState {
                        id: bid.clone(),
                        sim: sid.clone(),
                        target: string(rng, q),
                        tower: tower(rng, &rule_ids, bounds.max_tower_depth),
                        pre_belief,
                    },
                );
                belief_states.insert(bid);
            }
            m.sim_moments.insert(
                sid.clone(),
                SimultaneousMoment { id: sid.clone(), position: si as i64, belief_states, assembly: asm, active_rules: active },
            );
            for li in 0..lins_per_sim[si as usize] {
                let lid = format!("l{wi}_{si}_{li}");
                let realized = rng.random_bool(0.7).then(|| string(rng, q));
                m.linear_moments.insert(
                    lid.clone(),
                    LinearMoment { id: lid.clone(), world: wid.clone(), position: lin_pos, container_sim: sid.clone(), realized },
                );
                world.linear_moments.push(lid);
                lin_pos += 1;
            }
        }
        m.worlds.insert(wid.clone(), world);
    }
    ValidModel::assume_valid(m)
}

const SIMPLE_OPS: [Op; 11] = [
    Op::Not,
    Op::Bel,
    Op::Know,
    Op::PreBel,
    Op::Necessity,
    Op::Possibility,
    Op::PsyNecessity,
    Op::PsyPossibility,
    Op::Always,
    Op::Eventually,
    Op::HistAlways,
];

const CONNS: [Conn; 4] = [Conn::And, Conn::Or, Conn::Implies, Conn::Iff];

fn any_op(rng: &mut Rng) -> Op {
    match rng.random_range(0..14) {
        11 => Op::HistOnce,
        12 => Op::BelMeta(rng.random_range(1..=3)),
        13 => Op::KnowMeta(rng.random_range(1..=3)),
        i => SIMPLE_OPS[i],
    }
}

/// Any formula of the language up to `depth`, over `atoms`.
pub fn random_formula(rng: &mut Rng, atoms: &[String], depth: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        return Formula::atom(atoms.choose(rng).expect("atoms").clone());
    }
    if rng.random_bool(0.45) {
        Formula::unary(any_op(rng), random_formula(rng, atoms, depth - 1))
    } else {
        let c = *CONNS.choose(rng).expect("nonempty");
        Formula::binary(c, random_formula(rng, atoms, depth - 1), random_formula(rng, atoms, depth - 1))
    }
}

fn boolean(rng: &mut Rng, atoms: &[String], depth: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.35) {
        return Formula::atom(atoms.choose(rng).expect("atoms").clone());
    }
    if rng.random_bool(0.2) {
        Formula::not(boolean(rng, atoms, depth - 1))
    } else {
        let c = *CONNS.choose(rng).expect("nonempty");
        Formula::binary(c, boolean(rng, atoms, depth - 1), boolean(rng, atoms, depth - 1))
    }
}

/// A formula inside the evaluable fragment.
pub fn random_evaluable_formula(rng: &mut Rng, atoms: &[String], depth: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.2) {
        return Formula::atom(atoms.choose(rng).expect("atoms").clone());
    }
    let atom = |rng: &mut Rng| Formula::atom(atoms.choose(rng).expect("atoms").clone());
    match rng.random_range(0..10) {
        0..=3 => {
            let c = *CONNS.choose(rng).expect("nonempty");
            Formula::binary(
                c,
                random_evaluable_formula(rng, atoms, depth - 1),
                random_evaluable_formula(rng, atoms, depth - 1),
            )
        }
        4 => Formula::not(random_evaluable_formula(rng, atoms, depth - 1)),
        5 => {
            let op = *[Op::Bel, Op::Know, Op::PreBel].choose(rng).expect("nonempty");
            Formula::unary(op, boolean(rng, atoms, depth - 1))
        }
        6 => {
            let op = match rng.random_range(0..4) {
                0 => Op::BelMeta(rng.random_range(1..=3)),
                1 => Op::KnowMeta(rng.random_range(1..=3)),
                2 => Op::PsyNecessity,
                _ => Op::PsyPossibility,
            };
            Formula::unary(op, atom(rng))
        }
        _ => {
            let op = *[
                Op::Necessity,
                Op::Possibility,
                Op::Always,
                Op::Eventually,
                Op::HistAlways,
                Op::HistOnce,
            ]
            .choose(rng)
            .expect("nonempty");
            Formula::unary(op, random_evaluable_formula(rng, atoms, depth - 1))
        }
    }
}
