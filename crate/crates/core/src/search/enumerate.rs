//! The canonical enumeration.
//!
//! Every model has one reflexive world `w0` with `n` simultaneous moments
//! `s0..`, one linear moment each, and opaque rules `r1..rR`. Rule sets
//! are prefixes `P(j) = {r1..rj}`. The last moment activates `P(a)` with
//! `a ∈ {R-1, R}`, earlier moments `P(e)` with `e ∈ {a, a-1}`. Belief states
//! live at the last moment; each picks thresholds for its rules, minimal and
//! maximal tiers, extra tower levels, a target and an optional hypothetical
//! string. Atom patterns are fixed so that each representative string
//! realizes a distinct truth assignment.

use std::collections::BTreeSet;
use std::rc::Rc;

use crate::model::{
    BeliefState, Concept, ConceptArg, DeterminationSet, FormingFunction, FormingPair,
    FunctionArgs, Id, LinearMoment, Model, PreBeliefMoment, Rule, SimSnapshot,
    SimultaneousMoment, TakingFunction, TakingPair, ValidModel, VolitionalAssembly,
    VolitionalFunction, World,
};
use crate::quanta::{PatternElement, QuantaPattern, QuantaString, Quantum, QuantumKind};

use super::Bounds;

pub(crate) fn qs(items: &[Quantum]) -> QuantaString {
    QuantaString::new(items.to_vec(), items.len() > 1).expect("nonempty")
}

const P1: Quantum = Quantum::percept(1);
const Q1: Quantum = Quantum::qualia(1);
const G1: Quantum = Quantum::cognition(1);

/// The assembly of every canonical moment: `f_i` recommends `q1` from
/// concept `c1`, and the prime `f_v` outputs `p1->g1`.
pub(crate) fn canonical_assembly() -> VolitionalAssembly {
    VolitionalAssembly {
        functions: vec![
            VolitionalFunction {
                id: "f_v".into(),
                order: 0,
                args: FunctionArgs::Children(vec!["f_i".into()]),
                output: qs(&[P1, G1]),
            },
            VolitionalFunction {
                id: "f_i".into(),
                order: 1,
                args: FunctionArgs::Concepts(vec![ConceptArg { concept: "c1".into(), string: qs(&[Q1]) }]),
                output: qs(&[Q1]),
            },
        ],
    }
}

/// Installs `T1`, `F1` and the concept `c1` they induce.
pub(crate) fn install_concepts(m: &mut Model) {
    m.taking_functions.insert(
        "T1".into(),
        TakingFunction {
            id: "T1".into(),
            pairs: vec![TakingPair {
                source_position: 1,
                source: qs(&[P1]),
                target_position: 0,
                target: qs(&[Q1]),
            }],
        },
    );
    m.forming_functions.insert(
        "F1".into(),
        FormingFunction {
            id: "F1".into(),
            taking_source: "T1".into(),
            pairs: vec![FormingPair { input: qs(&[Q1]), output: qs(&[Q1]) }],
        },
    );
    m.concepts.insert("c1".into(), Concept { id: "c1".into(), input: qs(&[Q1]), output: qs(&[Q1]) });
}

pub(crate) fn prefix(j: usize) -> BTreeSet<Id> {
    (1..=j).map(|i| format!("r{i}")).collect()
}

/// Atom names, patterns and representative strings of the enumeration.
#[derive(Debug, Clone)]
struct Canon {
    atoms: Vec<(String, QuantaPattern)>,
    reps: Vec<QuantaString>,
    /// Index into `reps` of the string satisfying no atom.
    all_false: usize,
}

fn literal(i: usize) -> Quantum {
    let kind = [QuantumKind::Percept, QuantumKind::Qualia, QuantumKind::Cognition][i % 3];
    Quantum::new(kind, (i / 3) as u32 + 1)
}

fn canon(bounds: &Bounds) -> Canon {
    let k = bounds.max_atoms as usize;
    let names = (1..=k).map(|j| format!("a{j}"));
    if bounds.max_quanta_per_string as usize >= k {
        // a_j holds when position j carries p1; strings are bit vectors
        let atoms = names
            .enumerate()
            .map(|(j, name)| {
                let elements = (0..k)
                    .map(|i| if i == j { PatternElement::Literal(P1) } else { PatternElement::One })
                    .collect();
                (name, QuantaPattern { elements })
            })
            .collect();
        let reps: Vec<QuantaString> = (0..1usize << k)
            .map(|bits| {
                let items: Vec<Quantum> =
                    (0..k).map(|i| if bits >> (k - 1 - i) & 1 == 0 { P1 } else { Q1 }).collect();
                qs(&items)
            })
            .collect();
        Canon { all_false: reps.len() - 1, atoms, reps }
    } else {
        let atoms = names
            .enumerate()
            .map(|(j, name)| (name, QuantaPattern { elements: vec![PatternElement::Literal(literal(j))] }))
            .collect();
        let reps: Vec<QuantaString> = (0..=k).map(|j| qs(&[literal(j)])).collect();
        Canon { all_false: k, atoms, reps }
    }
}

/// Names of the atoms every enumerated model interprets.
pub fn canonical_atoms(bounds: &Bounds) -> Vec<String> {
    canon(bounds).atoms.into_iter().map(|(a, _)| a).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BeliefConfig {
    delta: usize,
    sigma: usize,
    xi: usize,
    /// Thresholds of levels 2, 3, ...
    meta: Vec<usize>,
    target: usize,
    hypothetical: Option<usize>,
}

fn configs(a: usize, e: usize, rules: usize, depth: usize, reps: usize) -> Vec<BeliefConfig> {
    let mut out = Vec::new();
    let mut deltas = vec![0];
    if e < a {
        deltas.push(e + 1);
    }
    if a < rules {
        deltas.push(a + 1);
    }
    for &delta in &deltas {
        let mut sigmas = vec![0];
        if delta > a {
            sigmas.push(a + 1);
        }
        let mut xis = vec![delta];
        if delta <= a && a < rules {
            xis.push(a + 1);
        }
        let mut towers: Vec<Vec<usize>> = vec![Vec::new()];
        if delta <= e {
            let mut levels = vec![0];
            if e < rules {
                levels.push(e + 1);
            }
            let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
            for _ in 1..depth {
                frontier = frontier
                    .iter()
                    .flat_map(|t| {
                        levels.iter().map(move |&l| {
                            let mut t = t.clone();
                            t.push(l);
                            t
                        })
                    })
                    .collect();
                towers.extend(frontier.iter().cloned());
            }
        }
        let hyps: Vec<Option<usize>> = if delta <= a {
            std::iter::once(None).chain((0..reps).map(Some)).collect()
        } else {
            vec![None]
        };
        for &sigma in &sigmas {
            for &xi in &xis {
                for meta in &towers {
                    for target in 0..reps {
                        for &hypothetical in &hyps {
                            out.push(BeliefConfig {
                                delta,
                                sigma,
                                xi,
                                meta: meta.clone(),
                                target,
                                hypothetical,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
struct Frame {
    sims: usize,
    a: usize,
    e: usize,
    configs: Rc<Vec<BeliefConfig>>,
}

/// The enumeration stream. See the module docs for the sub-class covered.
#[derive(Debug, Clone)]
pub struct Enumeration {
    bounds: Bounds,
    canon: Canon,
    realized: Vec<Option<usize>>,
    frames: Vec<Frame>,
    frame: usize,
    /// Nondecreasing config indexes of the current belief multiset.
    multiset: Vec<usize>,
    realized_at: usize,
    done: bool,
}

/// Every model of the canonical sub-class for `bounds`, in a fixed order:
/// moment count, then active-rule layout, then belief multiset, then the
/// realized output of the last moment.
pub fn enumerate_models(bounds: &Bounds) -> Enumeration {
    let canon = canon(bounds);
    let rules = bounds.max_rules as usize;
    let depth = bounds.max_tower_depth as usize;
    let mut frames = Vec::new();
    for sims in 1..=bounds.max_sim_moments as usize {
        for a in [rules - 1, rules] {
            let mut layouts = vec![a];
            if sims > 1 && a >= 1 {
                layouts.push(a - 1);
            }
            for e in layouts {
                let configs = Rc::new(configs(a, e, rules, depth, canon.reps.len()));
                frames.push(Frame { sims, a, e, configs });
            }
        }
    }
    let realized = std::iter::once(None)
        .chain((0..canon.reps.len()).filter(|&i| i != canon.all_false).map(Some))
        .collect();
    Enumeration {
        bounds: *bounds,
        canon,
        realized,
        done: frames.is_empty(),
        frames,
        frame: 0,
        multiset: Vec::new(),
        realized_at: 0,
    }
}

impl Enumeration {
    fn build(&self) -> Model {
        let frame = &self.frames[self.frame];
        let n = frame.sims;
        let mut m = Model::default();
        install_concepts(&mut m);
        for r in prefix(self.bounds.max_rules as usize) {
            m.rules.insert(r.clone(), Rule::opaque(r));
        }
        for (name, pattern) in &self.canon.atoms {
            m.valuation.insert(name.clone(), pattern.clone());
        }
        let assembly = canonical_assembly();
        let last = n - 1;
        let mut world = World { id: "w0".into(), linear_moments: Vec::new(), accessible: BTreeSet::from(["w0".into()]) };
        for i in 0..n {
            let (sid, lid) = (format!("s{i}"), format!("l{i}"));
            let active = prefix(if i == last { frame.a } else { frame.e });
            let mut belief_states = BTreeSet::new();
            if i == last {
                for (k, &c) in self.multiset.iter().enumerate() {
                    let cfg = &frame.configs[c];
                    let bid = format!("b{k}");
                    belief_states.insert(bid.clone());
                    let mut tower = vec![DeterminationSet {
                        level: 1,
                        rules: prefix(cfg.delta),
                        minimal: prefix(cfg.sigma),
                        maximal: prefix(cfg.xi),
                    }];
                    for (j, &t) in cfg.meta.iter().enumerate() {
                        tower.push(DeterminationSet::flat(j as u32 + 2, prefix(t)));
                    }
                    let mut pre_belief = Vec::new();
                    if let Some(h) = cfg.hypothetical {
                        let pid = format!("pb{k}");
                        m.pre_belief_moments.insert(
                            pid.clone(),
                            PreBeliefMoment {
                                id: pid.clone(),
                                owner: bid.clone(),
                                position: 0,
                                hypothetical: self.canon.reps[h].clone(),
                                snapshot: SimSnapshot { assembly: assembly.clone(), active_rules: active.clone() },
                            },
                        );
                        pre_belief.push(pid);
                    }
                    m.belief_states.insert(
                        bid.clone(),
                        BeliefState {
                            id: bid,
                            sim: sid.clone(),
                            target: self.canon.reps[cfg.target].clone(),
                            tower,
                            pre_belief,
                        },
                    );
                }
            }
            m.sim_moments.insert(
                sid.clone(),
                SimultaneousMoment {
                    id: sid.clone(),
                    position: i as i64,
                    belief_states,
                    assembly: assembly.clone(),
                    active_rules: active,
                },
            );
            let realized = if i == last {
                self.realized[self.realized_at].map(|r| self.canon.reps[r].clone())
            } else {
                None
            };
            m.linear_moments.insert(
                lid.clone(),
                LinearMoment { id: lid.clone(), world: "w0".into(), position: i as i64, container_sim: sid, realized },
            );
            world.linear_moments.push(lid);
        }
        m.worlds.insert("w0".into(), world);
        m
    }

    fn advance(&mut self) {
        self.realized_at += 1;
        if self.realized_at < self.realized.len() {
            return;
        }
        self.realized_at = 0;
        let c = self.frames[self.frame].configs.len();
        // next nondecreasing sequence of the same length, else grow
        let mut i = self.multiset.len();
        while i > 0 && self.multiset[i - 1] + 1 == c {
            i -= 1;
        }
        if i > 0 {
            let v = self.multiset[i - 1] + 1;
            for slot in &mut self.multiset[i - 1..] {
                *slot = v;
            }
            return;
        }
        let len = self.multiset.len() + 1;
        if len <= self.bounds.max_belief_states_per_sim as usize && c > 0 {
            self.multiset = vec![0; len];
            return;
        }
        self.multiset.clear();
        self.frame += 1;
        self.done = self.frame >= self.frames.len();
    }
}

impl Iterator for Enumeration {
    type Item = ValidModel;

    fn next(&mut self) -> Option<ValidModel> {
        if self.done {
            return None;
        }
        let model = self.build();
        self.advance();
        Some(ValidModel::assume_valid(model))
    }
}
