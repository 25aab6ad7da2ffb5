//! Structural validation of models.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::formula::is_identifier;
use crate::model::{FunctionArgs, Id, Model, RuleAtom, VolitionalAssembly};

/// One violated invariant, naming the offending id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Finding {
    pub invariant: String,
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated", self.invariant)?;
        if !self.subject.is_empty() {
            write!(f, " at `{}`", self.subject)?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn mentions(&self, invariant: &str) -> bool {
        self.findings.iter().any(|f| f.invariant == invariant)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return writeln!(f, "no findings");
        }
        for finding in &self.findings {
            writeln!(f, "{finding}")?;
        }
        Ok(())
    }
}

struct Collector(Vec<Finding>);

impl Collector {
    fn push(&mut self, invariant: &str, subject: &str, detail: impl Into<String>) {
        self.0.push(Finding {
            invariant: invariant.to_string(),
            subject: subject.to_string(),
            detail: detail.into(),
        });
    }
}

pub const W_NONEMPTY: &str = "W nonempty";
pub const MINIMAL_IN_RULES: &str = "𝔖 ⊆ 𝔻";
pub const RULES_IN_MAXIMAL: &str = "𝔻 ⊆ 𝔛";

/// Checks every structural invariant of the model. An empty report means
/// the model is fit for evaluation.
pub fn validate_model(model: &Model) -> ValidationReport {
    let mut c = Collector(Vec::new());
    if model.worlds.is_empty() {
        c.push(W_NONEMPTY, "", "a model needs at least one world");
    }
    check_worlds(model, &mut c);
    check_sims(model, &mut c);
    check_belief_states(model, &mut c);
    check_pre_beliefs(model, &mut c);
    check_functions(model, &mut c);
    check_rules(model, &mut c);
    check_valuation(model, &mut c);
    let mut findings = c.0;
    findings.sort();
    findings.dedup();
    ValidationReport { findings }
}

fn check_worlds(model: &Model, c: &mut Collector) {
    let mut listed: BTreeMap<&str, &str> = BTreeMap::new();
    for (key, w) in &model.worlds {
        if *key != w.id {
            c.push("id key", key, format!("world stored under `{key}` has id `{}`", w.id));
        }
        for a in &w.accessible {
            if !model.worlds.contains_key(a) {
                c.push("accessibility targets exist", &w.id, format!("unknown world `{a}`"));
            }
        }
        let mut positions = BTreeSet::new();
        let mut last: Option<i64> = None;
        for lid in &w.linear_moments {
            if let Some(prev) = listed.insert(lid, &w.id) {
                c.push("linear moment listed once", lid, format!("also listed by `{prev}`"));
            }
            let Some(l) = model.lin(lid) else {
                c.push("linear moments exist", &w.id, format!("unknown linear moment `{lid}`"));
                continue;
            };
            if l.world != w.id {
                c.push("linear moment world", lid, format!("listed by `{}` but names `{}`", w.id, l.world));
            }
            if !positions.insert(l.position) {
                c.push("<_l positions distinct", lid, format!("position {} repeated in `{}`", l.position, w.id));
            }
            if last.is_some_and(|p| p >= l.position) {
                c.push("<_l listing order", &w.id, "linear moments not listed in position order");
            }
            last = Some(l.position);
        }
    }
    for (key, l) in &model.linear_moments {
        if *key != l.id {
            c.push("id key", key, format!("linear moment stored under `{key}` has id `{}`", l.id));
        }
        if !listed.contains_key(key.as_str()) {
            c.push("linear moment belongs to a world", key, "not listed by any world");
        }
        if model.sim(&l.container_sim).is_none() {
            c.push("⊃_s lin-sim", key, format!("container `{}` is not a simultaneous moment", l.container_sim));
        }
        if let Some(s) = &l.realized {
            check_string(c, key, s.is_empty());
        }
    }
}

fn check_string(c: &mut Collector, subject: &str, empty: bool) {
    if empty {
        c.push("quanta strings nonempty", subject, "empty quanta string");
    }
}

fn check_sims(model: &Model, c: &mut Collector) {
    let mut sim_world: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for l in model.linear_moments.values() {
        sim_world.entry(&l.container_sim).or_default().insert(&l.world);
    }
    let mut positions: BTreeMap<(&str, i64), &str> = BTreeMap::new();
    for (key, s) in &model.sim_moments {
        if *key != s.id {
            c.push("id key", key, format!("simultaneous moment stored under `{key}` has id `{}`", s.id));
        }
        match sim_world.get(key.as_str()) {
            None => c.push("simultaneous moment contains a linear moment", key, "no linear moment is contained in it"),
            Some(ws) if ws.len() > 1 => c.push("simultaneous moment within one world", key, "contains linear moments of several worlds"),
            Some(ws) => {
                let w = ws.iter().next().copied().unwrap_or_default();
                if let Some(other) = positions.insert((w, s.position), key) {
                    c.push("<_s positions distinct", key, format!("shares position {} with `{other}`", s.position));
                }
            }
        }
        for b in &s.belief_states {
            match model.belief_state(b) {
                None => c.push("belief states exist", key, format!("unknown belief state `{b}`")),
                Some(bs) if bs.sim != s.id => c.push("R_𝔹 consistent", b, format!("listed by `{key}` but attached to `{}`", bs.sim)),
                Some(_) => {}
            }
        }
        check_active(model, c, key, &s.active_rules);
        check_assembly(model, c, key, &s.assembly);
    }
}

fn check_active(model: &Model, c: &mut Collector, subject: &str, active: &BTreeSet<Id>) {
    for r in active {
        if !model.rules.contains_key(r) {
            c.push("active rules exist", subject, format!("unknown rule `{r}`"));
        }
    }
}

fn check_assembly(model: &Model, c: &mut Collector, subject: &str, asm: &VolitionalAssembly) {
    let primes: Vec<_> = asm.functions.iter().filter(|f| f.is_prime()).collect();
    if primes.len() != 1 {
        c.push("one prime function", subject, format!("found {} order-0 functions", primes.len()));
    }
    let mut ids = BTreeSet::new();
    let mut orders = BTreeSet::new();
    for f in &asm.functions {
        if !ids.insert(&f.id) {
            c.push("function ids distinct", subject, format!("duplicate function `{}`", f.id));
        }
        check_string(c, subject, f.output.is_empty());
        match (&f.args, f.is_prime()) {
            (FunctionArgs::Children(_), false) => {
                c.push("function arguments", subject, format!("`{}` has order {} but takes children", f.id, f.order))
            }
            (FunctionArgs::Concepts(_), true) => {
                c.push("function arguments", subject, format!("prime `{}` takes concept arguments", f.id))
            }
            (FunctionArgs::Concepts(args), false) => {
                if !orders.insert(f.order) {
                    c.push("non-prime orders distinct", subject, format!("order {} repeated", f.order));
                }
                for a in args {
                    match model.concepts.get(&a.concept) {
                        None => c.push("concept arguments resolve", subject, format!("`{}` references unknown concept `{}`", f.id, a.concept)),
                        Some(concept) if concept.output != a.string => c.push(
                            "argument strings come from forming functions",
                            subject,
                            format!("`{}` pairs `{}` with `{}` but the concept outputs `{}`", f.id, a.concept, a.string, concept.output),
                        ),
                        Some(_) => {}
                    }
                }
            }
            (FunctionArgs::Children(_), true) => {}
        }
    }
    if let Some(prime) = primes.first() {
        if let FunctionArgs::Children(children) = &prime.args {
            let given: BTreeSet<&Id> = children.iter().collect();
            let expected: BTreeSet<&Id> = asm
                .functions
                .iter()
                .filter(|f| !f.is_prime())
                .map(|f| &f.id)
                .collect();
            if given != expected || given.len() != children.len() {
                c.push("prime takes every non-prime output", subject, format!("`{}` children differ from the non-prime functions", prime.id));
            }
        }
    }
}

fn check_belief_states(model: &Model, c: &mut Collector) {
    for (key, b) in &model.belief_states {
        if *key != b.id {
            c.push("id key", key, format!("belief state stored under `{key}` has id `{}`", b.id));
        }
        match model.sim(&b.sim) {
            None => c.push("belief state moment exists", key, format!("unknown simultaneous moment `{}`", b.sim)),
            Some(s) if !s.belief_states.contains(key) => {
                c.push("R_𝔹 consistent", key, format!("`{}` does not list it", b.sim))
            }
            Some(_) => {}
        }
        check_string(c, key, b.target.is_empty());
        if b.tower.is_empty() {
            c.push("determination level 1 present", key, "empty tower");
        }
        for (i, d) in b.tower.iter().enumerate() {
            if d.level as usize != i + 1 {
                c.push("tower levels contiguous", key, format!("entry {} has level {}", i + 1, d.level));
            }
            let subject = format!("{key}@{}", d.level);
            if !d.minimal.is_subset(&d.rules) {
                c.push(MINIMAL_IN_RULES, &subject, "minimal rules are not all determination rules");
            }
            if !d.rules.is_subset(&d.maximal) {
                c.push(RULES_IN_MAXIMAL, &subject, "determination rules are not all maximal rules");
            }
            for r in d.minimal.iter().chain(&d.rules).chain(&d.maximal) {
                if !model.rules.contains_key(r) {
                    c.push("determination rules exist", &subject, format!("unknown rule `{r}`"));
                }
            }
        }
        let mut positions = BTreeSet::new();
        for pid in &b.pre_belief {
            match model.pre_belief(pid) {
                None => c.push("pre-belief moments exist", key, format!("unknown pre-belief moment `{pid}`")),
                Some(pb) => {
                    if pb.owner != b.id {
                        c.push("pre-belief owner", pid, format!("listed by `{key}` but owned by `{}`", pb.owner));
                    }
                    if !positions.insert(pb.position) {
                        c.push("<_h positions distinct", pid, format!("position {} repeated", pb.position));
                    }
                }
            }
        }
    }
}

fn check_pre_beliefs(model: &Model, c: &mut Collector) {
    for (key, pb) in &model.pre_belief_moments {
        if *key != pb.id {
            c.push("id key", key, format!("pre-belief moment stored under `{key}` has id `{}`", pb.id));
        }
        match model.belief_state(&pb.owner) {
            None => c.push("pre-belief owner", key, format!("unknown belief state `{}`", pb.owner)),
            Some(b) if !b.pre_belief.contains(key) => {
                c.push("pre-belief owner", key, format!("`{}` does not list it", pb.owner))
            }
            Some(_) => {}
        }
        check_string(c, key, pb.hypothetical.is_empty());
        check_active(model, c, key, &pb.snapshot.active_rules);
        check_assembly(model, c, key, &pb.snapshot.assembly);
    }
}

fn check_functions(model: &Model, c: &mut Collector) {
    for (key, t) in &model.taking_functions {
        let mut sources = BTreeSet::new();
        for p in &t.pairs {
            if p.source_position <= p.target_position {
                c.push("taking retrieves earlier strings", key, format!("source position {} is not after target position {}", p.source_position, p.target_position));
            }
            if !sources.insert((p.source_position, &p.source)) {
                c.push("taking function is a partial map", key, format!("source `{}` at {} repeated", p.source, p.source_position));
            }
        }
    }
    for (key, f) in &model.forming_functions {
        let Some(t) = model.taking_functions.get(&f.taking_source) else {
            c.push("forming source exists", key, format!("unknown taking function `{}`", f.taking_source));
            continue;
        };
        let mut inputs = BTreeSet::new();
        for p in &f.pairs {
            if !t.pairs.iter().any(|tp| tp.target == p.input) {
                c.push("forming inputs come from taking", key, format!("`{}` is no target of `{}`", p.input, t.id));
            }
            if !inputs.insert(&p.input) {
                c.push("forming function is a map", key, format!("input `{}` repeated", p.input));
            }
        }
    }
    for (key, concept) in &model.concepts {
        let instance = model
            .forming_functions
            .values()
            .flat_map(|f| &f.pairs)
            .any(|p| p.input == concept.input && p.output == concept.output);
        if !instance {
            c.push("concept is a forming mapping", key, format!("`{}` => `{}` is not a declared mapping", concept.input, concept.output));
        }
    }
}

fn check_rules(model: &Model, c: &mut Collector) {
    let mut functions: BTreeSet<&str> = BTreeSet::new();
    let snapshots = model.pre_belief_moments.values().map(|p| &p.snapshot.assembly);
    for asm in model.sim_moments.values().map(|s| &s.assembly).chain(snapshots) {
        functions.extend(asm.functions.iter().map(|f| f.id.as_str()));
    }
    for (key, r) in &model.rules {
        if *key != r.id {
            c.push("id key", key, format!("rule stored under `{key}` has id `{}`", r.id));
        }
        for atom in r.predicate.iter().flatten() {
            let function = match atom {
                RuleAtom::Arity { function, .. }
                | RuleAtom::OutputMatches { function, .. }
                | RuleAtom::ArgMatches { function, .. } => Some(function),
                RuleAtom::UsesConcept { function, concept } => {
                    if !model.concepts.contains_key(concept) {
                        c.push("rule references exist", key, format!("unknown concept `{concept}`"));
                    }
                    Some(function)
                }
                RuleAtom::OrderedBefore { .. } => None,
            };
            if let Some(f) = function {
                if !functions.contains(f.as_str()) {
                    c.push("rule references exist", key, format!("unknown function `{f}`"));
                }
            }
        }
    }
}

fn check_valuation(model: &Model, c: &mut Collector) {
    for (atom, pattern) in &model.valuation {
        if !is_identifier(atom) {
            c.push("atom names", atom, "atoms must match [a-z][a-zA-Z0-9_]*");
        }
        if pattern.elements.is_empty() {
            c.push("patterns nonempty", atom, "empty pattern");
        }
    }
}

/// Box and diamond move between worlds by position. Every accessible world
/// must carry a linear moment at each position of the source world, inside
/// a simultaneous moment at the same position.
pub fn validate_modal_frame(model: &Model) -> ValidationReport {
    let mut c = Collector(Vec::new());
    let shape = |world: &str| -> BTreeMap<i64, i64> {
        model
            .world(world)
            .into_iter()
            .flat_map(|w| &w.linear_moments)
            .filter_map(|id| model.lin(id))
            .filter_map(|l| model.sim(&l.container_sim).map(|s| (l.position, s.position)))
            .collect()
    };
    for w in model.worlds.values() {
        let own = shape(&w.id);
        for a in &w.accessible {
            let other = shape(a);
            for (lpos, spos) in &own {
                if other.get(lpos) != Some(spos) {
                    c.push("accessible worlds share position structure", &w.id, format!("`{a}` has no matching moment at position {lpos}"));
                }
            }
        }
    }
    ValidationReport { findings: c.0 }
}
