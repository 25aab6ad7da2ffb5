//! The single-agent model structure: worlds, sorted moments, belief states,
//! volitional assemblies, rules, concepts and the valuation.
//!
//! Cross references are held as string ids. Collections keyed by id are
//! `BTreeMap`s so that iteration order is deterministic everywhere.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Deref;

use crate::quanta::{QuantaPattern, QuantaString};
use crate::validate::{validate_model, ValidationReport};

pub type Id = String;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub id: Id,
    /// Linear moments of this world in `<_l` order.
    pub linear_moments: Vec<Id>,
    /// The metaphysical accessibility relation, restricted to this world.
    pub accessible: BTreeSet<Id>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMoment {
    pub id: Id,
    pub world: Id,
    pub position: i64,
    /// The simultaneous moment containing this moment.
    pub container_sim: Id,
    /// The actual output at this moment, if any.
    pub realized: Option<QuantaString>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimultaneousMoment {
    pub id: Id,
    pub position: i64,
    pub belief_states: BTreeSet<Id>,
    pub assembly: VolitionalAssembly,
    pub active_rules: BTreeSet<Id>,
}

/// The volitional functions and active rules a rule check runs against.
#[derive(Debug, Clone, Copy)]
pub struct RuleContext<'a> {
    pub assembly: &'a VolitionalAssembly,
    pub active_rules: &'a BTreeSet<Id>,
}

impl SimultaneousMoment {
    pub fn context(&self) -> RuleContext<'_> {
        RuleContext {
            assembly: &self.assembly,
            active_rules: &self.active_rules,
        }
    }
}

/// A hypothetical copy of a simultaneous moment carried by a pre-belief
/// moment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimSnapshot {
    pub assembly: VolitionalAssembly,
    pub active_rules: BTreeSet<Id>,
}

impl SimSnapshot {
    pub fn context(&self) -> RuleContext<'_> {
        RuleContext {
            assembly: &self.assembly,
            active_rules: &self.active_rules,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreBeliefMoment {
    pub id: Id,
    pub owner: Id,
    /// Rank under the hypothetical-time order of the owning belief state.
    pub position: i64,
    pub hypothetical: QuantaString,
    pub snapshot: SimSnapshot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptArg {
    pub concept: Id,
    pub string: QuantaString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionArgs {
    /// Arguments of the prime function: the ids of the functions whose
    /// recommended strings it consumes.
    Children(Vec<Id>),
    /// Arguments of a non-prime function: concept/string pairs.
    Concepts(Vec<ConceptArg>),
}

impl FunctionArgs {
    pub fn len(&self) -> usize {
        match self {
            FunctionArgs::Children(c) => c.len(),
            FunctionArgs::Concepts(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VolitionalFunction {
    pub id: Id,
    /// 0 for the prime function.
    pub order: u32,
    pub args: FunctionArgs,
    /// The recommended quanta string; for the prime, the moment's output.
    pub output: QuantaString,
}

impl VolitionalFunction {
    pub fn is_prime(&self) -> bool {
        self.order == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VolitionalAssembly {
    pub functions: Vec<VolitionalFunction>,
}

impl VolitionalAssembly {
    pub fn function(&self, id: &str) -> Option<&VolitionalFunction> {
        self.functions.iter().find(|f| f.id == id)
    }

    pub fn prime(&self) -> Option<&VolitionalFunction> {
        self.functions.iter().find(|f| f.is_prime())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub id: Id,
    pub input: QuantaString,
    pub output: QuantaString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TakingPair {
    pub source_position: i64,
    pub source: QuantaString,
    pub target_position: i64,
    pub target: QuantaString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TakingFunction {
    pub id: Id,
    pub pairs: Vec<TakingPair>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormingPair {
    pub input: QuantaString,
    pub output: QuantaString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormingFunction {
    pub id: Id,
    pub taking_source: Id,
    pub pairs: Vec<FormingPair>,
}

/// One conjunct of a structural rule predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleAtom {
    /// The function takes exactly `n` arguments.
    Arity { function: Id, n: usize },
    /// One of the function's arguments is built from the concept.
    UsesConcept { function: Id, concept: Id },
    /// The function's output matches the pattern.
    OutputMatches { function: Id, pattern: QuantaPattern },
    /// The argument string in `slot` (0-based) matches the pattern. For the
    /// prime function the slot names a child and its output is matched.
    ArgMatches {
        function: Id,
        slot: usize,
        pattern: QuantaPattern,
    },
    /// Static ordering constraint between two positions: `a < b`.
    OrderedBefore { a: i64, b: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: Id,
    /// Conjunction of atoms; `None` for opaque rules.
    pub predicate: Option<Vec<RuleAtom>>,
}

impl Rule {
    pub fn opaque(id: impl Into<Id>) -> Self {
        Rule {
            id: id.into(),
            predicate: None,
        }
    }
}

/// One level of a belief state's determination tower: the rule set with
/// its minimal and maximal tiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminationSet {
    pub level: u32,
    pub rules: BTreeSet<Id>,
    pub minimal: BTreeSet<Id>,
    pub maximal: BTreeSet<Id>,
}

impl DeterminationSet {
    /// A level whose three tiers coincide.
    pub fn flat(level: u32, rules: BTreeSet<Id>) -> Self {
        DeterminationSet {
            level,
            minimal: rules.clone(),
            maximal: rules.clone(),
            rules,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Minimal,
    Full,
    Maximal,
}

impl DeterminationSet {
    pub fn tier(&self, tier: Tier) -> &BTreeSet<Id> {
        match tier {
            Tier::Minimal => &self.minimal,
            Tier::Full => &self.rules,
            Tier::Maximal => &self.maximal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefState {
    pub id: Id,
    pub sim: Id,
    /// The output string were the belief actualized.
    pub target: QuantaString,
    /// Levels 1..k in order.
    pub tower: Vec<DeterminationSet>,
    /// Pre-belief moment ids in hypothetical-time order.
    pub pre_belief: Vec<Id>,
}

impl BeliefState {
    pub fn level(&self, level: u32) -> Option<&DeterminationSet> {
        self.tower.iter().find(|d| d.level == level)
    }

    pub fn base(&self) -> Option<&DeterminationSet> {
        self.level(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    pub worlds: BTreeMap<Id, World>,
    pub sim_moments: BTreeMap<Id, SimultaneousMoment>,
    pub linear_moments: BTreeMap<Id, LinearMoment>,
    pub pre_belief_moments: BTreeMap<Id, PreBeliefMoment>,
    pub belief_states: BTreeMap<Id, BeliefState>,
    pub concepts: BTreeMap<Id, Concept>,
    pub taking_functions: BTreeMap<Id, TakingFunction>,
    pub forming_functions: BTreeMap<Id, FormingFunction>,
    pub rules: BTreeMap<Id, Rule>,
    pub valuation: BTreeMap<String, QuantaPattern>,
}

impl Model {
    pub fn world(&self, id: &str) -> Option<&World> {
        self.worlds.get(id)
    }

    pub fn sim(&self, id: &str) -> Option<&SimultaneousMoment> {
        self.sim_moments.get(id)
    }

    pub fn lin(&self, id: &str) -> Option<&LinearMoment> {
        self.linear_moments.get(id)
    }

    pub fn belief_state(&self, id: &str) -> Option<&BeliefState> {
        self.belief_states.get(id)
    }

    pub fn pre_belief(&self, id: &str) -> Option<&PreBeliefMoment> {
        self.pre_belief_moments.get(id)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.valuation.keys().map(String::as_str)
    }

    /// Simultaneous moments containing at least one linear moment of
    /// `world`, in (position, id) order.
    pub fn sims_of_world(&self, world: &str) -> Vec<&SimultaneousMoment> {
        let mut sims: Vec<&SimultaneousMoment> = Vec::new();
        if let Some(w) = self.world(world) {
            for lid in &w.linear_moments {
                if let Some(sim) = self.lin(lid).and_then(|l| self.sim(&l.container_sim)) {
                    if !sims.iter().any(|s| s.id == sim.id) {
                        sims.push(sim);
                    }
                }
            }
        }
        sims.sort_by(|a, b| (a.position, &a.id).cmp(&(b.position, &b.id)));
        sims
    }

    /// Linear moments of `world` contained in `sim`, in (position, id) order.
    pub fn lins_in(&self, world: &str, sim: &str) -> Vec<&LinearMoment> {
        let mut lins: Vec<&LinearMoment> = self
            .world(world)
            .into_iter()
            .flat_map(|w| w.linear_moments.iter())
            .filter_map(|id| self.lin(id))
            .filter(|l| l.container_sim == sim)
            .collect();
        lins.sort_by(|a, b| (a.position, &a.id).cmp(&(b.position, &b.id)));
        lins
    }

    /// Every (world, sim, lin) index of the model: worlds by id, linear
    /// moments by (position, id).
    pub fn indexes(&self) -> Vec<Index> {
        let mut out = Vec::new();
        for w in self.worlds.values() {
            let mut lins: Vec<&LinearMoment> =
                w.linear_moments.iter().filter_map(|id| self.lin(id)).collect();
            lins.sort_by(|a, b| (a.position, &a.id).cmp(&(b.position, &b.id)));
            for l in lins {
                out.push(Index::new(&w.id, &l.container_sim, &l.id));
            }
        }
        out
    }
}

/// A point of evaluation: a linear moment together with the simultaneous
/// moment containing it, inside a world.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Index {
    pub world: Id,
    pub sim: Id,
    pub lin: Id,
}

impl Index {
    pub fn new(world: &str, sim: &str, lin: &str) -> Self {
        Index {
            world: world.to_string(),
            sim: sim.to_string(),
            lin: lin.to_string(),
        }
    }

    /// Parses the `world/sim/lin` form used on the command line.
    pub fn parse(text: &str) -> Option<Self> {
        let mut parts = text.split('/');
        let (w, s, l) = (parts.next()?, parts.next()?, parts.next()?);
        if parts.next().is_some() || w.is_empty() || s.is_empty() || l.is_empty() {
            return None;
        }
        Some(Index::new(w, s, l))
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.world, self.sim, self.lin)
    }
}

/// A model that passed validation with zero findings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidModel(Model);

impl ValidModel {
    pub fn new(model: Model) -> Result<Self, ValidationReport> {
        let report = validate_model(&model);
        if report.is_clean() {
            Ok(ValidModel(model))
        } else {
            Err(report)
        }
    }

    /// Wraps a model produced by a generator that is valid by construction.
    pub(crate) fn assume_valid(model: Model) -> Self {
        ValidModel(model)
    }

    pub fn into_inner(self) -> Model {
        self.0
    }
}

impl Deref for ValidModel {
    type Target = Model;

    fn deref(&self) -> &Model {
        &self.0
    }
}

impl AsRef<Model> for ValidModel {
    fn as_ref(&self) -> &Model {
        &self.0
    }
}
