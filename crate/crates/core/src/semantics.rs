//! Satisfaction of formulas at (world, simultaneous moment, linear moment)
//! indexes.

use std::cell::{OnceCell, RefCell};
use std::collections::BTreeMap;
use std::rc::Rc;

use thiserror::Error;

use crate::formula::{Formula, FragmentError, Op};
use crate::machinery::{
    check_acceptance, check_invariance, check_tier, pre_belief_sequence, run_up_sequence,
    set_invariant, MachineryError,
};
use crate::model::{
    BeliefState, Index, LinearMoment, Model, PreBeliefMoment, Tier, ValidModel,
};
use crate::validate::validate_modal_frame;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("ill-formed index {index}: {reason}")]
    IllFormedIndex { index: String, reason: String },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("formula not in the evaluable fragment: {0}")]
    NotInFragment(#[from] FragmentError),
    #[error("accessible worlds do not share position structure: {0}")]
    FrameMismatch(String),
    #[error(transparent)]
    Machinery(#[from] MachineryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    /// Read ⊙ literally: the full tier must both fail and be accepted, so
    /// ⊙ never holds.
    pub strict_possibility: bool,
}

/// What a belief state satisfies at its own simultaneous moment.
#[derive(Debug, Clone)]
struct BeliefFacts<'m> {
    belief: &'m BeliefState,
    accepted: bool,
    invariant: bool,
    minimal: bool,
    maximal: bool,
    /// Number of consecutive meta levels (2, 3, ...) present and invariant.
    meta_depth: u32,
}

#[derive(Debug)]
struct SimFacts<'m> {
    beliefs: Vec<BeliefFacts<'m>>,
    run_up: Vec<&'m LinearMoment>,
    /// Pre-belief moments of all accepted belief states.
    pre_union: Vec<&'m PreBeliefMoment>,
}

/// Evaluates formulas over one validated model. Per-moment belief facts
/// are computed once and reused across queries.
pub struct Evaluator<'m> {
    model: &'m Model,
    options: EvalOptions,
    facts: RefCell<BTreeMap<(&'m str, &'m str), Rc<SimFacts<'m>>>>,
    frame: OnceCell<Result<(), String>>,
}

/// Checks `f` at `idx` with default options.
pub fn evaluate(model: &ValidModel, idx: &Index, f: &Formula) -> Result<bool, EvalError> {
    Evaluator::new(model).evaluate(idx, f)
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m ValidModel) -> Self {
        Evaluator::with_options(model, EvalOptions::default())
    }

    pub fn with_options(model: &'m ValidModel, options: EvalOptions) -> Self {
        Evaluator {
            model,
            options,
            facts: RefCell::new(BTreeMap::new()),
            frame: OnceCell::new(),
        }
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn evaluate(&self, idx: &Index, f: &Formula) -> Result<bool, EvalError> {
        f.check_fragment()?;
        for a in f.atoms() {
            self.pattern(a)?;
        }
        if uses_alethic(f) {
            if let Err(msg) = self.frame.get_or_init(|| {
                let report = validate_modal_frame(self.model);
                match report.findings.first() {
                    Some(first) => Err(first.to_string()),
                    None => Ok(()),
                }
            }) {
                return Err(EvalError::FrameMismatch(msg.clone()));
            }
        }
        let lin = self.check_index(idx)?;
        self.eval(idx, lin, f)
    }

    /// Satisfaction at every index of `world`.
    pub fn holds_in_world(&self, world: &str, f: &Formula) -> Result<bool, EvalError> {
        for idx in self.model.indexes().iter().filter(|i| i.world == world) {
            if !self.evaluate(idx, f)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn check_index(&self, idx: &Index) -> Result<&'m LinearMoment, EvalError> {
        let bad = |reason: &str| EvalError::IllFormedIndex {
            index: idx.to_string(),
            reason: reason.to_string(),
        };
        let world = self.model.world(&idx.world).ok_or_else(|| bad("unknown world"))?;
        let lin = self.model.lin(&idx.lin).ok_or_else(|| bad("unknown linear moment"))?;
        if self.model.sim(&idx.sim).is_none() {
            return Err(bad("unknown simultaneous moment"));
        }
        if !world.linear_moments.contains(&idx.lin) {
            return Err(bad("linear moment not in world"));
        }
        if lin.container_sim != idx.sim {
            return Err(bad("linear moment not contained in simultaneous moment"));
        }
        Ok(lin)
    }

    fn pattern(&self, atom: &str) -> Result<&'m crate::quanta::QuantaPattern, EvalError> {
        self.model
            .valuation
            .get(atom)
            .ok_or_else(|| EvalError::UnknownAtom(atom.to_string()))
    }

    pub fn atom_holds_actual(&self, lin: &LinearMoment, atom: &str) -> Result<bool, EvalError> {
        let pattern = self.pattern(atom)?;
        Ok(lin.realized.as_ref().is_some_and(|r| pattern.matches(r)))
    }

    pub fn atom_holds_hypothetical(
        &self,
        pb: &PreBeliefMoment,
        atom: &str,
    ) -> Result<bool, EvalError> {
        Ok(self.pattern(atom)?.matches(&pb.hypothetical))
    }

    fn sim_facts(&self, world: &'m str, sim: &'m str) -> Result<Rc<SimFacts<'m>>, EvalError> {
        if let Some(f) = self.facts.borrow().get(&(world, sim)) {
            return Ok(Rc::clone(f));
        }
        let model = self.model;
        let s = model.sim(sim).expect("index checked");
        let seq = run_up_sequence(model, world, sim);
        let mut beliefs = Vec::new();
        let mut pre_union: Vec<&PreBeliefMoment> = Vec::new();
        for bid in &s.belief_states {
            let Some(b) = model.belief_state(bid) else { continue };
            let ctx = s.context();
            let accepted = check_acceptance(model, b, ctx);
            let invariant = check_invariance(model, b, &seq)?;
            let mut meta_depth = 0;
            while let Some(level) = b.level(meta_depth + 2) {
                if !set_invariant(model, &level.rules, &seq)? {
                    break;
                }
                meta_depth += 1;
            }
            if accepted {
                pre_union.extend(pre_belief_sequence(model, b));
            }
            beliefs.push(BeliefFacts {
                belief: b,
                accepted,
                invariant,
                minimal: check_tier(model, b, ctx, Tier::Minimal),
                maximal: check_tier(model, b, ctx, Tier::Maximal),
                meta_depth,
            });
        }
        let facts = Rc::new(SimFacts {
            beliefs,
            run_up: seq.iter().map(|(l, _)| *l).collect(),
            pre_union,
        });
        self.facts.borrow_mut().insert((world, sim), Rc::clone(&facts));
        Ok(facts)
    }

    /// Belief states at the index's moment whose target the atom's pattern
    /// matches.
    fn matching<'a>(
        &self,
        facts: &'a SimFacts<'m>,
        atom: &str,
    ) -> Result<impl Iterator<Item = &'a BeliefFacts<'m>>, EvalError> {
        let pattern = self.pattern(atom)?;
        Ok(facts
            .beliefs
            .iter()
            .filter(move |b| pattern.matches(&b.belief.target)))
    }

    fn keys(&self, idx: &Index) -> (&'m str, &'m str) {
        let lin = self.model.lin(&idx.lin).expect("index checked");
        let world = self.model.world(&lin.world).expect("index checked");
        (world.id.as_str(), lin.container_sim.as_str())
    }

    fn facts_at(&self, idx: &Index) -> Result<Rc<SimFacts<'m>>, EvalError> {
        let (w, s) = self.keys(idx);
        self.sim_facts(w, s)
    }

    fn hypothetical(&self, pb: &PreBeliefMoment, body: &Formula) -> Result<bool, EvalError> {
        Ok(match body {
            Formula::Atom(a) => self.atom_holds_hypothetical(pb, a)?,
            Formula::Unary(Op::Not, x) => !self.hypothetical(pb, x)?,
            Formula::Binary(c, a, b) => c.apply(self.hypothetical(pb, a)?, self.hypothetical(pb, b)?),
            Formula::Unary(op, _) => {
                return Err(FragmentError { op: *op, body: body.to_string() }.into())
            }
        })
    }

    fn over_pre_union(&self, facts: &SimFacts<'m>, body: &Formula) -> Result<bool, EvalError> {
        if facts.pre_union.is_empty() {
            return Ok(false);
        }
        for pb in &facts.pre_union {
            if !self.hypothetical(pb, body)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn body_check(op: Op, body: &Formula) -> Result<(), EvalError> {
        if body.is_modal_free() {
            Ok(())
        } else {
            Err(FragmentError { op, body: body.to_string() }.into())
        }
    }

    pub fn eval_belief(&self, idx: &Index, body: &Formula) -> Result<bool, EvalError> {
        Self::body_check(Op::Bel, body)?;
        let facts = self.facts_at(idx)?;
        match body {
            Formula::Atom(p) => Ok(self.matching(&facts, p)?.any(|b| b.accepted && b.invariant)),
            _ => self.over_pre_union(&facts, body),
        }
    }

    pub fn eval_knowledge(&self, idx: &Index, body: &Formula) -> Result<bool, EvalError> {
        Self::body_check(Op::Know, body)?;
        if !self.eval_belief(idx, body)? {
            return Ok(false);
        }
        let lin = self.model.lin(&idx.lin).expect("index checked");
        for a in body.atoms() {
            if !self.atom_holds_actual(lin, a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn eval_meta(
        &self,
        idx: &Index,
        n: u32,
        body: &Formula,
        epistemic: bool,
    ) -> Result<bool, EvalError> {
        let op = if epistemic { Op::KnowMeta(n) } else { Op::BelMeta(n) };
        let Formula::Atom(p) = body else {
            return Err(FragmentError { op, body: body.to_string() }.into());
        };
        if n == 0 {
            return Err(FragmentError { op, body: body.to_string() }.into());
        }
        let facts = self.facts_at(idx)?;
        let believed = self
            .matching(&facts, p)?
            .any(|b| b.accepted && b.invariant && b.meta_depth >= n);
        if !believed || !epistemic {
            return Ok(believed);
        }
        // knowledge also needs p actual along the whole run-up
        for l in &facts.run_up {
            if !self.atom_holds_actual(l, p)? {
                return Ok(false);
            }
        }
        let lin = self.model.lin(&idx.lin).expect("index checked");
        self.atom_holds_actual(lin, p)
    }

    pub fn eval_psych(&self, idx: &Index, body: &Formula, necessity: bool) -> Result<bool, EvalError> {
        let op = if necessity { Op::PsyNecessity } else { Op::PsyPossibility };
        let Formula::Atom(p) = body else {
            return Err(FragmentError { op, body: body.to_string() }.into());
        };
        let facts = self.facts_at(idx)?;
        if necessity {
            return Ok(self.matching(&facts, p)?.any(|b| b.maximal && b.invariant));
        }
        if self.options.strict_possibility {
            return Ok(false);
        }
        let candidate = self
            .matching(&facts, p)?
            .any(|b| b.minimal && !b.accepted && !b.invariant);
        let believed = self.matching(&facts, p)?.any(|b| b.accepted && b.invariant);
        Ok(candidate && !believed)
    }

    pub fn eval_pre_belief(&self, idx: &Index, body: &Formula) -> Result<bool, EvalError> {
        Self::body_check(Op::PreBel, body)?;
        let facts = self.facts_at(idx)?;
        self.over_pre_union(&facts, body)
    }

    /// The linear moment of `world` matching `lin`'s position inside a
    /// simultaneous moment at the same position.
    fn image(&self, from: &LinearMoment, world: &str) -> Result<Index, EvalError> {
        let sim_pos = self.model.sim(&from.container_sim).map(|s| s.position);
        let w = self
            .model
            .world(world)
            .ok_or_else(|| EvalError::FrameMismatch(format!("unknown world `{world}`")))?;
        w.linear_moments
            .iter()
            .filter_map(|id| self.model.lin(id))
            .find(|l| {
                l.position == from.position
                    && self.model.sim(&l.container_sim).map(|s| s.position) == sim_pos
            })
            .map(|l| Index::new(world, &l.container_sim, &l.id))
            .ok_or_else(|| {
                EvalError::FrameMismatch(format!(
                    "`{world}` has no moment at position {}",
                    from.position
                ))
            })
    }

    fn temporal(&self, idx: &Index, future: bool) -> Vec<Index> {
        let lin = self.model.lin(&idx.lin).expect("index checked");
        let world = self.model.world(&idx.world).expect("index checked");
        let mut lins: Vec<&LinearMoment> = world
            .linear_moments
            .iter()
            .filter_map(|id| self.model.lin(id))
            .filter(|l| {
                if future {
                    l.position >= lin.position
                } else {
                    l.position <= lin.position
                }
            })
            .collect();
        lins.sort_by(|a, b| (a.position, &a.id).cmp(&(b.position, &b.id)));
        lins.into_iter()
            .map(|l| Index::new(&idx.world, &l.container_sim, &l.id))
            .collect()
    }

    fn eval(&self, idx: &Index, lin: &LinearMoment, f: &Formula) -> Result<bool, EvalError> {
        match f {
            Formula::Atom(a) => self.atom_holds_actual(lin, a),
            Formula::Binary(c, a, b) => {
                let x = self.eval(idx, lin, a)?;
                let y = self.eval(idx, lin, b)?;
                Ok(c.apply(x, y))
            }
            Formula::Unary(op, body) => match op {
                Op::Not => Ok(!self.eval(idx, lin, body)?),
                Op::Bel => self.eval_belief(idx, body),
                Op::Know => self.eval_knowledge(idx, body),
                Op::BelMeta(n) => self.eval_meta(idx, *n, body, false),
                Op::KnowMeta(n) => self.eval_meta(idx, *n, body, true),
                Op::PreBel => self.eval_pre_belief(idx, body),
                Op::PsyNecessity => self.eval_psych(idx, body, true),
                Op::PsyPossibility => self.eval_psych(idx, body, false),
                Op::Necessity | Op::Possibility => {
                    let world = self.model.world(&idx.world).expect("index checked");
                    let universal = *op == Op::Necessity;
                    for w in &world.accessible {
                        let target = self.image(lin, w)?;
                        let tl = self.model.lin(&target.lin).expect("image exists");
                        if self.eval(&target, tl, body)? != universal {
                            return Ok(!universal);
                        }
                    }
                    Ok(universal)
                }
                Op::Always | Op::Eventually | Op::HistAlways | Op::HistOnce => {
                    let future = matches!(op, Op::Always | Op::Eventually);
                    let universal = matches!(op, Op::Always | Op::HistAlways);
                    for target in self.temporal(idx, future) {
                        let tl = self.model.lin(&target.lin).expect("index checked");
                        if self.eval(&target, tl, body)? != universal {
                            return Ok(!universal);
                        }
                    }
                    Ok(universal)
                }
            },
        }
    }

    /// The paired-belief condition for `B p -> B q`: belief states for p and
    /// q share the index's moment, and whenever p's target is realized in
    /// the world the realized string satisfies q.
    pub fn paired_belief_condition(&self, idx: &Index, p: &str, q: &str) -> Result<bool, EvalError> {
        self.check_index(idx)?;
        let q_pattern = self.pattern(q)?;
        let facts = self.facts_at(idx)?;
        let has_q = self.matching(&facts, q)?.next().is_some();
        if !has_q {
            return Ok(false);
        }
        let world = self.model.world(&idx.world).expect("index checked");
        let realized: Vec<_> = world
            .linear_moments
            .iter()
            .filter_map(|id| self.model.lin(id))
            .filter_map(|l| l.realized.as_ref())
            .collect();
        let holds = self.matching(&facts, p)?.any(|bx| {
            realized
                .iter()
                .filter(|r| r.items == bx.belief.target.items)
                .all(|r| q_pattern.matches(r))
        });
        Ok(holds)
    }
}

fn uses_alethic(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => false,
        Formula::Unary(op, x) => matches!(op, Op::Necessity | Op::Possibility) || uses_alethic(x),
        Formula::Binary(_, a, b) => uses_alethic(a) || uses_alethic(b),
    }
}
