//! A slow reference evaluator written against the serialized model rather
//! than the library's model types. It recomputes everything per query and
//! shares no code with the main evaluator beyond the formula AST.

use std::collections::BTreeMap;

use pqg::format::to_value;
use pqg::formula::{Conn, Formula, Op};
use pqg::model::{Index, ValidModel};
use pqg::search::Checker;
use serde_json::Value;

type Str = Vec<String>;

struct Lin {
    id: String,
    position: i64,
    sim: String,
    realized: Option<Str>,
}

struct World {
    accessible: Vec<String>,
    lins: Vec<Lin>,
}

struct Sim {
    position: i64,
    beliefs: Vec<String>,
    assembly: Value,
    active: Vec<String>,
}

struct Level {
    level: u64,
    rules: Vec<String>,
    minimal: Vec<String>,
    maximal: Vec<String>,
}

struct Pre {
    hypothetical: Str,
    assembly: Value,
    active: Vec<String>,
}

struct Belief {
    target: Str,
    tower: Vec<Level>,
    pre: Vec<Pre>,
}

pub struct RefModel {
    worlds: BTreeMap<String, World>,
    sims: BTreeMap<String, Sim>,
    beliefs: BTreeMap<String, Belief>,
    rules: BTreeMap<String, Option<Vec<Value>>>,
    valuation: BTreeMap<String, Vec<String>>,
}

fn strs(v: &Value) -> Vec<String> {
    v.as_array()
        .map(|a| a.iter().map(|x| x.as_str().unwrap().to_string()).collect())
        .unwrap_or_default()
}

fn quanta(v: &Value) -> Str {
    strs(&v["items"])
}

impl RefModel {
    pub fn new(model: &ValidModel) -> Self {
        let v = to_value(model);
        let mut worlds = BTreeMap::new();
        for w in v["worlds"].as_array().unwrap() {
            let lins = w["linearMoments"]
                .as_array()
                .unwrap()
                .iter()
                .map(|l| Lin {
                    id: l["id"].as_str().unwrap().into(),
                    position: l["position"].as_i64().unwrap(),
                    sim: l["sim"].as_str().unwrap().into(),
                    realized: l.get("realized").map(quanta),
                })
                .collect();
            worlds.insert(w["id"].as_str().unwrap().to_string(), World { accessible: strs(&w["accessible"]), lins });
        }
        let mut sims = BTreeMap::new();
        for s in v["simMoments"].as_array().unwrap() {
            sims.insert(
                s["id"].as_str().unwrap().to_string(),
                Sim {
                    position: s["position"].as_i64().unwrap(),
                    beliefs: strs(&s["beliefStates"]),
                    assembly: s["assembly"].clone(),
                    active: strs(&s["activeRules"]),
                },
            );
        }
        let mut beliefs = BTreeMap::new();
        for b in v["beliefStates"].as_array().unwrap() {
            let tower = b["tower"]
                .as_array()
                .unwrap()
                .iter()
                .map(|d| Level {
                    level: d["level"].as_u64().unwrap(),
                    rules: strs(&d["rules"]),
                    minimal: strs(&d["minimal"]),
                    maximal: strs(&d["maximal"]),
                })
                .collect();
            let mut pre: Vec<(i64, String, Pre)> = b["preBelief"]
                .as_array()
                .unwrap()
                .iter()
                .map(|p| {
                    (
                        p["position"].as_i64().unwrap(),
                        p["id"].as_str().unwrap().to_string(),
                        Pre {
                            hypothetical: quanta(&p["hypothetical"]),
                            assembly: p["snapshot"]["assembly"].clone(),
                            active: strs(&p["snapshot"]["activeRules"]),
                        },
                    )
                })
                .collect();
            pre.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
            beliefs.insert(
                b["id"].as_str().unwrap().to_string(),
                Belief { target: quanta(&b["target"]), tower, pre: pre.into_iter().map(|x| x.2).collect() },
            );
        }
        let mut rules = BTreeMap::new();
        for r in v["rules"].as_array().unwrap() {
            rules.insert(r["id"].as_str().unwrap().to_string(), r.get("predicate").map(|p| p.as_array().unwrap().clone()));
        }
        let valuation = v["valuation"].as_object().unwrap().iter().map(|(k, p)| (k.clone(), strs(p))).collect();
        RefModel { worlds, sims, beliefs, rules, valuation }
    }
}

fn matches(pattern: &[String], s: &[String]) -> bool {
    match pattern.split_first() {
        None => s.is_empty(),
        Some((head, rest)) if head == "**" => (0..=s.len()).any(|k| matches(rest, &s[k..])),
        Some((head, rest)) => match s.split_first() {
            None => false,
            Some((x, tail)) => (head == "*" || head == x) && matches(rest, tail),
        },
    }
}

fn function<'a>(assembly: &'a Value, id: &str) -> Option<&'a Value> {
    assembly.as_array().unwrap().iter().find(|f| f["id"] == id)
}

fn predicate_atom(atom: &Value, assembly: &Value) -> bool {
    let f = atom.get("function").and_then(|id| function(assembly, id.as_str().unwrap()));
    let pattern = || strs(&atom["pattern"]);
    match atom["atom"].as_str().unwrap() {
        "ordered-before" => atom["a"].as_i64() < atom["b"].as_i64(),
        "arity" => f.is_some_and(|f| {
            let n = f.get("args").or(f.get("children")).and_then(Value::as_array).map_or(0, Vec::len);
            n as u64 == atom["n"].as_u64().unwrap()
        }),
        "uses-concept" => f.is_some_and(|f| {
            f.get("args").and_then(Value::as_array).is_some_and(|a| a.iter().any(|x| x["concept"] == atom["concept"]))
        }),
        "output-matches" => f.is_some_and(|f| matches(&pattern(), &quanta(&f["output"]))),
        "arg-matches" => f.is_some_and(|f| {
            let slot = atom["slot"].as_u64().unwrap() as usize;
            if let Some(args) = f.get("args").and_then(Value::as_array) {
                args.get(slot).is_some_and(|a| matches(&pattern(), &quanta(&a["string"])))
            } else {
                let children = strs(&f["children"]);
                children
                    .get(slot)
                    .and_then(|c| function(assembly, c))
                    .is_some_and(|c| matches(&pattern(), &quanta(&c["output"])))
            }
        }),
        other => panic!("unknown predicate atom {other}"),
    }
}

pub struct Reference<'m> {
    m: &'m RefModel,
    strict: bool,
}

type R = Result<bool, String>;

impl<'m> Reference<'m> {
    pub fn new(m: &'m RefModel) -> Self {
        Reference { m, strict: false }
    }

    fn satisfied(&self, set: &[String], assembly: &Value, active: &[String]) -> bool {
        set.iter().all(|r| {
            active.contains(r)
                && match self.m.rules.get(r) {
                    None => false,
                    Some(None) => true,
                    Some(Some(atoms)) => atoms.iter().all(|a| predicate_atom(a, assembly)),
                }
        })
    }

    fn run_up(&self, world: &str, sim: &str) -> Vec<&'m Lin> {
        let limit = self.m.sims[sim].position;
        self.m.worlds[world].lins.iter().filter(|l| self.m.sims[&l.sim].position <= limit).collect()
    }

    fn invariant(&self, world: &str, sim: &str, set: &[String]) -> bool {
        self.run_up(world, sim).iter().all(|l| {
            let s = &self.m.sims[&l.sim];
            self.satisfied(set, &s.assembly, &s.active)
        })
    }

    fn base(b: &Belief) -> Option<&Level> {
        b.tower.iter().find(|d| d.level == 1)
    }

    fn tier(&self, b: &Belief, sim: &Sim, pick: fn(&Level) -> &Vec<String>) -> bool {
        Self::base(b).is_some_and(|d| self.satisfied(pick(d), &sim.assembly, &sim.active))
    }

    fn beliefs_for(&self, sim: &str, atom: &str) -> Vec<&'m Belief> {
        let pattern = &self.m.valuation[atom];
        self.m.sims[sim]
            .beliefs
            .iter()
            .filter_map(|id| self.m.beliefs.get(id))
            .filter(|b| matches(pattern, &b.target))
            .collect()
    }

    fn accepted(&self, b: &Belief, sim: &str) -> bool {
        self.tier(b, &self.m.sims[sim], |d| &d.rules)
    }

    fn base_invariant(&self, b: &Belief, idx: &Index) -> bool {
        Self::base(b).is_some_and(|d| self.invariant(&idx.world, &idx.sim, &d.rules))
    }

    fn believes_atom(&self, idx: &Index, p: &str) -> bool {
        self.beliefs_for(&idx.sim, p)
            .into_iter()
            .any(|b| self.accepted(b, &idx.sim) && self.base_invariant(b, idx))
    }

    fn pre_moments(&self, idx: &Index) -> Vec<&'m Pre> {
        let mut out = Vec::new();
        for id in &self.m.sims[&idx.sim].beliefs {
            let Some(b) = self.m.beliefs.get(id) else { continue };
            if !self.accepted(b, &idx.sim) {
                continue;
            }
            let gated = b.pre.iter().all(|p| Self::base(b).is_some_and(|d| self.satisfied(&d.rules, &p.assembly, &p.active)));
            if gated {
                out.extend(b.pre.iter());
            }
        }
        out
    }

    fn hypothetical(&self, hyp: &[String], f: &Formula) -> bool {
        match f {
            Formula::Atom(a) => matches(&self.m.valuation[a], hyp),
            Formula::Unary(Op::Not, x) => !self.hypothetical(hyp, x),
            Formula::Binary(c, a, b) => conn(*c, self.hypothetical(hyp, a), self.hypothetical(hyp, b)),
            Formula::Unary(..) => unreachable!("fragment checked"),
        }
    }

    fn pre_belief(&self, idx: &Index, body: &Formula) -> bool {
        let moments = self.pre_moments(idx);
        !moments.is_empty() && moments.iter().all(|p| self.hypothetical(&p.hypothetical, body))
    }

    fn actual(&self, lin: &Lin, atom: &str) -> bool {
        lin.realized.as_ref().is_some_and(|r| matches(&self.m.valuation[atom], r))
    }

    fn lin(&self, idx: &Index) -> &'m Lin {
        self.m.worlds[&idx.world].lins.iter().find(|l| l.id == idx.lin).unwrap()
    }

    fn meta(&self, idx: &Index, n: u32, p: &str) -> bool {
        self.beliefs_for(&idx.sim, p).into_iter().any(|b| {
            self.accepted(b, &idx.sim)
                && self.base_invariant(b, idx)
                && (2..=n as u64 + 1).all(|k| {
                    b.tower.iter().find(|d| d.level == k).is_some_and(|d| self.invariant(&idx.world, &idx.sim, &d.rules))
                })
        })
    }

    fn check_fragment(f: &Formula) -> Result<(), String> {
        fn modal_free(f: &Formula) -> bool {
            match f {
                Formula::Atom(_) => true,
                Formula::Unary(Op::Not, x) => modal_free(x),
                Formula::Unary(..) => false,
                Formula::Binary(_, a, b) => modal_free(a) && modal_free(b),
            }
        }
        match f {
            Formula::Atom(_) => Ok(()),
            Formula::Binary(_, a, b) => Self::check_fragment(a).and(Self::check_fragment(b)),
            Formula::Unary(op, x) => match op {
                Op::Bel | Op::Know | Op::PreBel if !modal_free(x) => Err(format!("{f} outside fragment")),
                Op::Bel | Op::Know | Op::PreBel => Ok(()),
                Op::BelMeta(0) | Op::KnowMeta(0) => Err(format!("{f} has degree 0")),
                Op::BelMeta(_) | Op::KnowMeta(_) | Op::PsyNecessity | Op::PsyPossibility => match **x {
                    Formula::Atom(_) => Ok(()),
                    _ => Err(format!("{f} needs an atom")),
                },
                _ => Self::check_fragment(x),
            },
        }
    }

    pub fn evaluate(&self, idx: &Index, f: &Formula) -> R {
        Self::check_fragment(f)?;
        for a in f.atoms() {
            if !self.m.valuation.contains_key(a) {
                return Err(format!("unknown atom {a}"));
            }
        }
        let w = self.m.worlds.get(&idx.world).ok_or("unknown world")?;
        let l = w.lins.iter().find(|l| l.id == idx.lin).ok_or("lin not in world")?;
        if l.sim != idx.sim {
            return Err("lin not in sim".into());
        }
        self.eval(idx, f)
    }

    fn eval(&self, idx: &Index, f: &Formula) -> R {
        let atom = |x: &Formula| match x {
            Formula::Atom(a) => a.clone(),
            _ => unreachable!("fragment checked"),
        };
        Ok(match f {
            Formula::Atom(a) => self.actual(self.lin(idx), a),
            Formula::Binary(c, a, b) => conn(*c, self.eval(idx, a)?, self.eval(idx, b)?),
            Formula::Unary(op, x) => match op {
                Op::Not => !self.eval(idx, x)?,
                Op::Bel => match &**x {
                    Formula::Atom(p) => self.believes_atom(idx, p),
                    body => self.pre_belief(idx, body),
                },
                Op::Know => {
                    let believed = match &**x {
                        Formula::Atom(p) => self.believes_atom(idx, p),
                        body => self.pre_belief(idx, body),
                    };
                    believed && x.atoms().iter().all(|a| self.actual(self.lin(idx), a))
                }
                Op::PreBel => self.pre_belief(idx, x),
                Op::BelMeta(n) => self.meta(idx, *n, &atom(x)),
                Op::KnowMeta(n) => {
                    let p = atom(x);
                    self.meta(idx, *n, &p)
                        && self.run_up(&idx.world, &idx.sim).iter().all(|l| self.actual(l, &p))
                        && self.actual(self.lin(idx), &p)
                }
                Op::PsyNecessity => {
                    let sim = &self.m.sims[&idx.sim];
                    self.beliefs_for(&idx.sim, &atom(x))
                        .into_iter()
                        .any(|b| self.tier(b, sim, |d| &d.maximal) && self.base_invariant(b, idx))
                }
                Op::PsyPossibility => {
                    let p = atom(x);
                    let sim = &self.m.sims[&idx.sim];
                    !self.strict
                        && !self.believes_atom(idx, &p)
                        && self.beliefs_for(&idx.sim, &p).into_iter().any(|b| {
                            self.tier(b, sim, |d| &d.minimal) && !self.accepted(b, &idx.sim) && !self.base_invariant(b, idx)
                        })
                }
                Op::Necessity | Op::Possibility => {
                    let here = self.lin(idx);
                    let sim_pos = self.m.sims[&here.sim].position;
                    let mut values = Vec::new();
                    for w in &self.m.worlds[&idx.world].accessible {
                        let image = self.m.worlds[w]
                            .lins
                            .iter()
                            .find(|l| l.position == here.position && self.m.sims[&l.sim].position == sim_pos)
                            .ok_or_else(|| format!("no image in {w}"))?;
                        values.push(self.eval(&Index::new(w, &image.sim, &image.id), x)?);
                    }
                    if *op == Op::Necessity {
                        values.iter().all(|v| *v)
                    } else {
                        values.iter().any(|v| *v)
                    }
                }
                Op::Always | Op::Eventually | Op::HistAlways | Op::HistOnce => {
                    let here = self.lin(idx).position;
                    let future = matches!(op, Op::Always | Op::Eventually);
                    let mut values = Vec::new();
                    for l in &self.m.worlds[&idx.world].lins {
                        if (future && l.position >= here) || (!future && l.position <= here) {
                            values.push(self.eval(&Index::new(&idx.world, &l.sim, &l.id), x)?);
                        }
                    }
                    if matches!(op, Op::Always | Op::HistAlways) {
                        values.iter().all(|v| *v)
                    } else {
                        values.iter().any(|v| *v)
                    }
                }
            },
        })
    }
}

fn conn(c: Conn, a: bool, b: bool) -> bool {
    match c {
        Conn::And => a && b,
        Conn::Or => a || b,
        Conn::Implies => !a || b,
        Conn::Iff => a == b,
    }
}

/// Evaluates one query against a freshly converted model.
pub fn reference_evaluate(model: &ValidModel, idx: &Index, f: &Formula) -> R {
    let m = RefModel::new(model);
    Reference::new(&m).evaluate(idx, f)
}

pub struct ReferenceChecker;

impl Checker for ReferenceChecker {
    fn first_false(&self, model: &ValidModel, queries: &[(Index, Formula)]) -> Result<Option<usize>, String> {
        let m = RefModel::new(model);
        let r = Reference::new(&m);
        for (i, (idx, f)) in queries.iter().enumerate() {
            if !r.evaluate(idx, f)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}
