//! The `pqg-1` JSON model format.
//!
//! Quanta strings are `{"items": ["p1", "g1"], "chained": true}`; patterns
//! are arrays of codes, `"*"` and `"**"`. [`save`] writes sorted keys,
//! arrays in (position, id) order and two-space indentation.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::model::{
    BeliefState, Concept, ConceptArg, DeterminationSet, FormingFunction, FormingPair,
    FunctionArgs, Id, LinearMoment, Model, PreBeliefMoment, Rule, RuleAtom, SimSnapshot,
    SimultaneousMoment, TakingFunction, TakingPair, ValidModel, VolitionalAssembly,
    VolitionalFunction, World,
};
use crate::quanta::{PatternElement, QuantaPattern, QuantaString, Quantum};
use crate::validate::ValidationReport;

pub const FORMAT_VERSION: &str = "pqg-1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("malformed document at {path}: {message}")]
    Malformed { path: String, message: String },
    #[error("model failed validation:\n{0}")]
    Validation(ValidationReport),
}

type Res<T> = Result<T, FormatError>;

/// Parses and validates a document.
pub fn load(text: &str) -> Res<ValidModel> {
    ValidModel::new(read(text)?).map_err(FormatError::Validation)
}

/// Parses a document without validating the resulting model.
pub fn read(text: &str) -> Res<Model> {
    let value: Value = serde_json::from_str(text).map_err(|e| FormatError::Malformed {
        path: "$".into(),
        message: e.to_string(),
    })?;
    Doc::root(&value).model()
}

#[derive(Clone, Copy)]
struct Doc<'v> {
    value: &'v Value,
}

struct Obj<'v> {
    map: &'v Map<String, Value>,
    path: String,
}

fn malformed<T>(path: &str, message: impl Into<String>) -> Res<T> {
    Err(FormatError::Malformed {
        path: path.to_string(),
        message: message.into(),
    })
}

impl<'v> Obj<'v> {
    fn new(value: &'v Value, path: String, keys: &[&str]) -> Res<Self> {
        let Some(map) = value.as_object() else {
            return malformed(&path, "expected an object");
        };
        for k in map.keys() {
            if !keys.contains(&k.as_str()) {
                return malformed(&format!("{path}.{k}"), "unexpected key");
            }
        }
        Ok(Obj { map, path })
    }

    fn sub(&self, key: &str) -> String {
        format!("{}.{key}", self.path)
    }

    fn opt(&self, key: &str) -> Option<(&'v Value, String)> {
        self.map.get(key).map(|v| (v, self.sub(key)))
    }

    fn get(&self, key: &str) -> Res<(&'v Value, String)> {
        match self.opt(key) {
            Some(x) => Ok(x),
            None => malformed(&self.sub(key), "missing key"),
        }
    }

    fn string(&self, key: &str) -> Res<String> {
        let (v, path) = self.get(key)?;
        as_str(v, &path)
    }

    fn int(&self, key: &str) -> Res<i64> {
        let (v, path) = self.get(key)?;
        v.as_i64().map_or_else(|| malformed(&path, "expected an integer"), Ok)
    }

    fn uint(&self, key: &str) -> Res<u64> {
        let (v, path) = self.get(key)?;
        v.as_u64().map_or_else(|| malformed(&path, "expected a non-negative integer"), Ok)
    }

    fn array(&self, key: &str) -> Res<Vec<(&'v Value, String)>> {
        let (v, path) = self.get(key)?;
        as_array(v, &path)
    }

    fn opt_array(&self, key: &str) -> Res<Vec<(&'v Value, String)>> {
        match self.opt(key) {
            Some((v, path)) => as_array(v, &path),
            None => Ok(Vec::new()),
        }
    }

    fn ids(&self, key: &str) -> Res<BTreeSet<Id>> {
        let mut out = BTreeSet::new();
        for (v, path) in self.array(key)? {
            if !out.insert(as_str(v, &path)?) {
                return malformed(&path, "duplicate id");
            }
        }
        Ok(out)
    }

    fn quanta(&self, key: &str) -> Res<QuantaString> {
        let (v, path) = self.get(key)?;
        quanta_string(v, path)
    }

    fn pattern(&self, key: &str) -> Res<QuantaPattern> {
        let (v, path) = self.get(key)?;
        pattern(v, &path)
    }
}

fn as_str(v: &Value, path: &str) -> Res<String> {
    v.as_str().map_or_else(|| malformed(path, "expected a string"), |s| Ok(s.to_string()))
}

fn as_array<'v>(v: &'v Value, path: &str) -> Res<Vec<(&'v Value, String)>> {
    match v.as_array() {
        Some(items) => Ok(items
            .iter()
            .enumerate()
            .map(|(i, x)| (x, format!("{path}[{i}]")))
            .collect()),
        None => malformed(path, "expected an array"),
    }
}

fn quanta_string(v: &Value, path: String) -> Res<QuantaString> {
    let o = Obj::new(v, path, &["items", "chained"])?;
    let mut items = Vec::new();
    for (x, p) in o.array("items")? {
        let code = as_str(x, &p)?;
        match code.parse::<Quantum>() {
            Ok(q) => items.push(q),
            Err(e) => return malformed(&p, e.to_string()),
        }
    }
    let (c, cpath) = o.get("chained")?;
    let Some(chained) = c.as_bool() else {
        return malformed(&cpath, "expected a boolean");
    };
    QuantaString::new(items, chained).or_else(|e| malformed(&o.sub("items"), e.to_string()))
}

fn pattern(v: &Value, path: &str) -> Res<QuantaPattern> {
    let mut elements = Vec::new();
    for (x, p) in as_array(v, path)? {
        let text = as_str(x, &p)?;
        match text.parse::<PatternElement>() {
            Ok(e) => elements.push(e),
            Err(e) => return malformed(&p, e.to_string()),
        }
    }
    QuantaPattern::new(elements).or_else(|e| malformed(path, e.to_string()))
}

fn insert_unique<T>(map: &mut BTreeMap<Id, T>, id: Id, item: T, path: &str) -> Res<()> {
    if map.contains_key(&id) {
        return malformed(path, format!("duplicate id `{id}`"));
    }
    map.insert(id, item);
    Ok(())
}

fn assembly(v: &Value, path: String) -> Res<VolitionalAssembly> {
    let mut functions = Vec::new();
    for (f, fpath) in as_array(v, &path)? {
        let o = Obj::new(f, fpath, &["id", "order", "children", "args", "output"])?;
        let order = u32::try_from(o.uint("order")?).or_else(|_| malformed(&o.sub("order"), "too large"))?;
        let args = match (o.opt("children"), o.opt("args")) {
            (Some(_), Some(_)) => return malformed(&o.path, "both `children` and `args` given"),
            (Some((c, cpath)), None) => {
                let mut ids = Vec::new();
                for (x, p) in as_array(c, &cpath)? {
                    ids.push(as_str(x, &p)?);
                }
                FunctionArgs::Children(ids)
            }
            (None, Some((a, apath))) => {
                let mut args = Vec::new();
                for (x, p) in as_array(a, &apath)? {
                    let ao = Obj::new(x, p, &["concept", "string"])?;
                    args.push(ConceptArg {
                        concept: ao.string("concept")?,
                        string: ao.quanta("string")?,
                    });
                }
                FunctionArgs::Concepts(args)
            }
            (None, None) => return malformed(&o.path, "one of `children` or `args` required"),
        };
        functions.push(VolitionalFunction {
            id: o.string("id")?,
            order,
            args,
            output: o.quanta("output")?,
        });
    }
    functions.sort_by(|a, b| (a.order, &a.id).cmp(&(b.order, &b.id)));
    Ok(VolitionalAssembly { functions })
}

fn rule_atom(v: &Value, path: String) -> Res<RuleAtom> {
    let kind = Obj::new(v, path.clone(), &["atom", "function", "n", "concept", "pattern", "slot", "a", "b"])?
        .string("atom")?;
    Ok(match kind.as_str() {
        "arity" => {
            let o = Obj::new(v, path, &["atom", "function", "n"])?;
            RuleAtom::Arity { function: o.string("function")?, n: o.uint("n")? as usize }
        }
        "uses-concept" => {
            let o = Obj::new(v, path, &["atom", "function", "concept"])?;
            RuleAtom::UsesConcept { function: o.string("function")?, concept: o.string("concept")? }
        }
        "output-matches" => {
            let o = Obj::new(v, path, &["atom", "function", "pattern"])?;
            RuleAtom::OutputMatches { function: o.string("function")?, pattern: o.pattern("pattern")? }
        }
        "arg-matches" => {
            let o = Obj::new(v, path, &["atom", "function", "slot", "pattern"])?;
            RuleAtom::ArgMatches {
                function: o.string("function")?,
                slot: o.uint("slot")? as usize,
                pattern: o.pattern("pattern")?,
            }
        }
        "ordered-before" => {
            let o = Obj::new(v, path, &["atom", "a", "b"])?;
            RuleAtom::OrderedBefore { a: o.int("a")?, b: o.int("b")? }
        }
        other => return malformed(&format!("{path}.atom"), format!("unknown rule atom `{other}`")),
    })
}

impl<'v> Doc<'v> {
    fn root(value: &'v Value) -> Self {
        Doc { value }
    }

    fn model(self) -> Res<Model> {
        let root = Obj::new(
            self.value,
            "$".into(),
            &[
                "formatVersion", "worlds", "simMoments", "beliefStates", "concepts",
                "takingFunctions", "formingFunctions", "rules", "valuation",
            ],
        )?;
        let version = root.string("formatVersion")?;
        if version != FORMAT_VERSION {
            return malformed("$.formatVersion", format!("unsupported version `{version}`"));
        }
        let mut m = Model::default();

        for (w, path) in root.array("worlds")? {
            let o = Obj::new(w, path.clone(), &["id", "accessible", "linearMoments"])?;
            let id = o.string("id")?;
            let mut lins = Vec::new();
            for (l, lpath) in o.array("linearMoments")? {
                let lo = Obj::new(l, lpath.clone(), &["id", "position", "sim", "realized"])?;
                let lin = LinearMoment {
                    id: lo.string("id")?,
                    world: id.clone(),
                    position: lo.int("position")?,
                    container_sim: lo.string("sim")?,
                    realized: match lo.opt("realized") {
                        Some((r, rpath)) => Some(quanta_string(r, rpath)?),
                        None => None,
                    },
                };
                lins.push(lin.id.clone());
                insert_unique(&mut m.linear_moments, lin.id.clone(), lin, &lpath)?;
            }
            let world = World { id: id.clone(), linear_moments: lins, accessible: o.ids("accessible")? };
            insert_unique(&mut m.worlds, id, world, &path)?;
        }

        for (s, path) in root.array("simMoments")? {
            let o = Obj::new(s, path.clone(), &["id", "position", "beliefStates", "assembly", "activeRules"])?;
            let (a, apath) = o.get("assembly")?;
            let sim = SimultaneousMoment {
                id: o.string("id")?,
                position: o.int("position")?,
                belief_states: o.ids("beliefStates")?,
                assembly: assembly(a, apath)?,
                active_rules: o.ids("activeRules")?,
            };
            insert_unique(&mut m.sim_moments, sim.id.clone(), sim, &path)?;
        }

        for (b, path) in root.array("beliefStates")? {
            let o = Obj::new(b, path.clone(), &["id", "sim", "target", "tower", "preBelief"])?;
            let id = o.string("id")?;
            let mut tower = Vec::new();
            for (d, dpath) in o.array("tower")? {
                let d = Obj::new(d, dpath, &["level", "rules", "minimal", "maximal"])?;
                tower.push(DeterminationSet {
                    level: u32::try_from(d.uint("level")?).or_else(|_| malformed(&d.sub("level"), "too large"))?,
                    rules: d.ids("rules")?,
                    minimal: d.ids("minimal")?,
                    maximal: d.ids("maximal")?,
                });
            }
            tower.sort_by_key(|d| d.level);
            let mut pre = Vec::new();
            for (p, ppath) in o.array("preBelief")? {
                let po = Obj::new(p, ppath.clone(), &["id", "position", "hypothetical", "snapshot"])?;
                let (snap, spath) = po.get("snapshot")?;
                let so = Obj::new(snap, spath, &["assembly", "activeRules"])?;
                let (a, apath) = so.get("assembly")?;
                let moment = PreBeliefMoment {
                    id: po.string("id")?,
                    owner: id.clone(),
                    position: po.int("position")?,
                    hypothetical: po.quanta("hypothetical")?,
                    snapshot: SimSnapshot { assembly: assembly(a, apath)?, active_rules: so.ids("activeRules")? },
                };
                pre.push((moment.position, moment.id.clone()));
                insert_unique(&mut m.pre_belief_moments, moment.id.clone(), moment, &ppath)?;
            }
            pre.sort();
            let belief = BeliefState {
                id: id.clone(),
                sim: o.string("sim")?,
                target: o.quanta("target")?,
                tower,
                pre_belief: pre.into_iter().map(|(_, id)| id).collect(),
            };
            insert_unique(&mut m.belief_states, id, belief, &path)?;
        }

        for (c, path) in root.opt_array("concepts")? {
            let o = Obj::new(c, path.clone(), &["id", "input", "output"])?;
            let concept = Concept { id: o.string("id")?, input: o.quanta("input")?, output: o.quanta("output")? };
            insert_unique(&mut m.concepts, concept.id.clone(), concept, &path)?;
        }

        for (t, path) in root.opt_array("takingFunctions")? {
            let o = Obj::new(t, path.clone(), &["id", "pairs"])?;
            let mut pairs = Vec::new();
            for (p, ppath) in o.array("pairs")? {
                let p = Obj::new(p, ppath, &["sourcePosition", "source", "targetPosition", "target"])?;
                pairs.push(TakingPair {
                    source_position: p.int("sourcePosition")?,
                    source: p.quanta("source")?,
                    target_position: p.int("targetPosition")?,
                    target: p.quanta("target")?,
                });
            }
            let t = TakingFunction { id: o.string("id")?, pairs };
            insert_unique(&mut m.taking_functions, t.id.clone(), t, &path)?;
        }

        for (f, path) in root.opt_array("formingFunctions")? {
            let o = Obj::new(f, path.clone(), &["id", "takingSource", "pairs"])?;
            let mut pairs = Vec::new();
            for (p, ppath) in o.array("pairs")? {
                let p = Obj::new(p, ppath, &["input", "output"])?;
                pairs.push(FormingPair { input: p.quanta("input")?, output: p.quanta("output")? });
            }
            let f = FormingFunction { id: o.string("id")?, taking_source: o.string("takingSource")?, pairs };
            insert_unique(&mut m.forming_functions, f.id.clone(), f, &path)?;
        }

        for (r, path) in root.array("rules")? {
            let o = Obj::new(r, path.clone(), &["id", "predicate"])?;
            let predicate = match o.opt("predicate") {
                None => None,
                Some((p, ppath)) => Some(
                    as_array(p, &ppath)?
                        .into_iter()
                        .map(|(a, apath)| rule_atom(a, apath))
                        .collect::<Res<Vec<_>>>()?,
                ),
            };
            let rule = Rule { id: o.string("id")?, predicate };
            insert_unique(&mut m.rules, rule.id.clone(), rule, &path)?;
        }

        let (val, vpath) = root.get("valuation")?;
        let Some(val) = val.as_object() else {
            return malformed(&vpath, "expected an object");
        };
        for (atom, p) in val {
            m.valuation.insert(atom.clone(), pattern(p, &format!("{vpath}.{atom}"))?);
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------- save

fn qs_value(s: &QuantaString) -> Value {
    json!({
        "items": s.items.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
        "chained": s.chained,
    })
}

fn pattern_value(p: &QuantaPattern) -> Value {
    Value::from(p.elements.iter().map(|e| e.to_string()).collect::<Vec<_>>())
}

fn ids_value<'a>(ids: impl IntoIterator<Item = &'a Id>) -> Value {
    let mut v: Vec<&Id> = ids.into_iter().collect();
    v.sort();
    Value::from(v.into_iter().cloned().collect::<Vec<_>>())
}

fn assembly_value(a: &VolitionalAssembly) -> Value {
    let mut fs: Vec<&VolitionalFunction> = a.functions.iter().collect();
    fs.sort_by(|x, y| (x.order, &x.id).cmp(&(y.order, &y.id)));
    Value::from(
        fs.into_iter()
            .map(|f| {
                let mut o = json!({ "id": f.id, "order": f.order, "output": qs_value(&f.output) });
                match &f.args {
                    FunctionArgs::Children(c) => o["children"] = Value::from(c.clone()),
                    FunctionArgs::Concepts(args) => {
                        o["args"] = Value::from(
                            args.iter()
                                .map(|a| json!({ "concept": a.concept, "string": qs_value(&a.string) }))
                                .collect::<Vec<_>>(),
                        )
                    }
                }
                o
            })
            .collect::<Vec<_>>(),
    )
}

fn rule_atom_value(a: &RuleAtom) -> Value {
    match a {
        RuleAtom::Arity { function, n } => json!({ "atom": "arity", "function": function, "n": n }),
        RuleAtom::UsesConcept { function, concept } => {
            json!({ "atom": "uses-concept", "function": function, "concept": concept })
        }
        RuleAtom::OutputMatches { function, pattern } => {
            json!({ "atom": "output-matches", "function": function, "pattern": pattern_value(pattern) })
        }
        RuleAtom::ArgMatches { function, slot, pattern } => json!({
            "atom": "arg-matches", "function": function, "slot": slot, "pattern": pattern_value(pattern)
        }),
        RuleAtom::OrderedBefore { a, b } => json!({ "atom": "ordered-before", "a": a, "b": b }),
    }
}

/// Canonical JSON text of a model, ending in a newline.
pub fn save(model: &Model) -> String {
    let mut text = serde_json::to_string_pretty(&to_value(model)).expect("json values serialize");
    text.push('\n');
    text
}

pub fn to_value(m: &Model) -> Value {
    let worlds: Vec<Value> = m
        .worlds
        .values()
        .map(|w| {
            let mut lins: Vec<&LinearMoment> = w.linear_moments.iter().filter_map(|id| m.lin(id)).collect();
            lins.sort_by(|a, b| (a.position, &a.id).cmp(&(b.position, &b.id)));
            let lins: Vec<Value> = lins
                .into_iter()
                .map(|l| {
                    let mut o = json!({ "id": l.id, "position": l.position, "sim": l.container_sim });
                    if let Some(r) = &l.realized {
                        o["realized"] = qs_value(r);
                    }
                    o
                })
                .collect();
            json!({ "id": w.id, "accessible": ids_value(&w.accessible), "linearMoments": lins })
        })
        .collect();

    let mut sims: Vec<&SimultaneousMoment> = m.sim_moments.values().collect();
    sims.sort_by(|a, b| (a.position, &a.id).cmp(&(b.position, &b.id)));
    let sims: Vec<Value> = sims
        .into_iter()
        .map(|s| {
            json!({
                "id": s.id,
                "position": s.position,
                "beliefStates": ids_value(&s.belief_states),
                "assembly": assembly_value(&s.assembly),
                "activeRules": ids_value(&s.active_rules),
            })
        })
        .collect();

    let beliefs: Vec<Value> = m
        .belief_states
        .values()
        .map(|b| {
            let mut tower: Vec<&DeterminationSet> = b.tower.iter().collect();
            tower.sort_by_key(|d| d.level);
            let tower: Vec<Value> = tower
                .into_iter()
                .map(|d| {
                    json!({
                        "level": d.level,
                        "rules": ids_value(&d.rules),
                        "minimal": ids_value(&d.minimal),
                        "maximal": ids_value(&d.maximal),
                    })
                })
                .collect();
            let mut pre: Vec<&PreBeliefMoment> = b.pre_belief.iter().filter_map(|id| m.pre_belief(id)).collect();
            pre.sort_by(|x, y| (x.position, &x.id).cmp(&(y.position, &y.id)));
            let pre: Vec<Value> = pre
                .into_iter()
                .map(|p| {
                    json!({
                        "id": p.id,
                        "position": p.position,
                        "hypothetical": qs_value(&p.hypothetical),
                        "snapshot": {
                            "assembly": assembly_value(&p.snapshot.assembly),
                            "activeRules": ids_value(&p.snapshot.active_rules),
                        },
                    })
                })
                .collect();
            json!({
                "id": b.id,
                "sim": b.sim,
                "target": qs_value(&b.target),
                "tower": tower,
                "preBelief": pre,
            })
        })
        .collect();

    let concepts: Vec<Value> = m
        .concepts
        .values()
        .map(|c| json!({ "id": c.id, "input": qs_value(&c.input), "output": qs_value(&c.output) }))
        .collect();
    let taking: Vec<Value> = m
        .taking_functions
        .values()
        .map(|t| {
            let pairs: Vec<Value> = t
                .pairs
                .iter()
                .map(|p| {
                    json!({
                        "sourcePosition": p.source_position,
                        "source": qs_value(&p.source),
                        "targetPosition": p.target_position,
                        "target": qs_value(&p.target),
                    })
                })
                .collect();
            json!({ "id": t.id, "pairs": pairs })
        })
        .collect();
    let forming: Vec<Value> = m
        .forming_functions
        .values()
        .map(|f| {
            let pairs: Vec<Value> = f
                .pairs
                .iter()
                .map(|p| json!({ "input": qs_value(&p.input), "output": qs_value(&p.output) }))
                .collect();
            json!({ "id": f.id, "takingSource": f.taking_source, "pairs": pairs })
        })
        .collect();
    let rules: Vec<Value> = m
        .rules
        .values()
        .map(|r| {
            let mut o = json!({ "id": r.id });
            if let Some(p) = &r.predicate {
                o["predicate"] = Value::from(p.iter().map(rule_atom_value).collect::<Vec<_>>());
            }
            o
        })
        .collect();
    let valuation: Map<String, Value> = m
        .valuation
        .iter()
        .map(|(a, p)| (a.clone(), pattern_value(p)))
        .collect();

    json!({
        "formatVersion": FORMAT_VERSION,
        "worlds": worlds,
        "simMoments": sims,
        "beliefStates": beliefs,
        "concepts": concepts,
        "takingFunctions": taking,
        "formingFunctions": forming,
        "rules": rules,
        "valuation": valuation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_worlds_reports_path() {
        let err = read(r#"{"formatVersion": "pqg-1", "simMoments": []}"#).unwrap_err();
        assert_eq!(
            err,
            FormatError::Malformed { path: "$.worlds".into(), message: "missing key".into() }
        );
    }

    #[test]
    fn rejects_bad_codes_and_versions() {
        let err = read(r#"{"formatVersion": "pqg-0"}"#).unwrap_err();
        assert!(matches!(err, FormatError::Malformed { ref path, .. } if path == "$.formatVersion"));
        let err = read("not json").unwrap_err();
        assert!(matches!(err, FormatError::Malformed { ref path, .. } if path == "$"));
    }

    #[test]
    fn empty_model_round_trips_but_fails_validation() {
        let m = Model::default();
        let text = save(&m);
        assert!(text.ends_with("}\n"));
        assert_eq!(read(&text).unwrap(), m);
        match load(&text) {
            Err(FormatError::Validation(r)) => assert!(r.mentions(crate::validate::W_NONEMPTY)),
            other => panic!("{other:?}"),
        }
    }
}
