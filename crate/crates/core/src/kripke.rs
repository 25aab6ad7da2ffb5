//! A plain relational evaluator for belief and knowledge, used as the
//! baseline in the closure contrast.
//!
//! `B φ` holds at `w` when φ holds at every successor of `w`; `K φ` also
//! needs φ at `w` itself.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};
use thiserror::Error;

use crate::formula::{Formula, Instantiation, Op, Schema};
use crate::search::{
    report_json_value, run_entry, suite_schemas, AuditEntry, Bounds, Classification, MainChecker,
    SearchError, Suite, VALIDITY_NOTE,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    pub worlds: usize,
    pub relation: BTreeSet<(usize, usize)>,
    pub valuation: BTreeMap<String, BTreeSet<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("`{0}` has no relational reading")]
    OutOfFragment(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("no world {0}")]
    NoWorld(usize),
}

impl KripkeModel {
    pub fn successors(&self, w: usize) -> impl Iterator<Item = usize> + '_ {
        self.relation.range((w, 0)..(w + 1, 0)).map(|&(_, v)| v)
    }

    pub fn to_value(&self) -> Value {
        json!({
            "worlds": self.worlds,
            "relation": self.relation.iter().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
            "valuation": self.valuation,
        })
    }
}

/// Only atoms, booleans, B and K have a relational reading here.
pub fn in_kripke_fragment(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => true,
        Formula::Unary(op, x) => matches!(op, Op::Not | Op::Bel | Op::Know) && in_kripke_fragment(x),
        Formula::Binary(_, a, b) => in_kripke_fragment(a) && in_kripke_fragment(b),
    }
}

pub fn eval_kripke(km: &KripkeModel, w: usize, f: &Formula) -> Result<bool, KripkeError> {
    if w >= km.worlds {
        return Err(KripkeError::NoWorld(w));
    }
    Ok(match f {
        Formula::Atom(a) => km
            .valuation
            .get(a)
            .ok_or_else(|| KripkeError::UnknownAtom(a.clone()))?
            .contains(&w),
        Formula::Binary(c, a, b) => c.apply(eval_kripke(km, w, a)?, eval_kripke(km, w, b)?),
        Formula::Unary(Op::Not, x) => !eval_kripke(km, w, x)?,
        Formula::Unary(op @ (Op::Bel | Op::Know), x) => {
            for v in km.successors(w) {
                if !eval_kripke(km, v, x)? {
                    return Ok(false);
                }
            }
            *op == Op::Bel || eval_kripke(km, w, x)?
        }
        Formula::Unary(..) => return Err(KripkeError::OutOfFragment(f.to_string())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KripkeBounds {
    pub max_worlds: usize,
    pub atoms: usize,
}

pub const CONTRAST_KRIPKE_BOUNDS: KripkeBounds = KripkeBounds { max_worlds: 3, atoms: 2 };

/// Every relation over 1..=max_worlds worlds with every valuation of atoms
/// `a1..`, ordered by world count, relation bits, then valuation bits.
pub fn enumerate_kripke(bounds: KripkeBounds) -> impl Iterator<Item = KripkeModel> {
    let atoms: Vec<String> = (1..=bounds.atoms).map(|j| format!("a{j}")).collect();
    (1..=bounds.max_worlds).flat_map(move |n| {
        let atoms = atoms.clone();
        (0u64..1 << (n * n)).flat_map(move |rel| {
            let atoms = atoms.clone();
            (0u64..1 << (n * atoms.len())).map(move |val| {
                let relation = (0..n * n).filter(|i| rel >> i & 1 == 1).map(|i| (i / n, i % n)).collect();
                let valuation = atoms
                    .iter()
                    .enumerate()
                    .map(|(j, a)| (a.clone(), (0..n).filter(|w| val >> (j * n + w) & 1 == 1).collect()))
                    .collect();
                KripkeModel { worlds: n, relation, valuation }
            })
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeWitness {
    pub model_number: u64,
    pub model: KripkeModel,
    pub world: usize,
    pub instantiation: Instantiation,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeEntry {
    pub classification: Classification,
    pub models_checked: u64,
    pub witness: Option<KripkeWitness>,
}

/// Searches the relational models for a world falsifying the schema.
pub fn kripke_search(schema: &Schema, bounds: KripkeBounds) -> Result<KripkeEntry, KripkeError> {
    if !in_kripke_fragment(&schema.template) {
        return Ok(KripkeEntry { classification: Classification::NotApplicable, models_checked: 0, witness: None });
    }
    let atoms: Vec<String> = (1..=bounds.atoms).map(|j| format!("a{j}")).collect();
    let atom_refs: Vec<&str> = atoms.iter().map(String::as_str).collect();
    let insts = schema.instantiations(&atom_refs);
    let formulas: Vec<Formula> = insts.iter().map(|i| schema.instantiate(i)).collect();
    let mut checked = 0;
    for (number, km) in enumerate_kripke(bounds).enumerate() {
        checked += 1;
        for w in 0..km.worlds {
            for (inst, f) in insts.iter().zip(&formulas) {
                if !eval_kripke(&km, w, f)? {
                    return Ok(KripkeEntry {
                        classification: Classification::Refuted,
                        models_checked: checked,
                        witness: Some(KripkeWitness {
                            model_number: number as u64,
                            model: km,
                            world: w,
                            instantiation: inst.clone(),
                            formula: f.clone(),
                        }),
                    });
                }
            }
        }
    }
    Ok(KripkeEntry { classification: Classification::ValidOverBounds, models_checked: checked, witness: None })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContrastRow {
    pub pqg: AuditEntry,
    pub kripke: KripkeEntry,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContrastReport {
    pub bounds: Bounds,
    pub kripke_bounds: KripkeBounds,
    pub rows: Vec<ContrastRow>,
}

impl ContrastReport {
    pub fn row(&self, name: &str) -> Option<&ContrastRow> {
        self.rows.iter().find(|r| r.pqg.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContrastError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

/// Classifies the closure schemas, plus two pure-belief closure schemas,
/// under both semantics.
pub fn closure_contrast_report(bounds: &Bounds) -> Result<ContrastReport, ContrastError> {
    let mut rows = Vec::new();
    for s in suite_schemas(Suite::Contrast) {
        let pqg = run_entry(&s, bounds, &MainChecker::default())?;
        let schema = Schema::parse(s.text).map_err(SearchError::from)?;
        let kripke = kripke_search(&schema, CONTRAST_KRIPKE_BOUNDS)?;
        rows.push(ContrastRow { pqg, kripke });
    }
    Ok(ContrastReport { bounds: *bounds, kripke_bounds: CONTRAST_KRIPKE_BOUNDS, rows })
}

fn kripke_entry_value(e: &KripkeEntry) -> Value {
    json!({
        "classification": e.classification.name(),
        "modelsChecked": e.models_checked,
        "witness": e.witness.as_ref().map_or(Value::Null, |w| json!({
            "modelNumber": w.model_number,
            "world": w.world,
            "instantiation": w.instantiation,
            "formula": w.formula.to_string(),
            "model": w.model.to_value(),
        })),
    })
}

pub fn contrast_json(r: &ContrastReport) -> String {
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|row| {
            let mut pqg = report_json_value(&row.pqg);
            let obj = pqg.as_object_mut().expect("entry object");
            let name = obj.remove("name").unwrap_or(Value::Null);
            let schema = obj.remove("schema").unwrap_or(Value::Null);
            json!({ "name": name, "schema": schema, "pqg": pqg, "kripke": kripke_entry_value(&row.kripke) })
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&json!({
        "suite": "contrast",
        "note": VALIDITY_NOTE,
        "bounds": r.bounds,
        "kripkeBounds": { "maxWorlds": r.kripke_bounds.max_worlds, "atoms": r.kripke_bounds.atoms },
        "seed": 0,
        "entries": rows,
    }))
    .expect("json values serialize");
    text.push('\n');
    text
}
