//! Audit suites: fixed schema lists searched at given bounds, reported as
//! canonical JSON.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::format::to_value;
use crate::formula::Schema;
use crate::model::{Index, ValidModel};
use crate::semantics::Evaluator;

use super::{enumerate_models, find_countermodel_with, pool, Bounds, Checker, MainChecker, SearchError, Witness};

pub const VALIDITY_NOTE: &str = "valid-over-bounds is not a validity proof";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Axioms,
    Principles,
    Closure,
    Contrast,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Axioms, Suite::Principles, Suite::Closure, Suite::Contrast];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Principles => "principles",
            Suite::Closure => "closure",
            Suite::Contrast => "contrast",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected axioms, principles, closure or contrast)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSchema {
    pub name: &'static str,
    pub text: &'static str,
}

const fn entry(name: &'static str, text: &'static str) -> SuiteSchema {
    SuiteSchema { name, text }
}

const AXIOMS: &[SuiteSchema] = &[
    entry("K", "K(phi -> psi) -> (K phi -> K psi)"),
    entry("T", "K phi -> phi"),
    entry("M", "K(phi & psi) -> K phi & K psi"),
    entry("C", "K phi & K psi -> K(phi & psi)"),
];

const PRINCIPLES: &[SuiteSchema] = &[
    entry("psy-necessity-to-belief-or-knowledge", "[s] phi -> B phi | K phi"),
    entry("psy-possibility-excludes-belief-and-knowledge", "<s> phi -> ~(B phi | K phi)"),
    entry("belief-or-knowledge-to-psy-necessity", "B phi | K phi -> [s] phi"),
    entry("psy-necessity-to-accepted-belief", "[s] phi -> B phi"),
    entry("meta-belief-descent", "Bm[1] phi -> B phi"),
    entry("meta-knowledge-descent", "Km[1] phi -> K phi"),
];

/// Principles left out of the suite, with the reason.
const EXCLUDED: &[(&str, &str)] = &[(
    "psy-necessity-of-belief-to-n",
    "mixes object and meta notation; the N operator is never defined",
)];

const CLOSURE: &[SuiteSchema] = &[
    entry("known-implication", "K phi & K(phi -> psi) -> K psi"),
    entry("known-implication-to-pre-belief", "K phi & K(phi -> psi) -> P psi"),
    entry("conjunction-to-pre-belief", "K(phi & psi) -> P phi"),
    entry("conjunction-elimination", "K(phi & psi) -> K phi"),
    entry("belief-to-known-disjunction", "B phi -> K(phi | psi)"),
    entry("disjunction-introduction", "K phi -> K(phi | psi)"),
    entry("belief-complex", "K phi & K(phi <-> psi) -> K psi"),
];

const CONTRAST_EXTRA: &[SuiteSchema] = &[
    entry("belief-closure", "B phi & B(phi -> psi) -> B psi"),
    entry("belief-conjunction-elimination", "B(phi & psi) -> B phi"),
];

pub fn suite_schemas(suite: Suite) -> Vec<SuiteSchema> {
    match suite {
        Suite::Axioms => AXIOMS.to_vec(),
        Suite::Principles => PRINCIPLES.to_vec(),
        Suite::Closure => CLOSURE.to_vec(),
        Suite::Contrast => CLOSURE.iter().chain(CONTRAST_EXTRA).copied().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Classification {
    ValidOverBounds,
    Refuted,
    NotApplicable,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::ValidOverBounds => "valid-over-bounds",
            Classification::Refuted => "refuted",
            Classification::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditEntry {
    pub name: String,
    pub schema: String,
    pub classification: Classification,
    pub models_checked: u64,
    pub witness: Option<Witness>,
}

/// Where the material reading of `B p -> B q` and the paired-belief
/// condition disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedBeliefDivergence {
    pub cases_checked: u64,
    pub divergences: u64,
    /// (model number, index, p, q, material value, condition value)
    pub first: Option<(u64, Index, String, String, bool, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub suite: Suite,
    pub bounds: Bounds,
    pub seed: u64,
    pub entries: Vec<AuditEntry>,
    pub excluded: Vec<(String, String)>,
    pub paired_belief: Option<PairedBeliefDivergence>,
}

impl AuditReport {
    pub fn entry(&self, name: &str) -> Option<&AuditEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

pub(crate) fn run_entry<C: Checker>(s: &SuiteSchema, bounds: &Bounds, checker: &C) -> Result<AuditEntry, SearchError> {
    let schema = Schema::parse(s.text)?;
    let outcome = find_countermodel_with(&schema, bounds, checker)?;
    Ok(AuditEntry {
        name: s.name.to_string(),
        schema: s.text.to_string(),
        classification: if outcome.witness.is_some() { Classification::Refuted } else { Classification::ValidOverBounds },
        models_checked: outcome.models_checked,
        witness: outcome.witness,
    })
}

/// Runs a PQG suite with the crate's evaluator. The contrast suite lives
/// in the Kripke module.
pub fn audit_suite(suite: Suite, bounds: &Bounds) -> Result<AuditReport, SearchError> {
    audit_suite_with(suite, bounds, &MainChecker::default())
}

pub fn audit_suite_with<C: Checker>(suite: Suite, bounds: &Bounds, checker: &C) -> Result<AuditReport, SearchError> {
    let entries = suite_schemas(suite)
        .iter()
        .map(|s| run_entry(s, bounds, checker))
        .collect::<Result<Vec<_>, _>>()?;
    let principles = suite == Suite::Principles;
    Ok(AuditReport {
        suite,
        bounds: *bounds,
        seed: 0,
        entries,
        excluded: if principles {
            EXCLUDED.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
        } else {
            Vec::new()
        },
        paired_belief: if principles { Some(paired_belief_divergence(bounds)?) } else { None },
    })
}

/// Compares `B p -> B q` with the paired-belief condition at every index
/// and ordered atom pair of the enumeration.
pub fn paired_belief_divergence(bounds: &Bounds) -> Result<PairedBeliefDivergence, SearchError> {
    bounds.check()?;
    type Local = (u64, u64, Option<(u64, Index, String, String, bool, bool)>);
    let scan = |number: u64, model: &ValidModel| -> Result<Local, String> {
        let ev = Evaluator::new(model);
        let atoms: Vec<&str> = model.atoms().collect();
        let (mut checked, mut diverging, mut first) = (0, 0, None);
        for idx in model.indexes() {
            for p in &atoms {
                for q in &atoms {
                    let bp = ev.eval_belief(&idx, &crate::formula::Formula::atom(*p)).map_err(|e| e.to_string())?;
                    let bq = ev.eval_belief(&idx, &crate::formula::Formula::atom(*q)).map_err(|e| e.to_string())?;
                    let material = !bp || bq;
                    let condition = ev.paired_belief_condition(&idx, p, q).map_err(|e| e.to_string())?;
                    checked += 1;
                    if material != condition {
                        diverging += 1;
                        if first.is_none() {
                            first = Some((number, idx.clone(), p.to_string(), q.to_string(), material, condition));
                        }
                    }
                }
            }
        }
        Ok((checked, diverging, first))
    };
    let mut models = enumerate_models(bounds);
    let mut total = PairedBeliefDivergence { cases_checked: 0, divergences: 0, first: None };
    let mut number = 0u64;
    loop {
        let batch: Vec<ValidModel> = models.by_ref().take(256).collect();
        if batch.is_empty() {
            return Ok(total);
        }
        let base = number;
        let results: Vec<Result<Local, String>> = pool().install(|| {
            batch
                .par_iter()
                .enumerate()
                .map(|(i, m)| scan(base + i as u64, m))
                .collect()
        });
        for r in results {
            let (c, d, f) = r.map_err(|message| SearchError::Eval { model_number: number, message })?;
            total.cases_checked += c;
            total.divergences += d;
            if total.first.is_none() {
                total.first = f;
            }
            number += 1;
        }
    }
}

pub(crate) fn witness_value(w: &Witness) -> Value {
    json!({
        "modelNumber": w.model_number,
        "index": w.index.to_string(),
        "instantiation": w.instantiation,
        "formula": w.formula.to_string(),
        "model": to_value(&w.model),
    })
}

pub fn entry_value(e: &AuditEntry) -> Value {
    json!({
        "name": e.name,
        "schema": e.schema,
        "classification": e.classification.name(),
        "modelsChecked": e.models_checked,
        "witness": e.witness.as_ref().map_or(Value::Null, witness_value),
    })
}

pub(crate) fn canonical_text(v: &Value) -> String {
    let mut text = serde_json::to_string_pretty(v).expect("json values serialize");
    text.push('\n');
    text
}

/// Canonical JSON text of a report.
pub fn report_json(r: &AuditReport) -> String {
    let mut o = Map::new();
    o.insert("suite".into(), json!(r.suite.name()));
    o.insert("note".into(), json!(VALIDITY_NOTE));
    o.insert("bounds".into(), json!(r.bounds));
    o.insert("seed".into(), json!(r.seed));
    o.insert("entries".into(), Value::from(r.entries.iter().map(entry_value).collect::<Vec<_>>()));
    if !r.excluded.is_empty() {
        let ex: Vec<Value> = r.excluded.iter().map(|(n, why)| json!({ "name": n, "reason": why })).collect();
        o.insert("excluded".into(), Value::from(ex));
    }
    if let Some(paired) = &r.paired_belief {
        let first = paired.first.as_ref().map_or(Value::Null, |(n, idx, p, q, material, condition)| {
            json!({
                "modelNumber": n,
                "index": idx.to_string(),
                "p": p,
                "q": q,
                "material": material,
                "condition": condition,
            })
        });
        o.insert(
            "pairedBelief".into(),
            json!({ "casesChecked": paired.cases_checked, "divergences": paired.divergences, "first": first }),
        );
    }
    canonical_text(&Value::Object(o))
}
