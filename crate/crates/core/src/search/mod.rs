//! Bounded countermodel search.
//!
//! Models come from [`enumerate_models`], a fixed-order stream over a
//! canonical sub-class, or from the seeded [`random_model`] generator.
//! Searches evaluate batches in parallel but always report the first
//! witness in stream order.

mod audit;
mod enumerate;
mod random;

use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::formula::{Formula, Instantiation, Schema, SchemaError};
use crate::model::{Index, ValidModel};
use crate::semantics::{EvalOptions, Evaluator};

pub(crate) use audit::run_entry;
pub use audit::{
    audit_suite, audit_suite_with, paired_belief_divergence, entry_value as report_json_value, report_json,
    suite_schemas, AuditEntry, AuditReport, PairedBeliefDivergence, Classification, Suite, SuiteSchema,
    VALIDITY_NOTE,
};
pub use enumerate::{canonical_atoms, enumerate_models, Enumeration};
pub use random::{random_evaluable_formula, random_formula, random_model, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Bounds {
    pub max_worlds: u32,
    pub max_sim_moments: u32,
    pub max_belief_states_per_sim: u32,
    pub max_rules: u32,
    pub max_atoms: u32,
    pub max_quanta_per_string: u32,
    pub max_tower_depth: u32,
}

pub const DEFAULT_AUDIT_BOUNDS: Bounds = Bounds {
    max_worlds: 1,
    max_sim_moments: 3,
    max_belief_states_per_sim: 2,
    max_rules: 3,
    max_atoms: 2,
    max_quanta_per_string: 2,
    max_tower_depth: 2,
};

impl Default for Bounds {
    fn default() -> Self {
        DEFAULT_AUDIT_BOUNDS
    }
}

impl Bounds {
    pub fn all(n: u32) -> Self {
        Bounds {
            max_worlds: n,
            max_sim_moments: n,
            max_belief_states_per_sim: n,
            max_rules: n,
            max_atoms: n,
            max_quanta_per_string: n,
            max_tower_depth: n,
        }
    }

    pub fn check(&self) -> Result<(), SearchError> {
        let fields = [
            ("maxWorlds", self.max_worlds),
            ("maxSimMoments", self.max_sim_moments),
            ("maxBeliefStatesPerSim", self.max_belief_states_per_sim),
            ("maxRules", self.max_rules),
            ("maxAtoms", self.max_atoms),
            ("maxQuantaPerString", self.max_quanta_per_string),
            ("maxTowerDepth", self.max_tower_depth),
        ];
        match fields.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(SearchError::Bounds(format!("{name} must be at least 1"))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "W{} S{} B{} R{} A{} Q{} T{}",
            self.max_worlds,
            self.max_sim_moments,
            self.max_belief_states_per_sim,
            self.max_rules,
            self.max_atoms,
            self.max_quanta_per_string,
            self.max_tower_depth
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("invalid bounds: {0}")]
    Bounds(String),
    #[error("evaluation failed in model {model_number}: {message}")]
    Eval { model_number: u64, message: String },
}

/// A model, index and instantiation at which a schema fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Position of the model in the searched stream, from 0.
    pub model_number: u64,
    pub model: ValidModel,
    pub index: Index,
    pub instantiation: Instantiation,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub witness: Option<Witness>,
    pub models_checked: u64,
}

/// A semantics that can be searched for countermodels.
pub trait Checker: Sync {
    /// The position of the first query that evaluates false.
    fn first_false(&self, model: &ValidModel, queries: &[(Index, Formula)]) -> Result<Option<usize>, String>;
}

/// The crate's evaluator.
#[derive(Debug, Clone, Copy, Default)]
pub struct MainChecker(pub EvalOptions);

impl Checker for MainChecker {
    fn first_false(&self, model: &ValidModel, queries: &[(Index, Formula)]) -> Result<Option<usize>, String> {
        let ev = Evaluator::with_options(model, self.0);
        for (i, (idx, f)) in queries.iter().enumerate() {
            if !ev.evaluate(idx, f).map_err(|e| e.to_string())? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

const BATCH: usize = 256;

fn thread_count() -> usize {
    std::env::var("PQG_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(thread_count())
            .build()
            .expect("thread pool")
    })
}

/// Applies `f` to the stream in parallel batches and returns the first hit
/// in stream order with its position, plus the number of items examined
/// (up to and including the hit).
pub fn first_in_order<I, T, E, F>(items: I, f: F) -> Result<(Option<(u64, I::Item, T)>, u64), E>
where
    I: Iterator,
    I::Item: Send + Sync,
    T: Send,
    E: Send,
    F: Fn(&I::Item) -> Result<Option<T>, E> + Sync,
{
    let mut items = items;
    let mut seen: u64 = 0;
    loop {
        let batch: Vec<I::Item> = items.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            return Ok((None, seen));
        }
        let hit = pool().install(|| {
            batch
                .par_iter()
                .enumerate()
                .find_map_first(|(i, item)| match f(item) {
                    Ok(None) => None,
                    Ok(Some(t)) => Some(Ok((i, t))),
                    Err(e) => Some(Err(e)),
                })
        });
        match hit {
            None => seen += batch.len() as u64,
            Some(Err(e)) => return Err(e),
            Some(Ok((i, t))) => {
                let item = batch.into_iter().nth(i).expect("hit inside batch");
                return Ok((Some((seen + i as u64, item, t)), seen + i as u64 + 1));
            }
        }
    }
}

/// Searches `models` for the first (model, index, instantiation) where the
/// instantiated schema is false. Indexes are visited in model order and,
/// within an index, instantiations in lexicographic order.
pub fn search_models<I, C>(schema: &Schema, models: I, checker: &C) -> Result<SearchOutcome, SearchError>
where
    I: Iterator<Item = ValidModel>,
    C: Checker,
{
    let found = first_in_order(models, |model| {
        let atoms: Vec<&str> = model.atoms().collect();
        let insts = schema.instantiations(&atoms);
        let formulas: Vec<Formula> = insts.iter().map(|i| schema.instantiate(i)).collect();
        let mut queries = Vec::new();
        let mut labels = Vec::new();
        for idx in model.indexes() {
            for (inst, f) in insts.iter().zip(&formulas) {
                queries.push((idx.clone(), f.clone()));
                labels.push(inst);
            }
        }
        Ok::<_, String>(checker.first_false(model, &queries)?.map(|k| {
            let (idx, f) = queries.swap_remove(k);
            (idx, labels[k].clone(), f)
        }))
    });
    match found {
        Ok((hit, models_checked)) => Ok(SearchOutcome {
            witness: hit.map(|(model_number, model, (index, instantiation, formula))| Witness {
                model_number,
                model,
                index,
                instantiation,
                formula,
            }),
            models_checked,
        }),
        Err(message) => Err(SearchError::Eval { model_number: 0, message }),
    }
}

/// The first countermodel to `schema` in the canonical enumeration.
pub fn find_countermodel(schema: &Schema, bounds: &Bounds) -> Result<SearchOutcome, SearchError> {
    find_countermodel_with(schema, bounds, &MainChecker::default())
}

pub fn find_countermodel_with<C: Checker>(
    schema: &Schema,
    bounds: &Bounds,
    checker: &C,
) -> Result<SearchOutcome, SearchError> {
    bounds.check()?;
    search_models(schema, enumerate_models(bounds), checker)
}

/// Searches `samples` random models drawn from seeds `seed, seed+1, ...`.
pub fn find_countermodel_random(
    schema: &Schema,
    bounds: &Bounds,
    seed: u64,
    samples: u64,
) -> Result<SearchOutcome, SearchError> {
    bounds.check()?;
    let b = *bounds;
    let models = (0..samples).map(move |i| random_model(seed.wrapping_add(i), &b));
    search_models(schema, models, &MainChecker::default())
}

/// Evaluates the witness's formula again from scratch.
pub fn reverify(w: &Witness) -> bool {
    matches!(Evaluator::new(&w.model).evaluate(&w.index, &w.formula), Ok(false))
}
