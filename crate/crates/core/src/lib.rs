//! Model checking for the percept/qualia/cognition (PQG) logic of belief,
//! knowledge and psychological modality.

pub mod cli;
pub mod fixtures;
pub mod format;
pub mod formula;
pub mod kripke;
pub mod machinery;
pub mod model;
pub mod quanta;
pub mod search;
pub mod semantics;
pub mod validate;

pub use format::{load, save, FormatError};
pub use formula::{parse, Formula, Schema};
pub use model::{Index, Model, ValidModel};
pub use semantics::{evaluate, EvalError, EvalOptions, Evaluator};
pub use validate::{validate_model, ValidationReport};
