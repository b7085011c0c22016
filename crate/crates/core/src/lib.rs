//! Counterfactuals over branching time: formulas, models, evaluation,
//! soundness checking and generators.

pub mod axioms;
pub mod counterexample;
pub mod dot;
pub mod formula;
pub mod generators;
pub mod model;
pub mod parser;
pub mod schema;
pub mod semantics;

pub use formula::Formula;
pub use model::{
    load_model, save_model, validate, BtModel, History, HistoryId, MomentId, Point, Policy,
    SimilarityOrder, ValidationReport,
};
pub use parser::{parse, ParseError};
pub use schema::{AxiomSchema, Substitution};
pub use semantics::{eval, explain, valid_in_model, EvalError, Evaluator, Verdict};
