//! External sources: oracle functions, their declared properties, and the
//! registry that resolves external atoms by name.

mod assignment;
pub mod builtins;
mod properties;
mod registry;
mod source;

pub use assignment::{Assignment, Truth};
pub use properties::{merge_properties, ExtSourceProperties};
pub use registry::Registry;
pub use source::{
    default_grounding_superset, evaluate, evaluate_with, input_predicates, Evaluation, ExternalSource, FnSource,
    InputKind, Tuple, Unknown,
};

use thiserror::Error;

use crate::syntax::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtError {
    #[error("&{source_name}: functional source returned several outputs for inputs {inputs:?}: {outputs:?}")]
    FunctionalityViolation {
        source_name: String,
        inputs: Vec<Term>,
        outputs: Vec<Tuple>,
    },
    #[error("&{source_name}: signature mismatch: {detail}")]
    SignatureMismatch { source_name: String, detail: String },
    #[error("&{source_name}: output tuple {tuple:?} does not have arity {expected}")]
    OutputArity {
        source_name: String,
        expected: usize,
        tuple: Tuple,
    },
    #[error("&{source_name}: integer overflow")]
    Overflow { source_name: String },
    #[error("&{source_name}: {message}")]
    Io { source_name: String, message: String },
    #[error("&{source_name}: {message}")]
    Custom { source_name: String, message: String },
}
