//! Answer set solving for programs with external atoms.

pub mod cli;
pub mod csvio;
pub mod extsources;
pub mod grounder;
pub mod learning;
pub mod pipeline;
pub mod safety;
pub mod solver;
pub mod syntax;

pub use pipeline::Error;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkError {
    #[error("external source '&{0}' is not registered")]
    NotFound(String),
    #[error("external source '&{0}' is already registered")]
    DuplicateName(String),
    #[error("&{name}: {detail}")]
    SignatureMismatch { name: String, detail: String },
    #[error("&{name}: expected {expected} output term(s), found {found}")]
    OutputArity {
        name: String,
        expected: usize,
        found: usize,
    },
}
