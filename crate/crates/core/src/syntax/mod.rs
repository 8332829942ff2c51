//! Program text frontend.
//!
//! Surface syntax follows common ASP conventions: `:-` separates head and
//! body, `not`/`naf` negate, `v` or `|` separate disjuncts, `%` starts a
//! line comment. External atoms are written `&name[in,...](out,...)` and may
//! carry a property tag `<prop param ..., ...>` right after them.

mod ast;
mod lexer;
mod parser;

pub use ast::*;
pub use parser::{parse_program, validate_property};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("arity clash at {line}:{column}: predicate '{predicate}' used with arity {found}, previously {expected}")]
    ArityClash {
        predicate: String,
        expected: usize,
        found: usize,
        line: usize,
        column: usize,
    },
    #[error("malformed property tag at {line}:{column}: '{token}': {reason}")]
    MalformedPropertyTag {
        token: String,
        reason: String,
        line: usize,
        column: usize,
    },
}

/// Renders a program back to text accepted by [`parse_program`].
pub fn unparse(program: &Program) -> String {
    program.to_string()
}
