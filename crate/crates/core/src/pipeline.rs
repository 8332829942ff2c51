//! Parse → link → safety → ground → solve, with stage-tagged errors.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::csvio::CsvError;
use crate::extsources::Registry;
use crate::grounder::{ground, GroundError, GroundOptions, GroundProgram};
use crate::safety::{check_safety, SafetyMode, SafetyPlugin, SafetyReport};
use crate::solver::{solve, AnswerSet, SolveError, SolveOptions, Stats};
use crate::syntax::{parse_program, ParseError, Program};
use crate::LinkError;

/// An unsafe verdict, displayed with its hints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unsafe(pub SafetyReport);

impl fmt::Display for Unsafe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.0.mode {
            SafetyMode::Strong => "strongly",
            _ => "liberally",
        };
        write!(f, "program is not {kind} safe")?;
        for h in &self.0.hints {
            write!(f, "\n  {h}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse: {0}")]
    Parse(#[from] ParseError),
    #[error("parse: {path}: {error}")]
    ParseFile { path: String, error: ParseError },
    #[error("link: {0}")]
    Link(#[from] LinkError),
    #[error("safety: {0}")]
    Unsafe(Unsafe),
    #[error("ground: {0}")]
    Ground(#[from] GroundError),
    #[error("solve: {0}")]
    Solve(#[from] SolveError),
    #[error("csv: {0}")]
    Csv(#[from] CsvError),
    #[error("input: {0}")]
    Input(String),
    #[error("plugin: {0}")]
    Plugin(String),
}

impl Error {
    /// Name of the failing pipeline stage.
    pub fn stage(&self) -> &'static str {
        match self {
            Error::Parse(_) | Error::ParseFile { .. } => "parse",
            Error::Link(_) => "link",
            Error::Unsafe(_) => "safety",
            Error::Ground(_) => "ground",
            Error::Solve(_) => "solve",
            Error::Csv(_) => "csv",
            Error::Input(_) => "input",
            Error::Plugin(_) => "plugin",
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub safety: SafetyMode,
    pub ground: GroundOptions,
    pub solve: SolveOptions,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub answer_sets: Vec<AnswerSet>,
    pub stats: Stats,
    pub safety: SafetyReport,
    pub ground: GroundProgram,
}

/// Runs every stage after parsing.
pub fn run_program(
    program: &Program,
    registry: &Registry,
    options: &Options,
    plugins: &[Arc<dyn SafetyPlugin>],
) -> Result<Outcome, Error> {
    registry.link(program)?;
    let safety = check_safety(program, registry, options.safety, plugins)?;
    if !safety.is_safe() {
        return Err(Error::Unsafe(Unsafe(safety)));
    }
    let ground_opts = GroundOptions {
        mode: options.safety,
        ..options.ground
    };
    let g = ground(program, registry, &ground_opts)?;
    let mut solver = solve(&g, options.solve);
    let answer_sets = solver.by_ref().collect::<Result<Vec<_>, _>>()?;
    let stats = *solver.stats();
    drop(solver);
    Ok(Outcome {
        answer_sets,
        stats,
        safety,
        ground: g,
    })
}

pub fn run_text(text: &str, registry: &Registry, options: &Options) -> Result<Outcome, Error> {
    run_program(&parse_program(text)?, registry, options, &[])
}
