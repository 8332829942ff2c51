//! Answer-set enumeration for ground programs.
//!
//! Replacement atoms are guessed (`e v ne`), models of the resulting
//! ordinary program are enumerated by backtracking search, and each
//! complete model — a *candidate* — is checked twice: its guesses must
//! agree with the oracles, and it must be a subset-minimal model of its FLP
//! reduct. Unfounded sets are left entirely to the second check.

mod check;
mod encode;
mod engine;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

pub use check::{compatibility_check, flp_check, Compatibility};
pub use encode::{encode, ne_atom, Encoding};
pub use engine::{Engine, Lit, Propagation, SearchState, Var};

use crate::extsources::ExtError;
use crate::grounder::GroundProgram;
use crate::learning::{MinimizeOptions, Nogood};
use crate::syntax::Atom;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    External(#[from] ExtError),
    #[error("minimality check over {atoms} atoms exceeds the cap of {cap} and the search fallback is disabled")]
    CheckExplosion { atoms: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub io_learning: bool,
    pub minimize: MinimizeOptions,
    /// Largest number of non-fact true atoms the subset enumeration is
    /// allowed to handle.
    pub flp_cap: usize,
    /// Allow the search-based minimality check. When set, it also replaces
    /// enumeration above `flp_search_above` atoms; when unset, enumeration
    /// is used up to `flp_cap` and larger candidates are an error.
    pub flp_fallback: bool,
    pub flp_search_above: usize,
    pub max_answer_sets: Option<usize>,
}

impl SolveOptions {
    fn minimize_enabled(&self) -> bool {
        self.minimize != MinimizeOptions::NONE
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            io_learning: true,
            minimize: MinimizeOptions::ALL,
            flp_cap: 24,
            flp_fallback: true,
            flp_search_above: 8,
            max_answer_sets: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    /// Oracle calls, including those made by minimization and FLP checks.
    pub external_evaluations: usize,
    /// Complete models that reached the compatibility check.
    pub candidates: usize,
    /// Distinct io-nogoods added to the store.
    pub learned_nogoods: usize,
    pub flp_checks: usize,
    pub answer_sets: usize,
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "answer_sets: {}", self.answer_sets)?;
        writeln!(f, "candidates: {}", self.candidates)?;
        writeln!(f, "external_evaluations: {}", self.external_evaluations)?;
        writeln!(f, "learned_nogoods: {}", self.learned_nogoods)?;
        write!(f, "flp_checks: {}", self.flp_checks)
    }
}

/// True ordinary atoms of an accepted candidate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AnswerSet(pub BTreeSet<Atom>);

impl AnswerSet {
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.0.contains(a)
    }

    /// Atoms over `pred`, in order.
    pub fn extension<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = &'a Atom> + 'a {
        self.0.iter().filter(move |a| a.predicate == pred)
    }
}

impl fmt::Display for AnswerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Lazy answer-set enumeration; see the module docs.
pub struct Solver<'g> {
    ground: &'g GroundProgram,
    encoding: Encoding,
    engine: Engine,
    options: SolveOptions,
    stats: Stats,
    learned: HashSet<Nogood>,
    done: bool,
}

impl<'g> Solver<'g> {
    pub fn new(ground: &'g GroundProgram, options: SolveOptions) -> Solver<'g> {
        let encoding = encode(ground);
        let mut engine = Engine::new(encoding.atoms.len());
        let mut done = false;
        for ng in &encoding.nogoods {
            let lits: Vec<Lit> = ng
                .literals()
                .map(|l| Lit::new(encoding.index[&l.atom], l.positive))
                .collect();
            done |= !engine.add_nogood(&lits);
        }
        Solver {
            ground,
            encoding,
            engine,
            options,
            stats: Stats::default(),
            learned: HashSet::new(),
            done,
        }
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    fn candidate(&self) -> BTreeSet<Atom> {
        self.encoding
            .atoms
            .iter()
            .enumerate()
            .filter(|&(v, _)| self.engine.value(v) == Some(true))
            .map(|(_, a)| a.clone())
            .filter(|a| self.ground.atoms.contains(a))
            .collect()
    }

    fn check(&mut self) -> Result<Option<AnswerSet>, SolveError> {
        self.stats.candidates += 1;
        let candidate = self.candidate();
        let compat = compatibility_check(&candidate, self.ground, &self.options, &mut self.stats)?;
        for ng in compat.learned {
            if self.learned.insert(ng.clone()) {
                let lits: Vec<Lit> = ng
                    .literals()
                    .map(|l| Lit::new(self.encoding.index[&l.atom], l.positive))
                    .collect();
                self.engine.add_nogood(&lits);
                self.stats.learned_nogoods += 1;
            }
        }
        if !compat.ok || !flp_check(&candidate, self.ground, &self.options, &mut self.stats)? {
            return Ok(None);
        }
        let atoms = candidate
            .into_iter()
            .filter(|a| !self.ground.is_replacement(a))
            .collect();
        Ok(Some(AnswerSet(atoms)))
    }
}

impl Iterator for Solver<'_> {
    type Item = Result<AnswerSet, SolveError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done
            || self
                .options
                .max_answer_sets
                .is_some_and(|m| self.stats.answer_sets >= m)
        {
            return None;
        }
        loop {
            if self.engine.propagate().is_some() {
                if !self.engine.backtrack() {
                    self.done = true;
                    return None;
                }
                continue;
            }
            if self.engine.decide() {
                continue;
            }
            let result = self.check();
            if !self.engine.backtrack() {
                self.done = true;
            }
            match result {
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Ok(Some(answer)) => {
                    self.stats.answer_sets += 1;
                    return Some(Ok(answer));
                }
                Ok(None) if self.done => return None,
                Ok(None) => {}
            }
        }
    }
}

/// Enumerates answer sets of a ground program.
pub fn solve(ground: &GroundProgram, options: SolveOptions) -> Solver<'_> {
    Solver::new(ground, options)
}
