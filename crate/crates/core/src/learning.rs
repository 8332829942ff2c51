//! Io-nogoods: learned constraints tying the input of one external
//! evaluation to the value of a replacement atom, and their minimization.
//!
//! The minimization pipeline runs cheap structural steps first
//! (linearity, then monotonicity) and partial-oracle probing last. Every
//! stage only removes input literals, never the replacement literal.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::fmt;

use crate::extsources::{
    evaluate_with, Assignment, ExtError, ExtSourceProperties, ExternalSource, InputKind, Truth, Tuple,
};
use crate::syntax::{Atom, Term};

/// Signed literal: `T a` (positive) or `F a`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn t(atom: Atom) -> Literal {
        Literal { atom, positive: true }
    }

    pub fn f(atom: Atom) -> Literal {
        Literal { atom, positive: false }
    }

    pub fn negate(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }

    pub fn truth(&self) -> Truth {
        if self.positive {
            Truth::True
        } else {
            Truth::False
        }
    }

    /// True iff the (complete or partial) assignment makes the literal true.
    pub fn holds_in(&self, a: &Assignment) -> bool {
        a.is_assigned(&self.atom) && a.get(&self.atom) == self.truth()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", if self.positive { "T" } else { "F" }, self.atom)
    }
}

/// A set of literals that must not all hold at once.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Nogood {
    literals: BTreeSet<Literal>,
}

impl Nogood {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Nogood {
        Nogood {
            literals: literals.into_iter().collect(),
        }
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter()
    }

    pub fn contains(&self, l: &Literal) -> bool {
        self.literals.contains(l)
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn is_subset(&self, other: &Nogood) -> bool {
        self.literals.is_subset(&other.literals)
    }

    /// No atom occurs with both signs.
    pub fn is_consistent(&self) -> bool {
        !self.literals.iter().any(|l| self.literals.contains(&l.negate()))
    }

    /// All literals hold in `a`.
    pub fn violated_by(&self, a: &Assignment) -> bool {
        self.literals.iter().all(|l| l.holds_in(a))
    }

    fn retain(&mut self, f: impl FnMut(&Literal) -> bool) {
        self.literals.retain(f);
    }
}

impl FromIterator<Literal> for Nogood {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Nogood::new(iter)
    }
}

impl fmt::Display for Nogood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.literals.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// The oracle returned T for the tuple; the nogood carries `F e(c)`.
    OutputTrue,
    /// The oracle returned F; the nogood carries `T e(c)`.
    OutputFalse,
}

impl Polarity {
    pub fn of(truth: Truth) -> Option<Polarity> {
        match truth {
            Truth::True => Some(Polarity::OutputTrue),
            Truth::False => Some(Polarity::OutputFalse),
            Truth::Unknown => None,
        }
    }

    fn expected(self) -> Truth {
        match self {
            Polarity::OutputTrue => Truth::True,
            Polarity::OutputFalse => Truth::False,
        }
    }
}

/// One external evaluation and the output tuple a nogood is learned for.
pub struct IoNogoodContext<'a> {
    pub source: &'a dyn ExternalSource,
    /// Effective properties (interface plus tags).
    pub properties: &'a ExtSourceProperties,
    pub inputs: &'a [Term],
    /// Ground atoms over the predicate inputs present in the program.
    pub input_atoms: &'a BTreeSet<Atom>,
    pub assignment: &'a Assignment,
    pub tuple: Tuple,
    pub replacement: Atom,
    pub polarity: Polarity,
    /// Oracle calls made by minimization.
    pub oracle_calls: Cell<usize>,
}

impl IoNogoodContext<'_> {
    fn replacement_literal(&self) -> Literal {
        match self.polarity {
            Polarity::OutputTrue => Literal::f(self.replacement.clone()),
            Polarity::OutputFalse => Literal::t(self.replacement.clone()),
        }
    }

    fn evaluate(&self, a: &Assignment) -> Result<Truth, ExtError> {
        self.oracle_calls.set(self.oracle_calls.get() + 1);
        Ok(evaluate_with(self.source, self.properties, self.inputs, a)?.truth(&self.tuple))
    }

    /// Input positions at which `pred` is passed.
    fn positions_of(&self, pred: &str) -> Vec<usize> {
        self.source
            .signature()
            .iter()
            .zip(self.inputs)
            .enumerate()
            .filter(|(_, (k, t))| **k == InputKind::Predicate && t.as_symbol() == Some(pred))
            .map(|(i, _)| i)
            .collect()
    }
}

/// The input literals of the evaluated assignment plus the replacement
/// literal contradicting the observed output.
pub fn learn_io_nogood(ctx: &IoNogoodContext<'_>) -> Nogood {
    let mut lits: Nogood = ctx
        .input_atoms
        .iter()
        .filter(|a| ctx.assignment.is_assigned(a))
        .map(|a| Literal {
            atom: a.clone(),
            positive: ctx.assignment.is_true(a),
        })
        .collect();
    lits.literals.insert(ctx.replacement_literal());
    lits
}

pub fn minimize_by_linearity(
    nogood: &Nogood,
    ctx: &IoNogoodContext<'_>,
    props: &ExtSourceProperties,
) -> Result<Nogood, ExtError> {
    let repl = ctx.replacement_literal();
    let mut out = nogood.clone();
    if props.tuplelevellinear {
        out.retain(|l| *l == repl || l.atom.args == ctx.tuple);
    }
    if props.atomlevellinear && ctx.polarity == Polarity::OutputTrue {
        let mut producers = Vec::new();
        for l in out.literals().filter(|l| l.positive && **l != repl) {
            let single: Assignment = ctx
                .input_atoms
                .iter()
                .map(|a| (a.clone(), if *a == l.atom { Truth::True } else { Truth::False }))
                .collect();
            if ctx.evaluate(&single)? == Truth::True {
                producers.push(l.clone());
            }
        }
        if !producers.is_empty() {
            out = producers.into_iter().chain([repl]).collect();
        }
    }
    Ok(out)
}

pub fn minimize_by_monotonicity(nogood: &Nogood, ctx: &IoNogoodContext<'_>, props: &ExtSourceProperties) -> Nogood {
    let repl = ctx.replacement_literal();
    let mut out = nogood.clone();
    out.retain(|l| {
        if *l == repl {
            return true;
        }
        let positions = ctx.positions_of(&l.atom.predicate);
        if positions.is_empty() {
            return true;
        }
        let all_mono = positions
            .iter()
            .all(|&i| props.is_monotonic(i) && !props.is_antimonotonic(i));
        let all_anti = positions
            .iter()
            .all(|&i| props.is_antimonotonic(i) && !props.is_monotonic(i));
        let droppable = match (ctx.polarity, l.positive) {
            // output stays false when monotonic inputs shrink / antimonotonic grow
            (Polarity::OutputFalse, true) => all_mono,
            (Polarity::OutputFalse, false) => all_anti,
            // output stays true when monotonic inputs grow / antimonotonic shrink
            (Polarity::OutputTrue, false) => all_mono,
            (Polarity::OutputTrue, true) => all_anti,
        };
        !droppable
    });
    out
}

/// Greedy single pass in literal order: unassign one input atom at a time
/// and keep it unassigned if the outcome stays defined.
pub fn minimize_by_partial_oracle(nogood: &Nogood, ctx: &IoNogoodContext<'_>) -> Result<Nogood, ExtError> {
    if !ctx.properties.provides_partial_answer {
        return Ok(nogood.clone());
    }
    let repl = ctx.replacement_literal();
    let mut partial: Assignment = ctx.input_atoms.iter().map(|a| (a.clone(), Truth::Unknown)).collect();
    for l in nogood.literals().filter(|l| **l != repl) {
        partial.set(l.atom.clone(), l.truth());
    }
    let mut out = nogood.clone();
    for l in nogood.literals().filter(|l| **l != repl) {
        partial.set(l.atom.clone(), Truth::Unknown);
        if ctx.evaluate(&partial)? == ctx.polarity.expected() {
            out.literals.remove(l);
        } else {
            partial.set(l.atom.clone(), l.truth());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinimizeOptions {
    pub linearity: bool,
    pub monotonicity: bool,
    pub partial: bool,
}

impl MinimizeOptions {
    pub const ALL: MinimizeOptions = MinimizeOptions {
        linearity: true,
        monotonicity: true,
        partial: true,
    };
    pub const NONE: MinimizeOptions = MinimizeOptions {
        linearity: false,
        monotonicity: false,
        partial: false,
    };
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions::ALL
    }
}

/// Learns the io-nogood of `ctx` and shrinks it with the enabled stages.
pub fn learn_minimized(ctx: &IoNogoodContext<'_>, opts: &MinimizeOptions) -> Result<Nogood, ExtError> {
    let props = ctx.properties;
    let mut n = learn_io_nogood(ctx);
    if opts.linearity && (props.tuplelevellinear || props.atomlevellinear) {
        n = minimize_by_linearity(&n, ctx, props)?;
    }
    if opts.monotonicity {
        n = minimize_by_monotonicity(&n, ctx, props);
    }
    if opts.partial {
        n = minimize_by_partial_oracle(&n, ctx)?;
    }
    Ok(n)
}
