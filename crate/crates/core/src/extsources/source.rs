use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::{Assignment, ExtError, ExtSourceProperties, Truth};
use crate::syntax::{Atom, Term};

/// Output tuple of an external atom.
pub type Tuple = Vec<Term>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputKind {
    Predicate,
    Constant,
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputKind::Predicate => "PREDICATE",
            InputKind::Constant => "CONSTANT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Unknown {
    #[default]
    None,
    Tuples(BTreeSet<Tuple>),
    /// Every tuple not reported true is unknown.
    All,
}

/// Result of one oracle call: the tuples evaluating to T, and those
/// evaluating to U. Every other tuple evaluates to F.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Evaluation {
    pub true_tuples: BTreeSet<Tuple>,
    pub unknown: Unknown,
}

impl Evaluation {
    pub fn new() -> Evaluation {
        Evaluation::default()
    }

    pub fn undefined() -> Evaluation {
        Evaluation {
            true_tuples: BTreeSet::new(),
            unknown: Unknown::All,
        }
    }

    pub fn output(&mut self, tuple: Tuple) {
        self.true_tuples.insert(tuple);
    }

    pub fn output_unknown(&mut self, tuple: Tuple) {
        match &mut self.unknown {
            Unknown::All => {}
            Unknown::Tuples(set) => {
                set.insert(tuple);
            }
            Unknown::None => self.unknown = Unknown::Tuples(BTreeSet::from([tuple])),
        }
    }

    pub fn truth(&self, tuple: &[Term]) -> Truth {
        if self.true_tuples.contains(tuple) {
            return Truth::True;
        }
        match &self.unknown {
            Unknown::None => Truth::False,
            Unknown::All => Truth::Unknown,
            Unknown::Tuples(set) if set.contains(tuple) => Truth::Unknown,
            Unknown::Tuples(_) => Truth::False,
        }
    }

    /// True iff no queried tuple evaluated to U.
    pub fn defined(&self) -> bool {
        match &self.unknown {
            Unknown::None => true,
            Unknown::Tuples(set) => set.is_empty(),
            Unknown::All => false,
        }
    }
}

/// An external source: a named oracle with a fixed input signature.
pub trait ExternalSource: Send + Sync {
    fn name(&self) -> &str;

    fn signature(&self) -> &[InputKind];

    fn output_arity(&self) -> usize;

    fn properties(&self) -> &ExtSourceProperties;

    /// The oracle. Receives ground inputs and an assignment covering (at
    /// least) the atoms over the predicate inputs. It is only called with a
    /// partial assignment when partial answers are declared; it must then
    /// stay knowledge-monotonic.
    fn oracle(&self, inputs: &[Term], assignment: &Assignment) -> Result<Evaluation, ExtError>;

    /// A finite superset of the output tuples under every assignment whose
    /// true atoms lie within `potential`.
    fn grounding_superset(&self, inputs: &[Term], potential: &BTreeSet<Atom>) -> Result<BTreeSet<Tuple>, ExtError> {
        self.grounding_superset_with(self.properties(), inputs, potential)
    }

    /// Same as [`ExternalSource::grounding_superset`], under effective
    /// properties that may include tag declarations.
    fn grounding_superset_with(
        &self,
        props: &ExtSourceProperties,
        inputs: &[Term],
        potential: &BTreeSet<Atom>,
    ) -> Result<BTreeSet<Tuple>, ExtError> {
        default_grounding_superset(self, props, inputs, potential)
    }
}

impl fmt::Debug for dyn ExternalSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExternalSource(&{})", self.name())
    }
}

pub(crate) fn check_inputs(source: &dyn ExternalSource, inputs: &[Term]) -> Result<(), ExtError> {
    let sig = source.signature();
    let mismatch = |detail: String| ExtError::SignatureMismatch {
        source_name: source.name().to_string(),
        detail,
    };
    if sig.len() != inputs.len() {
        return Err(mismatch(format!("expected {} inputs, got {}", sig.len(), inputs.len())));
    }
    for (i, (kind, term)) in sig.iter().zip(inputs).enumerate() {
        if !term.is_ground() {
            return Err(mismatch(format!("input {i} is not ground: {term}")));
        }
        if *kind == InputKind::Predicate && term.as_symbol().is_none() {
            return Err(mismatch(format!("input {i} must be a predicate name, got {term}")));
        }
    }
    Ok(())
}

/// Predicate names at the predicate positions of `inputs`.
pub fn input_predicates(source: &dyn ExternalSource, inputs: &[Term]) -> Vec<(usize, String)> {
    source
        .signature()
        .iter()
        .zip(inputs)
        .enumerate()
        .filter(|(_, (kind, _))| **kind == InputKind::Predicate)
        .filter_map(|(i, (_, t))| t.as_symbol().map(|s| (i, s.to_string())))
        .collect()
}

/// Evaluates `source` under its interface properties.
pub fn evaluate(source: &dyn ExternalSource, inputs: &[Term], assignment: &Assignment) -> Result<Evaluation, ExtError> {
    evaluate_with(source, source.properties(), inputs, assignment)
}

/// Evaluates `source` under the effective properties `props` (interface
/// properties merged with tags).
///
/// Sources without partial-answer support are treated as two-valued: any
/// unknown atom over an input predicate makes the whole result unknown.
pub fn evaluate_with(
    source: &dyn ExternalSource,
    props: &ExtSourceProperties,
    inputs: &[Term],
    assignment: &Assignment,
) -> Result<Evaluation, ExtError> {
    check_inputs(source, inputs)?;
    if !props.provides_partial_answer {
        let preds = input_predicates(source, inputs);
        let partial = preds
            .iter()
            .any(|(_, p)| assignment.over(p).any(|(_, v)| v == Truth::Unknown));
        if partial {
            return Ok(Evaluation::undefined());
        }
    }
    let eval = source.oracle(inputs, assignment)?;
    if let Some(t) = eval.true_tuples.iter().find(|t| t.len() != source.output_arity()) {
        return Err(ExtError::OutputArity {
            source_name: source.name().to_string(),
            expected: source.output_arity(),
            tuple: t.clone(),
        });
    }
    if props.functional && eval.true_tuples.len() > 1 {
        return Err(ExtError::FunctionalityViolation {
            source_name: source.name().to_string(),
            inputs: inputs.to_vec(),
            outputs: eval.true_tuples.iter().cloned().collect(),
        });
    }
    Ok(eval)
}

/// Above this many atoms over inputs without a monotonicity declaration, the
/// default superset falls back to the two extreme assignments, which is only
/// sound for sources whose outputs are bounded by those extremes.
pub const EXHAUSTIVE_SUPERSET_LIMIT: usize = 12;

/// Grounding superset from extreme assignments: atoms of monotonic inputs
/// all true, of antimonotonic inputs all false. Atoms over inputs with
/// neither declaration are enumerated exhaustively (up to
/// [`EXHAUSTIVE_SUPERSET_LIMIT`]), else set all-true and all-false. Sources with zero output arity
/// can only produce the empty tuple, which is returned unconditionally.
pub fn default_grounding_superset<S: ExternalSource + ?Sized>(
    source: &S,
    props: &ExtSourceProperties,
    inputs: &[Term],
    potential: &BTreeSet<Atom>,
) -> Result<BTreeSet<Tuple>, ExtError> {
    if source.output_arity() == 0 {
        return Ok(BTreeSet::from([Vec::new()]));
    }
    let mut mono = BTreeSet::new();
    let mut anti = BTreeSet::new();
    let mut neither = BTreeSet::new();
    for (i, (kind, term)) in source.signature().iter().zip(inputs).enumerate() {
        if *kind != InputKind::Predicate {
            continue;
        }
        let Some(pred) = term.as_symbol() else { continue };
        match (props.is_monotonic(i), props.is_antimonotonic(i)) {
            (true, false) => mono.insert(pred.to_string()),
            (false, true) => anti.insert(pred.to_string()),
            _ => neither.insert(pred.to_string()),
        };
    }
    // a predicate used in several roles is treated as neither
    let mono: BTreeSet<_> = mono
        .difference(&anti)
        .filter(|p| !neither.contains(*p))
        .cloned()
        .collect();
    let anti: BTreeSet<_> = anti
        .difference(&mono)
        .filter(|p| !neither.contains(*p))
        .cloned()
        .collect();
    let fixed: Assignment = potential
        .iter()
        .filter_map(|a| {
            let p = a.predicate.as_str();
            if mono.contains(p) {
                Some((a.clone(), Truth::True))
            } else if anti.contains(p) {
                Some((a.clone(), Truth::False))
            } else {
                None
            }
        })
        .collect();
    let free: Vec<&Atom> = potential.iter().filter(|a| neither.contains(&a.predicate)).collect();
    let mut out = BTreeSet::new();
    if free.len() <= EXHAUSTIVE_SUPERSET_LIMIT {
        for mask in 0u32..(1u32 << free.len()) {
            let mut a = fixed.clone();
            for (k, atom) in free.iter().enumerate() {
                a.set(
                    (*atom).clone(),
                    if mask >> k & 1 == 1 { Truth::True } else { Truth::False },
                );
            }
            out.extend(source.oracle(inputs, &a)?.true_tuples);
        }
    } else {
        for value in [Truth::True, Truth::False] {
            let mut a = fixed.clone();
            for atom in &free {
                a.set((*atom).clone(), value);
            }
            out.extend(source.oracle(inputs, &a)?.true_tuples);
        }
    }
    Ok(out)
}

type OracleFn = dyn Fn(&[Term], &Assignment) -> Result<Evaluation, ExtError> + Send + Sync;
type SupersetFn = dyn Fn(&[Term], &BTreeSet<Atom>) -> Result<BTreeSet<Tuple>, ExtError> + Send + Sync;

/// An external source backed by closures.
#[derive(Clone)]
pub struct FnSource {
    name: String,
    signature: Vec<InputKind>,
    output_arity: usize,
    properties: ExtSourceProperties,
    oracle: Arc<OracleFn>,
    superset: Option<Arc<SupersetFn>>,
}

impl FnSource {
    pub fn new<F>(name: impl Into<String>, signature: Vec<InputKind>, output_arity: usize, oracle: F) -> FnSource
    where
        F: Fn(&[Term], &Assignment) -> Result<Evaluation, ExtError> + Send + Sync + 'static,
    {
        FnSource {
            name: name.into(),
            signature,
            output_arity,
            properties: ExtSourceProperties::default(),
            oracle: Arc::new(oracle),
            superset: None,
        }
    }

    pub fn with_properties(mut self, properties: ExtSourceProperties) -> FnSource {
        self.properties = properties;
        self
    }

    pub fn with_superset<F>(mut self, superset: F) -> FnSource
    where
        F: Fn(&[Term], &BTreeSet<Atom>) -> Result<BTreeSet<Tuple>, ExtError> + Send + Sync + 'static,
    {
        self.superset = Some(Arc::new(superset));
        self
    }
}

impl ExternalSource for FnSource {
    fn name(&self) -> &str {
        &self.name
    }

    fn signature(&self) -> &[InputKind] {
        &self.signature
    }

    fn output_arity(&self) -> usize {
        self.output_arity
    }

    fn properties(&self) -> &ExtSourceProperties {
        &self.properties
    }

    fn oracle(&self, inputs: &[Term], assignment: &Assignment) -> Result<Evaluation, ExtError> {
        (self.oracle)(inputs, assignment)
    }

    fn grounding_superset_with(
        &self,
        props: &ExtSourceProperties,
        inputs: &[Term],
        potential: &BTreeSet<Atom>,
    ) -> Result<BTreeSet<Tuple>, ExtError> {
        match &self.superset {
            Some(f) => f(inputs, potential),
            None => default_grounding_superset(self, props, inputs, potential),
        }
    }
}
