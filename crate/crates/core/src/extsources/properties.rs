use std::collections::BTreeSet;

use crate::syntax::{PropertyParam, PropertySpec, PropertyType, Term};

/// Declared semantic properties of an external source.
///
/// Input and output positions are zero-based indices into the external
/// atom's input and output lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtSourceProperties {
    pub functional: bool,
    pub monotonic_inputs: BTreeSet<usize>,
    pub antimonotonic_inputs: BTreeSet<usize>,
    pub globally_monotonic: bool,
    pub globally_antimonotonic: bool,
    pub atomlevellinear: bool,
    pub tuplelevellinear: bool,
    pub finite_domain_outputs: BTreeSet<usize>,
    pub relative_finite_domain: BTreeSet<(usize, usize)>,
    pub finite_fiber: bool,
    pub wellordering: BTreeSet<(usize, usize)>,
    pub wellordering_strlen: BTreeSet<(usize, usize)>,
    pub provides_partial_answer: bool,
}

impl ExtSourceProperties {
    pub fn new() -> ExtSourceProperties {
        ExtSourceProperties::default()
    }

    pub fn is_monotonic(&self, input: usize) -> bool {
        self.globally_monotonic || self.monotonic_inputs.contains(&input)
    }

    pub fn is_antimonotonic(&self, input: usize) -> bool {
        self.globally_antimonotonic || self.antimonotonic_inputs.contains(&input)
    }

    pub fn set_functionality(&mut self, value: bool) -> &mut Self {
        self.functional = value;
        self
    }

    pub fn add_monotonic_input_predicate(&mut self, input: usize) -> &mut Self {
        self.monotonic_inputs.insert(input);
        self
    }

    pub fn add_antimonotonic_input_predicate(&mut self, input: usize) -> &mut Self {
        self.antimonotonic_inputs.insert(input);
        self
    }

    pub fn set_atomlevellinear(&mut self, value: bool) -> &mut Self {
        self.atomlevellinear = value;
        self
    }

    pub fn set_tuplelevellinear(&mut self, value: bool) -> &mut Self {
        self.tuplelevellinear = value;
        self
    }

    pub fn set_finite_output_domain(&mut self, output: usize) -> &mut Self {
        self.finite_domain_outputs.insert(output);
        self
    }

    pub fn set_relative_finite_output_domain(&mut self, input: usize, output: usize) -> &mut Self {
        self.relative_finite_domain.insert((input, output));
        self
    }

    pub fn set_finite_fiber(&mut self, value: bool) -> &mut Self {
        self.finite_fiber = value;
        self
    }

    pub fn set_wellordering(&mut self, input: usize, output: usize) -> &mut Self {
        self.wellordering.insert((input, output));
        self
    }

    pub fn set_wellordering_strlen(&mut self, input: usize, output: usize) -> &mut Self {
        self.wellordering_strlen.insert((input, output));
        self
    }

    pub fn set_provides_partial_answer(&mut self, value: bool) -> &mut Self {
        self.provides_partial_answer = value;
        self
    }

    /// Union of two declarations.
    pub fn union(&self, other: &ExtSourceProperties) -> ExtSourceProperties {
        ExtSourceProperties {
            functional: self.functional || other.functional,
            monotonic_inputs: &self.monotonic_inputs | &other.monotonic_inputs,
            antimonotonic_inputs: &self.antimonotonic_inputs | &other.antimonotonic_inputs,
            globally_monotonic: self.globally_monotonic || other.globally_monotonic,
            globally_antimonotonic: self.globally_antimonotonic || other.globally_antimonotonic,
            atomlevellinear: self.atomlevellinear || other.atomlevellinear,
            tuplelevellinear: self.tuplelevellinear || other.tuplelevellinear,
            finite_domain_outputs: &self.finite_domain_outputs | &other.finite_domain_outputs,
            relative_finite_domain: &self.relative_finite_domain | &other.relative_finite_domain,
            finite_fiber: self.finite_fiber || other.finite_fiber,
            wellordering: &self.wellordering | &other.wellordering,
            wellordering_strlen: &self.wellordering_strlen | &other.wellordering_strlen,
            provides_partial_answer: self.provides_partial_answer || other.provides_partial_answer,
        }
    }
}

/// Adds the properties of a tag to those declared by the source interface.
///
/// `inputs` are the input terms of the tagged external atom; a predicate
/// named as a `monotonic`/`antimonotonic` parameter applies to every input
/// position holding it. A parameterless `monotonic` marks all inputs.
pub fn merge_properties(
    interface: &ExtSourceProperties,
    tags: &[PropertySpec],
    inputs: &[Term],
) -> ExtSourceProperties {
    let mut out = interface.clone();
    let positions = |param: &PropertyParam| -> Vec<usize> {
        match param {
            PropertyParam::Index(i) => vec![*i],
            PropertyParam::Symbol(p) => inputs
                .iter()
                .enumerate()
                .filter(|(_, t)| t.as_symbol() == Some(p.as_str()))
                .map(|(i, _)| i)
                .collect(),
        }
    };
    for spec in tags {
        let idx = |pos: usize| spec.index(pos).unwrap_or(0);
        match spec.ptype {
            PropertyType::Functional => out.functional = true,
            PropertyType::Monotonic => match spec.params.first() {
                None => {
                    out.globally_monotonic = true;
                    out.monotonic_inputs.extend(0..inputs.len());
                }
                Some(p) => out.monotonic_inputs.extend(positions(p)),
            },
            PropertyType::Antimonotonic => match spec.params.first() {
                None => {
                    out.globally_antimonotonic = true;
                    out.antimonotonic_inputs.extend(0..inputs.len());
                }
                Some(p) => out.antimonotonic_inputs.extend(positions(p)),
            },
            PropertyType::AtomLevelLinear => out.atomlevellinear = true,
            PropertyType::TupleLevelLinear => out.tuplelevellinear = true,
            PropertyType::FiniteDomain => {
                out.finite_domain_outputs.insert(idx(0));
            }
            PropertyType::RelativeFiniteDomain => {
                out.relative_finite_domain.insert((idx(0), idx(1)));
            }
            PropertyType::FiniteFiber => out.finite_fiber = true,
            PropertyType::WellOrderingStrlen => {
                out.wellordering_strlen.insert((idx(0), idx(1)));
            }
            PropertyType::WellOrdering => {
                out.wellordering.insert((idx(0), idx(1)));
            }
            PropertyType::ProvidesPartialAnswer => out.provides_partial_answer = true,
        }
    }
    out
}
