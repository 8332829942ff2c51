use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::Atom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn is_defined(self) -> bool {
        self != Truth::Unknown
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "T",
            Truth::False => "F",
            Truth::Unknown => "U",
        })
    }
}

/// Three-valued assignment over ground atoms.
///
/// Atoms without an entry are false: they lie outside the instantiated atom
/// universe and cannot become true. An atom that is part of the universe but
/// not yet decided is stored explicitly as [`Truth::Unknown`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<Atom, Truth>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn set(&mut self, atom: Atom, value: Truth) {
        self.values.insert(atom, value);
    }

    pub fn with(mut self, atom: Atom, value: Truth) -> Assignment {
        self.set(atom, value);
        self
    }

    pub fn get(&self, atom: &Atom) -> Truth {
        self.values.get(atom).copied().unwrap_or(Truth::False)
    }

    pub fn is_true(&self, atom: &Atom) -> bool {
        self.get(atom) == Truth::True
    }

    pub fn is_false(&self, atom: &Atom) -> bool {
        self.get(atom) == Truth::False
    }

    pub fn is_assigned(&self, atom: &Atom) -> bool {
        self.get(atom) != Truth::Unknown
    }

    /// Complete iff no atom of the universe is left unknown.
    pub fn is_complete(&self) -> bool {
        self.values.values().all(|v| v.is_defined())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, Truth)> {
        self.values.iter().map(|(a, v)| (a, *v))
    }

    /// Entries over predicate `pred`, in atom order.
    pub fn over<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = (&'a Atom, Truth)> + 'a {
        self.values
            .iter()
            .filter(move |(a, _)| a.predicate == pred)
            .map(|(a, v)| (a, *v))
    }

    pub fn true_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.values.iter().filter(|(_, v)| **v == Truth::True).map(|(a, _)| a)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<(Atom, Truth)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Atom, Truth)>>(iter: I) -> Self {
        Assignment {
            values: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, v)) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} {a}")?;
        }
        f.write_str("}")
    }
}
