use std::collections::BTreeSet;
use std::fmt;

/// A term. Variant order gives the total order used for deterministic
/// output: integers < symbols < strings < function terms < variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Int(i64),
    Symbol(String),
    Str(String),
    Function(String, Vec<Term>),
    Variable(String),
}

impl Term {
    pub fn sym(name: impl Into<String>) -> Term {
        Term::Symbol(name.into())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Variable(name.into())
    }

    pub fn string(text: impl Into<String>) -> Term {
        Term::Str(text.into())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Variable(_) => false,
            Term::Function(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    pub fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Variable(v) => {
                out.insert(v.clone());
            }
            Term::Function(_, args) => args.iter().for_each(|a| a.collect_variables(out)),
            _ => {}
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    /// Bare symbol name, if this term is a plain symbolic constant.
    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Term::Symbol(s) => Some(s),
            _ => None,
        }
    }

    /// Text used when the term must appear unquoted, e.g. in CSV output.
    pub fn plain_text(&self) -> String {
        match self {
            Term::Str(s) => s.clone(),
            other => other.to_string(),
        }
    }
}

fn write_escaped(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(i) => write!(f, "{i}"),
            Term::Symbol(s) | Term::Variable(s) => f.write_str(s),
            Term::Str(s) => write_escaped(f, s),
            Term::Function(name, args) => {
                write!(f, "{name}(")?;
                write_list(f, args)?;
                f.write_str(")")
            }
        }
    }
}

/// An ordinary atom `p(t1,...,tn)`. Ground atoms reuse this type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn prop(predicate: impl Into<String>) -> Atom {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn collect_variables(&self, out: &mut BTreeSet<String>) {
        self.args.iter().for_each(|a| a.collect_variables(out));
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_list(f, &self.args)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyType {
    Functional,
    Monotonic,
    Antimonotonic,
    AtomLevelLinear,
    TupleLevelLinear,
    FiniteDomain,
    RelativeFiniteDomain,
    FiniteFiber,
    WellOrderingStrlen,
    WellOrdering,
    ProvidesPartialAnswer,
}

impl PropertyType {
    pub const ALL: [PropertyType; 11] = [
        PropertyType::Functional,
        PropertyType::Monotonic,
        PropertyType::Antimonotonic,
        PropertyType::AtomLevelLinear,
        PropertyType::TupleLevelLinear,
        PropertyType::FiniteDomain,
        PropertyType::RelativeFiniteDomain,
        PropertyType::FiniteFiber,
        PropertyType::WellOrderingStrlen,
        PropertyType::WellOrdering,
        PropertyType::ProvidesPartialAnswer,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            PropertyType::Functional => "functional",
            PropertyType::Monotonic => "monotonic",
            PropertyType::Antimonotonic => "antimonotonic",
            PropertyType::AtomLevelLinear => "atomlevellinear",
            PropertyType::TupleLevelLinear => "tuplelevellinear",
            PropertyType::FiniteDomain => "finitedomain",
            PropertyType::RelativeFiniteDomain => "relativefinitedomain",
            PropertyType::FiniteFiber => "finitefiber",
            PropertyType::WellOrderingStrlen => "wellorderingstrlen",
            PropertyType::WellOrdering => "wellordering",
            PropertyType::ProvidesPartialAnswer => "providespartialanswer",
        }
    }

    pub fn from_keyword(word: &str) -> Option<PropertyType> {
        Self::ALL.into_iter().find(|p| p.keyword() == word)
    }

    /// Accepted parameter counts as an inclusive range.
    pub fn param_range(self) -> (usize, usize) {
        match self {
            PropertyType::Monotonic | PropertyType::Antimonotonic => (0, 1),
            PropertyType::FiniteDomain => (1, 1),
            PropertyType::RelativeFiniteDomain | PropertyType::WellOrderingStrlen | PropertyType::WellOrdering => {
                (2, 2)
            }
            _ => (0, 0),
        }
    }
}

impl fmt::Display for PropertyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyParam {
    Symbol(String),
    Index(usize),
}

impl fmt::Display for PropertyParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyParam::Symbol(s) => f.write_str(s),
            PropertyParam::Index(i) => write!(f, "{i}"),
        }
    }
}

/// One entry of a property tag, e.g. `relativefinitedomain 0 0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropertySpec {
    pub ptype: PropertyType,
    pub params: Vec<PropertyParam>,
}

impl PropertySpec {
    pub fn new(ptype: PropertyType, params: Vec<PropertyParam>) -> PropertySpec {
        PropertySpec { ptype, params }
    }

    pub fn index(&self, pos: usize) -> Option<usize> {
        match self.params.get(pos) {
            Some(PropertyParam::Index(i)) => Some(*i),
            _ => None,
        }
    }
}

impl fmt::Display for PropertySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ptype)?;
        for p in &self.params {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

/// An external atom `&name[inputs](outputs)<tags>`.
///
/// Inputs are kept as terms; whether a bare symbol denotes a predicate or a
/// constant is decided by the registered signature at link time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExternalAtom {
    pub name: String,
    pub inputs: Vec<Term>,
    pub outputs: Vec<Term>,
    pub tag_properties: Vec<PropertySpec>,
}

impl ExternalAtom {
    pub fn new(name: impl Into<String>, inputs: Vec<Term>, outputs: Vec<Term>) -> ExternalAtom {
        ExternalAtom {
            name: name.into(),
            inputs,
            outputs,
            tag_properties: Vec::new(),
        }
    }

    pub fn with_tags(mut self, tags: Vec<PropertySpec>) -> ExternalAtom {
        self.tag_properties = tags;
        self
    }

    pub fn collect_variables(&self, out: &mut BTreeSet<String>) {
        self.inputs.iter().for_each(|t| t.collect_variables(out));
        self.outputs.iter().for_each(|t| t.collect_variables(out));
    }

    pub fn input_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.inputs.iter().for_each(|t| t.collect_variables(&mut out));
        out
    }

    pub fn output_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.outputs.iter().for_each(|t| t.collect_variables(&mut out));
        out
    }
}

impl fmt::Display for ExternalAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "&{}[", self.name)?;
        write_list(f, &self.inputs)?;
        f.write_str("](")?;
        write_list(f, &self.outputs)?;
        f.write_str(")")?;
        if !self.tag_properties.is_empty() {
            f.write_str("<")?;
            for (i, p) in self.tag_properties.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str(">")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyAtom {
    Ordinary(Atom),
    External(ExternalAtom),
}

impl BodyAtom {
    pub fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            BodyAtom::Ordinary(a) => a.collect_variables(out),
            BodyAtom::External(e) => e.collect_variables(out),
        }
    }

    pub fn as_ordinary(&self) -> Option<&Atom> {
        match self {
            BodyAtom::Ordinary(a) => Some(a),
            BodyAtom::External(_) => None,
        }
    }

    pub fn as_external(&self) -> Option<&ExternalAtom> {
        match self {
            BodyAtom::External(e) => Some(e),
            BodyAtom::Ordinary(_) => None,
        }
    }
}

impl fmt::Display for BodyAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyAtom::Ordinary(a) => write!(f, "{a}"),
            BodyAtom::External(e) => write!(f, "{e}"),
        }
    }
}

/// `a1 v ... v ah :- b1, ..., bm, not bm+1, ..., not bn.`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rule {
    pub head: Vec<Atom>,
    pub body_pos: Vec<BodyAtom>,
    pub body_neg: Vec<BodyAtom>,
}

impl Rule {
    pub fn fact(atom: Atom) -> Rule {
        Rule {
            head: vec![atom],
            ..Rule::default()
        }
    }

    pub fn is_fact(&self) -> bool {
        self.head.len() == 1 && self.body_pos.is_empty() && self.body_neg.is_empty()
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }

    pub fn body(&self) -> impl Iterator<Item = &BodyAtom> {
        self.body_pos.iter().chain(self.body_neg.iter())
    }

    pub fn externals(&self) -> impl Iterator<Item = &ExternalAtom> {
        self.body().filter_map(BodyAtom::as_external)
    }

    /// All variables occurring anywhere in the rule.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.head.iter().for_each(|a| a.collect_variables(&mut out));
        self.body().for_each(|b| b.collect_variables(&mut out));
        out
    }

    pub fn is_ground(&self) -> bool {
        self.variables().is_empty()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.head.iter().enumerate() {
            if i > 0 {
                f.write_str(" v ")?;
            }
            write!(f, "{a}")?;
        }
        let has_body = !self.body_pos.is_empty() || !self.body_neg.is_empty();
        if has_body {
            if self.head.is_empty() {
                f.write_str(":- ")?;
            } else {
                f.write_str(" :- ")?;
            }
            let lits = self
                .body_pos
                .iter()
                .map(|b| b.to_string())
                .chain(self.body_neg.iter().map(|b| format!("not {b}")));
            for (i, lit) in lits.enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                f.write_str(&lit)?;
            }
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Program {
        Program { rules }
    }

    /// Names of all external atoms used in the program.
    pub fn external_names(&self) -> BTreeSet<String> {
        self.rules
            .iter()
            .flat_map(|r| r.externals().map(|e| e.name.clone()))
            .collect()
    }

    /// Predicates occurring in ordinary atoms.
    pub fn predicates(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            out.extend(r.head.iter().map(|a| a.predicate.clone()));
            out.extend(r.body().filter_map(|b| b.as_ordinary()).map(|a| a.predicate.clone()));
        }
        out
    }

    pub fn rule_variables(&self) -> Vec<BTreeSet<String>> {
        self.rules.iter().map(Rule::variables).collect()
    }

    pub fn extend(&mut self, other: Program) {
        self.rules.extend(other.rules);
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
