//! Bottom-up instantiation with value invention.
//!
//! The grounder keeps a set `P` of potentially true atoms, seeded with the
//! facts. Each round re-instantiates the rules whose positive body
//! predicates (or external input predicates) gained atoms in the previous
//! round: positive ordinary atoms are joined against `P`, and external
//! atoms contribute the output tuples of their grounding superset under
//! `P`. Negative literals never restrict instantiation. Every ground
//! external literal is replaced by an ordinary *replacement atom*; the
//! solver guesses its value and verifies it against the oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::extsources::{input_predicates, ExtError, ExtSourceProperties, ExternalSource, Tuple};
use crate::safety::SafetyMode;
use crate::syntax::{Atom, BodyAtom, ExternalAtom, Program, Rule, Term};
use crate::LinkError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    External(#[from] ExtError),
    #[error("rule r{}: variable {variable} cannot be bound", rule + 1)]
    Unbound { rule: usize, variable: String },
    #[error("grounding did not terminate within {0} iterations (safety check disabled)")]
    NonTermination(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundOptions {
    /// The cap below only applies in [`SafetyMode::Disabled`]; checked
    /// programs are guaranteed to ground finitely.
    pub mode: SafetyMode,
    pub iteration_cap: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            mode: SafetyMode::Liberal,
            iteration_cap: 10_000,
        }
    }
}

/// Ground rule; external literals already replaced.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GroundRule {
    pub head: Vec<Atom>,
    pub pos: Vec<Atom>,
    pub neg: Vec<Atom>,
}

impl GroundRule {
    pub fn is_fact(&self) -> bool {
        self.head.len() == 1 && self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.head.iter().chain(&self.pos).chain(&self.neg)
    }
}

impl fmt::Display for GroundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<String> = self.head.iter().map(ToString::to_string).collect();
        let body: Vec<String> = self
            .pos
            .iter()
            .map(ToString::to_string)
            .chain(self.neg.iter().map(|a| format!("not {a}")))
            .collect();
        f.write_str(&head.join(" v "))?;
        if !body.is_empty() {
            write!(f, " :- {}", body.join(", "))?;
        }
        f.write_str(".")
    }
}

/// All ground instances of one external atom with fixed inputs. They share
/// a replacement predicate and a single oracle call per assignment.
#[derive(Clone)]
pub struct ExternalGroup {
    pub name: String,
    pub inputs: Vec<Term>,
    pub predicate: String,
    pub source: Arc<dyn ExternalSource>,
    /// Interface properties merged with the tags of every occurrence.
    pub properties: ExtSourceProperties,
    /// Output tuples that occur in the ground program.
    pub tuples: BTreeSet<Tuple>,
    /// Ground atoms of the program over the predicate inputs.
    pub input_atoms: BTreeSet<Atom>,
}

impl ExternalGroup {
    pub fn replacement(&self, tuple: &[Term]) -> Atom {
        Atom::new(self.predicate.clone(), tuple.to_vec())
    }

    pub fn input_predicates(&self) -> Vec<(usize, String)> {
        input_predicates(self.source.as_ref(), &self.inputs)
    }

    pub fn external_atom(&self, tuple: &[Term]) -> ExternalAtom {
        ExternalAtom::new(self.name.clone(), self.inputs.clone(), tuple.to_vec())
    }
}

impl fmt::Debug for ExternalGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalGroup")
            .field("name", &self.name)
            .field("inputs", &self.inputs)
            .field("predicate", &self.predicate)
            .field("tuples", &self.tuples)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct GroundProgram {
    pub rules: Vec<GroundRule>,
    pub groups: Vec<ExternalGroup>,
    /// Replacement atom → (group index, output tuple).
    pub replacement_map: BTreeMap<Atom, (usize, Tuple)>,
    /// Every atom occurring in the program, replacement atoms included.
    pub atoms: BTreeSet<Atom>,
    /// Rounds after the initial fact set that produced new atoms.
    pub iterations: usize,
}

impl GroundProgram {
    pub fn is_replacement(&self, atom: &Atom) -> bool {
        self.replacement_map.contains_key(atom)
    }

    pub fn external_of(&self, atom: &Atom) -> Option<(&ExternalGroup, &Tuple)> {
        self.replacement_map.get(atom).map(|(g, t)| (&self.groups[*g], t))
    }

    pub fn ordinary_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| !self.is_replacement(a))
    }

    pub fn facts(&self) -> BTreeSet<&Atom> {
        self.rules.iter().filter(|r| r.is_fact()).map(|r| &r.head[0]).collect()
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Replacement predicate base name for an external atom with given inputs.
fn replacement_name(name: &str, inputs: &[Term]) -> String {
    let mut text = format!("e_{name}");
    if !inputs.is_empty() {
        text.push('_');
        for t in inputs {
            text.extend(
                t.plain_text()
                    .chars()
                    .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }),
            );
        }
    }
    text
}

/// Replacement atom of a ground external atom, e.g. `&diff[p,q](a)` ↦
/// `e_diff_pq(a)`. Within a [`GroundProgram`] the predicate may carry a
/// numeric suffix when two input lists sanitize to the same name.
pub fn replacement_atom(ext: &ExternalAtom) -> Atom {
    Atom::new(replacement_name(&ext.name, &ext.inputs), ext.outputs.clone())
}

type Subst = BTreeMap<String, Term>;

fn apply(t: &Term, s: &Subst) -> Term {
    match t {
        Term::Variable(v) => s.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Function(f, args) => Term::Function(f.clone(), args.iter().map(|a| apply(a, s)).collect()),
        _ => t.clone(),
    }
}

fn apply_atom(a: &Atom, s: &Subst) -> Atom {
    Atom::new(a.predicate.clone(), a.args.iter().map(|t| apply(t, s)).collect())
}

/// Extends `s` so that `pattern` equals the ground term `value`.
fn unify(pattern: &Term, value: &Term, s: &mut Subst) -> bool {
    match (pattern, value) {
        (Term::Variable(v), _) => match s.get(v) {
            Some(bound) => bound == value,
            None => {
                s.insert(v.clone(), value.clone());
                true
            }
        },
        (Term::Function(f, xs), Term::Function(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, s))
        }
        _ => pattern == value,
    }
}

fn unify_all(patterns: &[Term], values: &[Term], s: &Subst) -> Option<Subst> {
    if patterns.len() != values.len() {
        return None;
    }
    let mut s = s.clone();
    patterns
        .iter()
        .zip(values)
        .all(|(p, v)| unify(p, v, &mut s))
        .then_some(s)
}

struct Occurrence {
    source: Arc<dyn ExternalSource>,
    props: ExtSourceProperties,
}

struct Grounder<'a> {
    program: &'a Program,
    /// Resolved external atoms, keyed by (rule, index into `rule.body()`).
    occurrences: HashMap<(usize, usize), Occurrence>,
    potential: BTreeSet<Atom>,
    by_predicate: HashMap<String, Vec<Atom>>,
    superset_cache: HashMap<(String, Vec<Term>), BTreeSet<Tuple>>,
    groups: Vec<ExternalGroup>,
    group_index: HashMap<(String, Vec<Term>), usize>,
    taken_names: BTreeSet<String>,
    rules: Vec<GroundRule>,
    seen: BTreeSet<GroundRule>,
}

impl Grounder<'_> {
    fn add_potential(&mut self, a: Atom) -> bool {
        if self.potential.insert(a.clone()) {
            self.by_predicate.entry(a.predicate.clone()).or_default().push(a);
            true
        } else {
            false
        }
    }

    fn superset(&mut self, r: usize, l: usize, inputs: &[Term]) -> Result<BTreeSet<Tuple>, GroundError> {
        let occ = &self.occurrences[&(r, l)];
        let key = (occ.source.name().to_string(), inputs.to_vec());
        if let Some(s) = self.superset_cache.get(&key) {
            return Ok(s.clone());
        }
        let s = occ
            .source
            .grounding_superset_with(&occ.props, inputs, &self.potential)?;
        self.superset_cache.insert(key, s.clone());
        Ok(s)
    }

    fn replacement(&mut self, r: usize, l: usize, inputs: Vec<Term>, tuple: Tuple) -> Atom {
        let occ = &self.occurrences[&(r, l)];
        let key = (occ.source.name().to_string(), inputs);
        let g = match self.group_index.get(&key) {
            Some(&g) => {
                self.groups[g].properties = self.groups[g].properties.union(&occ.props);
                g
            }
            None => {
                let base = replacement_name(&key.0, &key.1);
                let mut predicate = base.clone();
                let mut k = 1;
                // the solver names the complementary guess atom `n<predicate>`
                while self.taken_names.contains(&predicate) || self.taken_names.contains(&format!("n{predicate}")) {
                    k += 1;
                    predicate = format!("{base}_{k}");
                }
                self.taken_names.insert(format!("n{predicate}"));
                self.taken_names.insert(predicate.clone());
                self.groups.push(ExternalGroup {
                    name: key.0.clone(),
                    inputs: key.1.clone(),
                    predicate,
                    source: occ.source.clone(),
                    properties: occ.props.clone(),
                    tuples: BTreeSet::new(),
                    input_atoms: BTreeSet::new(),
                });
                self.group_index.insert(key, self.groups.len() - 1);
                self.groups.len() - 1
            }
        };
        let atom = self.groups[g].replacement(&tuple);
        self.groups[g].tuples.insert(tuple);
        atom
    }

    /// All substitutions satisfying the positive body of rule `r`.
    fn positive_matches(&mut self, r: usize) -> Result<Vec<Subst>, GroundError> {
        let program = self.program;
        let rule = &program.rules[r];
        let mut pending: Vec<usize> = (0..rule.body_pos.len()).collect();
        let mut partial = vec![Subst::new()];
        while !pending.is_empty() && !partial.is_empty() {
            // ordinary atoms first, then externals with bound inputs
            let bound = partial[0].keys().cloned().collect::<BTreeSet<_>>();
            let pick = pending
                .iter()
                .position(|&i| matches!(rule.body_pos[i], BodyAtom::Ordinary(_)))
                .or_else(|| {
                    pending.iter().position(|&i| match &rule.body_pos[i] {
                        BodyAtom::External(e) => e.input_variables().is_subset(&bound),
                        _ => false,
                    })
                });
            let Some(k) = pick else {
                let unbound = pending
                    .iter()
                    .flat_map(|&i| match &rule.body_pos[i] {
                        BodyAtom::External(e) => e.input_variables(),
                        _ => BTreeSet::new(),
                    })
                    .find(|v| !bound.contains(v))
                    .unwrap_or_default();
                return Err(GroundError::Unbound {
                    rule: r,
                    variable: unbound,
                });
            };
            let i = pending.remove(k);
            let mut next = Vec::new();
            match &rule.body_pos[i] {
                BodyAtom::Ordinary(a) => {
                    let candidates = self.by_predicate.get(&a.predicate).cloned().unwrap_or_default();
                    for s in &partial {
                        for c in &candidates {
                            if let Some(s2) = unify_all(&a.args, &c.args, s) {
                                next.push(s2);
                            }
                        }
                    }
                }
                BodyAtom::External(e) => {
                    for s in &partial {
                        let inputs: Vec<Term> = e.inputs.iter().map(|t| apply(t, s)).collect();
                        for tuple in self.superset(r, i, &inputs)? {
                            if let Some(s2) = unify_all(&e.outputs, &tuple, s) {
                                next.push(s2);
                            }
                        }
                    }
                }
            }
            partial = next;
        }
        Ok(partial)
    }

    fn instantiate(&mut self, r: usize) -> Result<Vec<Atom>, GroundError> {
        let program = self.program;
        let rule: &Rule = &program.rules[r];
        let n_pos = rule.body_pos.len();
        let vars = rule.variables();
        let mut new_heads = Vec::new();
        for s in self.positive_matches(r)? {
            if let Some(v) = vars.iter().find(|v| !s.contains_key(*v)) {
                return Err(GroundError::Unbound {
                    rule: r,
                    variable: v.clone(),
                });
            }
            let mut g = GroundRule {
                head: rule.head.iter().map(|a| apply_atom(a, &s)).collect(),
                ..GroundRule::default()
            };
            for (l, lit) in rule.body().enumerate() {
                let atom = match lit {
                    BodyAtom::Ordinary(a) => apply_atom(a, &s),
                    BodyAtom::External(e) => {
                        let inputs = e.inputs.iter().map(|t| apply(t, &s)).collect();
                        let tuple = e.outputs.iter().map(|t| apply(t, &s)).collect();
                        self.replacement(r, l, inputs, tuple)
                    }
                };
                if l < n_pos {
                    g.pos.push(atom);
                } else {
                    g.neg.push(atom);
                }
            }
            if self.seen.insert(g.clone()) {
                for h in &g.head {
                    if !self.potential.contains(h) {
                        new_heads.push(h.clone());
                    }
                }
                self.rules.push(g);
            }
        }
        Ok(new_heads)
    }
}

/// Grounds `program`. The safety check is the caller's responsibility;
/// without it, grounding may only stop at the iteration cap.
pub fn ground(
    program: &Program,
    registry: &crate::extsources::Registry,
    options: &GroundOptions,
) -> Result<GroundProgram, GroundError> {
    let mut occurrences = HashMap::new();
    // predicates whose growth re-triggers each rule
    let mut deps: Vec<BTreeSet<String>> = Vec::new();
    for (r, rule) in program.rules.iter().enumerate() {
        let mut d = BTreeSet::new();
        for (l, lit) in rule.body().enumerate() {
            match lit {
                BodyAtom::Ordinary(a) => {
                    if l < rule.body_pos.len() {
                        d.insert(a.predicate.clone());
                    }
                }
                BodyAtom::External(e) => {
                    let (source, props) = registry.resolve(e)?;
                    if l < rule.body_pos.len() {
                        d.extend(input_predicates(source.as_ref(), &e.inputs).into_iter().map(|(_, p)| p));
                    }
                    occurrences.insert((r, l), Occurrence { source, props });
                }
            }
        }
        deps.push(d);
    }

    let mut g = Grounder {
        program,
        occurrences,
        potential: BTreeSet::new(),
        by_predicate: HashMap::new(),
        superset_cache: HashMap::new(),
        groups: Vec::new(),
        group_index: HashMap::new(),
        taken_names: program.predicates(),
        rules: Vec::new(),
        seen: BTreeSet::new(),
    };
    for rule in &program.rules {
        if rule.is_fact() && rule.head[0].is_ground() {
            g.add_potential(rule.head[0].clone());
        }
    }

    let mut iterations = 0;
    let mut changed: Option<BTreeSet<String>> = None;
    loop {
        let mut new_atoms = Vec::new();
        for (r, dep) in deps.iter().enumerate() {
            let triggered = match &changed {
                None => true,
                Some(c) => !dep.is_disjoint(c),
            };
            if triggered {
                new_atoms.extend(g.instantiate(r)?);
            }
        }
        let mut grown = BTreeSet::new();
        for a in new_atoms {
            let pred = a.predicate.clone();
            if g.add_potential(a) {
                grown.insert(pred);
            }
        }
        if grown.is_empty() {
            break;
        }
        iterations += 1;
        if options.mode == SafetyMode::Disabled && iterations > options.iteration_cap {
            return Err(GroundError::NonTermination(options.iteration_cap));
        }
        g.superset_cache.clear();
        changed = Some(grown);
    }

    let mut atoms: BTreeSet<Atom> = g.rules.iter().flat_map(|r| r.atoms().cloned()).collect();
    let mut replacement_map = BTreeMap::new();
    for (i, group) in g.groups.iter_mut().enumerate() {
        let preds: BTreeSet<String> = group.input_predicates().into_iter().map(|(_, p)| p).collect();
        group.input_atoms = atoms.iter().filter(|a| preds.contains(&a.predicate)).cloned().collect();
        for t in &group.tuples {
            replacement_map.insert(group.replacement(t), (i, t.clone()));
        }
    }
    atoms.extend(replacement_map.keys().cloned());
    Ok(GroundProgram {
        rules: g.rules,
        groups: g.groups,
        replacement_map,
        atoms,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extsources::Registry;
    use crate::syntax::parse_program;

    fn gr(text: &str) -> GroundProgram {
        let p = parse_program(text).unwrap();
        ground(&p, &Registry::with_builtins(), &GroundOptions::default()).unwrap()
    }

    fn atom(text: &str) -> Atom {
        parse_program(&format!("{text}.")).unwrap().rules[0].head[0].clone()
    }

    #[test]
    fn facts_only() {
        let g = gr("a. b(1). c(x).");
        assert_eq!(g.rules.len(), 3);
        assert_eq!(g.iterations, 0);
        assert!(g.groups.is_empty());
    }

    #[test]
    fn scc_program() {
        let g = gr("start(1). scc(X) :- start(X). scc(Y) :- scc(X), &edge[X](Y).");
        for a in ["start(1)", "scc(1)", "scc(2)", "scc(3)"] {
            assert!(g.atoms.contains(&atom(a)), "{a}");
        }
        let r3: Vec<String> = g
            .rules
            .iter()
            .filter(|r| r.pos.len() == 2)
            .map(ToString::to_string)
            .collect();
        assert_eq!(
            r3,
            vec![
                "scc(2) :- scc(1), e_edge_1(2).",
                "scc(3) :- scc(1), e_edge_1(3).",
                "scc(3) :- scc(2), e_edge_2(3).",
            ]
        );
        assert_eq!(g.groups.len(), 2);
    }

    #[test]
    fn diff_program() {
        let g = gr("p(a). p(b). q(b). r(X) :- &diff[p,q](X).");
        let rules: Vec<String> = g
            .rules
            .iter()
            .filter(|r| !r.is_fact())
            .map(ToString::to_string)
            .collect();
        assert_eq!(rules, vec!["r(a) :- e_diff_pq(a).", "r(b) :- e_diff_pq(b)."]);
        let group = &g.groups[0];
        assert_eq!(group.input_atoms.len(), 3);
        assert_eq!(g.external_of(&atom("e_diff_pq(a)")).unwrap().0.name, "diff");
    }

    #[test]
    fn replacement_naming() {
        let ext = |inputs: &[&str]| {
            ExternalAtom::new(
                "diff",
                inputs.iter().map(|s| Term::sym(*s)).collect(),
                vec![Term::sym("a")],
            )
        };
        assert_eq!(replacement_atom(&ext(&["p", "q"])), atom("e_diff_pq(a)"));
        assert_eq!(replacement_atom(&ext(&["p", "q"])), replacement_atom(&ext(&["p", "q"])));
        assert_ne!(replacement_atom(&ext(&["p", "q"])), replacement_atom(&ext(&["q", "p"])));
    }

    #[test]
    fn colliding_names_get_suffixes() {
        let g = gr("pq(a). p(a). e_diff_pq(z). r(X) :- &diff[p,q](X). s(X) :- &diff[pq,q](X).");
        let names: BTreeSet<&str> = g.groups.iter().map(|g| g.predicate.as_str()).collect();
        assert_eq!(names.len(), 2);
        assert!(!names.contains("e_diff_pq"));
    }

    #[test]
    fn negative_literals_do_not_restrict() {
        let g = gr("d(1). d(2). b(1). a(X) :- d(X), not b(X).");
        assert_eq!(g.rules.iter().filter(|r| !r.neg.is_empty()).count(), 2);
    }

    #[test]
    fn negative_external_gets_replacement() {
        let g = gr("p(a). q(a). r(X) :- q(X), not &diff[p,q](X).");
        assert!(g.atoms.contains(&atom("e_diff_pq(a)")));
    }

    #[test]
    fn value_invention_tail() {
        let g = gr("s(\"abc\"). s(Y) :- s(X), &tail[X](Y)<wellorderingstrlen 0 0>.");
        let s: Vec<String> = g
            .atoms
            .iter()
            .filter(|a| a.predicate == "s")
            .map(ToString::to_string)
            .collect();
        assert_eq!(s, vec!["s(\"\")", "s(\"abc\")", "s(\"bc\")", "s(\"c\")"]);
    }

    #[test]
    fn cap_in_disabled_mode() {
        let p = parse_program("n(0). n(Y) :- n(X), &succ[X](Y).").unwrap();
        let mut reg = Registry::with_builtins();
        reg.register(crate::extsources::FnSource::new(
            "succ",
            vec![crate::extsources::InputKind::Constant],
            1,
            |inputs, _| {
                let mut e = crate::extsources::Evaluation::new();
                if let Term::Int(i) = inputs[0] {
                    e.output(vec![Term::Int(i + 1)]);
                }
                Ok(e)
            },
        ))
        .unwrap();
        let opts = GroundOptions {
            mode: SafetyMode::Disabled,
            iteration_cap: 50,
        };
        assert_eq!(ground(&p, &reg, &opts).unwrap_err(), GroundError::NonTermination(50));
    }

    #[test]
    fn idempotent_on_ground_programs() {
        let g = gr("a. b :- a, not c. c v d :- b.");
        let text = g.to_string();
        let again = gr(&text);
        assert_eq!(again.to_string(), text);
    }
}
