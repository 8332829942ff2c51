//! Builtin external sources.
//!
//! | source | inputs | outputs | declared properties |
//! |---|---|---|---|
//! | `diff[p,q](X)` | pred, pred | 1 | monotonic 0, antimonotonic 1, tuplelevellinear, relativefinitedomain 0 0, providespartialanswer |
//! | `union[p,q](X)` | pred, pred | 1 | monotonic, atomlevellinear |
//! | `greaterThan[p,n]()` | pred, const | 0 | none |
//! | `id[p]()` | pred | 0 | monotonic |
//! | `edge[X](Y)` | const | 1 | none |
//! | `dotedge[G,X](Y)` | const, const | 1 | finitedomain 0 |
//! | `tail[X](Y)` | const | 1 | functional |
//! | `decrement[X](Y)` | const | 1 | functional, wellordering 0 0 |

use std::sync::Arc;

use super::{Assignment, Evaluation, ExtError, ExtSourceProperties, ExternalSource, InputKind, Truth};
use crate::syntax::{Atom, Term};

/// Edge list of the graph used by `edge` and by `dotedge[builtin,...]`.
pub const BUILTIN_GRAPH: [(i64, i64); 3] = [(1, 2), (1, 3), (2, 3)];

type Oracle = fn(&[Term], &Assignment) -> Result<Evaluation, ExtError>;

pub struct Builtin {
    name: &'static str,
    signature: Vec<InputKind>,
    output_arity: usize,
    properties: ExtSourceProperties,
    oracle: Oracle,
}

impl ExternalSource for Builtin {
    fn name(&self) -> &str {
        self.name
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
}

pub fn all() -> Vec<Arc<dyn ExternalSource>> {
    vec![
        Arc::new(diff()),
        Arc::new(union()),
        Arc::new(greater_than()),
        Arc::new(id()),
        Arc::new(edge()),
        Arc::new(dotedge()),
        Arc::new(tail()),
        Arc::new(decrement()),
    ]
}

use InputKind::{Constant, Predicate};

fn pred_name(t: &Term) -> &str {
    t.as_symbol().unwrap_or_default()
}

pub fn diff() -> Builtin {
    let mut props = ExtSourceProperties::new();
    props
        .add_monotonic_input_predicate(0)
        .add_antimonotonic_input_predicate(1)
        .set_tuplelevellinear(true)
        .set_relative_finite_output_domain(0, 0)
        .set_provides_partial_answer(true);
    Builtin {
        name: "diff",
        signature: vec![Predicate, Predicate],
        output_arity: 1,
        properties: props,
        oracle: diff_oracle,
    }
}

fn diff_oracle(inputs: &[Term], a: &Assignment) -> Result<Evaluation, ExtError> {
    let (p, q) = (pred_name(&inputs[0]), pred_name(&inputs[1]));
    let mut eval = Evaluation::new();
    for (atom, in_p) in a.over(p) {
        if atom.arity() != 1 || in_p == Truth::False {
            continue;
        }
        let in_q = a.get(&Atom::new(q, atom.args.clone()));
        match (in_p, in_q) {
            (Truth::True, Truth::False) => eval.output(atom.args.clone()),
            (_, Truth::True) => {}
            _ => eval.output_unknown(atom.args.clone()),
        }
    }
    Ok(eval)
}

pub fn union() -> Builtin {
    let mut props = ExtSourceProperties::new();
    props
        .add_monotonic_input_predicate(0)
        .add_monotonic_input_predicate(1)
        .set_atomlevellinear(true);
    props.globally_monotonic = true;
    Builtin {
        name: "union",
        signature: vec![Predicate, Predicate],
        output_arity: 1,
        properties: props,
        oracle: union_oracle,
    }
}

fn union_oracle(inputs: &[Term], a: &Assignment) -> Result<Evaluation, ExtError> {
    let mut eval = Evaluation::new();
    let mut unknown = Vec::new();
    for input in inputs {
        for (atom, v) in a.over(pred_name(input)) {
            if atom.arity() != 1 {
                continue;
            }
            match v {
                Truth::True => eval.output(atom.args.clone()),
                Truth::Unknown => unknown.push(atom.args.clone()),
                Truth::False => {}
            }
        }
    }
    for t in unknown {
        if !eval.true_tuples.contains(&t) {
            eval.output_unknown(t);
        }
    }
    Ok(eval)
}

pub fn greater_than() -> Builtin {
    Builtin {
        name: "greaterThan",
        signature: vec![Predicate, Constant],
        output_arity: 0,
        properties: ExtSourceProperties::new(),
        oracle: greater_than_oracle,
    }
}

fn greater_than_oracle(inputs: &[Term], a: &Assignment) -> Result<Evaluation, ExtError> {
    let overflow = || ExtError::Overflow {
        source_name: "greaterThan".into(),
    };
    let Term::Int(bound) = inputs[1] else {
        return Err(ExtError::SignatureMismatch {
            source_name: "greaterThan".into(),
            detail: format!("bound must be an integer, got {}", inputs[1]),
        });
    };
    // lowest and highest sums over all completions of the assignment
    let (mut low, mut high) = (0i64, 0i64);
    for (atom, v) in a.over(pred_name(&inputs[0])) {
        let [Term::Int(c)] = atom.args.as_slice() else { continue };
        let c = *c;
        match v {
            Truth::True => {
                low = low.checked_add(c).ok_or_else(overflow)?;
                high = high.checked_add(c).ok_or_else(overflow)?;
            }
            Truth::Unknown if c < 0 => low = low.checked_add(c).ok_or_else(overflow)?,
            Truth::Unknown => high = high.checked_add(c).ok_or_else(overflow)?,
            Truth::False => {}
        }
    }
    let mut eval = Evaluation::new();
    if low > bound {
        eval.output(vec![]);
    } else if high > bound {
        eval.output_unknown(vec![]);
    }
    Ok(eval)
}

pub fn id() -> Builtin {
    let mut props = ExtSourceProperties::new();
    props.add_monotonic_input_predicate(0);
    props.globally_monotonic = true;
    Builtin {
        name: "id",
        signature: vec![Predicate],
        output_arity: 0,
        properties: props,
        oracle: id_oracle,
    }
}

fn id_oracle(inputs: &[Term], a: &Assignment) -> Result<Evaluation, ExtError> {
    let mut eval = Evaluation::new();
    let values: Vec<Truth> = a.over(pred_name(&inputs[0])).map(|(_, v)| v).collect();
    if values.contains(&Truth::True) {
        eval.output(vec![]);
    } else if values.contains(&Truth::Unknown) {
        eval.output_unknown(vec![]);
    }
    Ok(eval)
}

/// Declares no properties: finiteness of the graph is asserted per
/// occurrence with `<finitedomain 0>`.
pub fn edge() -> Builtin {
    Builtin {
        name: "edge",
        signature: vec![Constant],
        output_arity: 1,
        properties: ExtSourceProperties::new(),
        oracle: edge_oracle,
    }
}

fn builtin_graph() -> Vec<(Term, Term)> {
    BUILTIN_GRAPH
        .iter()
        .map(|&(a, b)| (Term::Int(a), Term::Int(b)))
        .collect()
}

fn successors(graph: &[(Term, Term)], node: &Term) -> Evaluation {
    let mut eval = Evaluation::new();
    for (from, to) in graph {
        if from == node {
            eval.output(vec![to.clone()]);
        }
    }
    eval
}

fn edge_oracle(inputs: &[Term], _: &Assignment) -> Result<Evaluation, ExtError> {
    Ok(successors(&builtin_graph(), &inputs[0]))
}

pub fn dotedge() -> Builtin {
    let mut props = ExtSourceProperties::new();
    props.set_finite_output_domain(0);
    Builtin {
        name: "dotedge",
        signature: vec![Constant, Constant],
        output_arity: 1,
        properties: props,
        oracle: dotedge_oracle,
    }
}

fn dotedge_oracle(inputs: &[Term], _: &Assignment) -> Result<Evaluation, ExtError> {
    let graph = match &inputs[0] {
        Term::Symbol(s) if s == "builtin" => builtin_graph(),
        Term::Str(path) | Term::Symbol(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ExtError::Io {
                source_name: "dotedge".into(),
                message: format!("{path}: {e}"),
            })?;
            parse_edge_list(&text).map_err(|message| ExtError::Io {
                source_name: "dotedge".into(),
                message: format!("{path}: {message}"),
            })?
        }
        other => {
            return Err(ExtError::SignatureMismatch {
                source_name: "dotedge".into(),
                detail: format!("graph must be a file name or 'builtin', got {other}"),
            })
        }
    };
    Ok(successors(&graph, &inputs[1]))
}

fn parse_node(text: &str) -> Term {
    let text = text.trim();
    if let Ok(i) = text.parse::<i64>() {
        Term::Int(i)
    } else if text.len() >= 2 && text.starts_with('"') && text.ends_with('"') {
        Term::Str(text[1..text.len() - 1].to_string())
    } else {
        Term::Symbol(text.to_string())
    }
}

/// Parses `from -> to;` lines. Blank lines, `//` and `#` comments and the
/// `digraph {`/`}` wrapper lines are skipped.
pub fn parse_edge_list(text: &str) -> Result<Vec<(Term, Term)>, String> {
    let mut edges = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty()
            || line.starts_with("//")
            || line.starts_with('#')
            || line == "}"
            || (line.ends_with('{') && !line.contains("->"))
        {
            continue;
        }
        let body = line.strip_suffix(';').unwrap_or(line);
        let Some((from, to)) = body.split_once("->") else {
            return Err(format!("line {}: expected '<from> -> <to>;'", n + 1));
        };
        if from.trim().is_empty() || to.trim().is_empty() {
            return Err(format!("line {}: empty node name", n + 1));
        }
        edges.push((parse_node(from), parse_node(to)));
    }
    Ok(edges)
}

pub fn tail() -> Builtin {
    let mut props = ExtSourceProperties::new();
    props.set_functionality(true);
    Builtin {
        name: "tail",
        signature: vec![Constant],
        output_arity: 1,
        properties: props,
        oracle: tail_oracle,
    }
}

fn tail_oracle(inputs: &[Term], _: &Assignment) -> Result<Evaluation, ExtError> {
    let text = match &inputs[0] {
        Term::Str(s) | Term::Symbol(s) => s.clone(),
        other => other.to_string(),
    };
    let mut eval = Evaluation::new();
    let mut chars = text.chars();
    if chars.next().is_some() {
        eval.output(vec![Term::Str(chars.collect())]);
    }
    Ok(eval)
}

pub fn decrement() -> Builtin {
    let mut props = ExtSourceProperties::new();
    props.set_functionality(true).set_wellordering(0, 0);
    Builtin {
        name: "decrement",
        signature: vec![Constant],
        output_arity: 1,
        properties: props,
        oracle: decrement_oracle,
    }
}

fn decrement_oracle(inputs: &[Term], _: &Assignment) -> Result<Evaluation, ExtError> {
    let mut eval = Evaluation::new();
    if let Term::Int(n) = inputs[0] {
        if n > 0 {
            eval.output(vec![Term::Int(n - 1)]);
        }
    }
    Ok(eval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extsources::{evaluate, Registry};

    fn unary(p: &str, c: &str) -> Atom {
        Atom::new(p, vec![Term::sym(c)])
    }

    fn pq() -> Vec<Term> {
        vec![Term::sym("p"), Term::sym("q")]
    }

    #[test]
    fn diff_complete() {
        let a = Assignment::new()
            .with(unary("p", "a"), Truth::True)
            .with(unary("p", "b"), Truth::True)
            .with(unary("q", "a"), Truth::False)
            .with(unary("q", "b"), Truth::True);
        let eval = evaluate(&diff(), &pq(), &a).unwrap();
        assert!(eval.defined());
        assert_eq!(
            eval.true_tuples.into_iter().collect::<Vec<_>>(),
            vec![vec![Term::sym("a")]]
        );
    }

    #[test]
    fn diff_partial() {
        let a = Assignment::new()
            .with(unary("p", "a"), Truth::True)
            .with(unary("q", "a"), Truth::Unknown);
        let eval = evaluate(&diff(), &pq(), &a).unwrap();
        assert!(eval.true_tuples.is_empty());
        assert!(!eval.defined());
        assert_eq!(eval.truth(&[Term::sym("a")]), Truth::Unknown);
    }

    #[test]
    fn union_of_extensions() {
        let a = Assignment::new()
            .with(unary("p", "a"), Truth::True)
            .with(unary("p", "b"), Truth::True)
            .with(unary("q", "c"), Truth::True);
        let eval = evaluate(&union(), &pq(), &a).unwrap();
        let got: Vec<_> = eval.true_tuples.into_iter().collect();
        assert_eq!(
            got,
            vec![vec![Term::sym("a")], vec![Term::sym("b")], vec![Term::sym("c")]]
        );
    }

    #[test]
    fn greater_than_sum() {
        let int = |i| Atom::new("p", vec![Term::Int(i)]);
        let a = Assignment::new().with(int(2), Truth::True).with(int(9), Truth::True);
        let inputs = [Term::sym("p"), Term::Int(10)];
        assert_eq!(evaluate(&greater_than(), &inputs, &a).unwrap().truth(&[]), Truth::True);
        let a = Assignment::new().with(int(2), Truth::True).with(int(8), Truth::True);
        assert_eq!(evaluate(&greater_than(), &inputs, &a).unwrap().truth(&[]), Truth::False);
    }

    #[test]
    fn greater_than_overflow_is_error() {
        let int = |i| Atom::new("p", vec![Term::Int(i)]);
        let a = Assignment::new()
            .with(int(i64::MAX), Truth::True)
            .with(int(1), Truth::True);
        let err = evaluate(&greater_than(), &[Term::sym("p"), Term::Int(0)], &a).unwrap_err();
        assert!(matches!(err, ExtError::Overflow { .. }));
    }

    #[test]
    fn edge_on_builtin_graph() {
        let eval = evaluate(&edge(), &[Term::Int(1)], &Assignment::new()).unwrap();
        let got: Vec<_> = eval.true_tuples.into_iter().collect();
        assert_eq!(got, vec![vec![Term::Int(2)], vec![Term::Int(3)]]);
        let eval = evaluate(&dotedge(), &[Term::sym("builtin"), Term::Int(2)], &Assignment::new()).unwrap();
        assert_eq!(eval.true_tuples.len(), 1);
    }

    #[test]
    fn dotedge_reads_file() {
        let dir = std::env::temp_dir().join(format!("hexsolve-dot-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("g.dot");
        std::fs::write(&path, "digraph {\n a -> b;\n a -> \"c d\";\n b -> 7;\n}\n").unwrap();
        let inputs = [Term::string(path.to_string_lossy()), Term::sym("a")];
        let eval = evaluate(&dotedge(), &inputs, &Assignment::new()).unwrap();
        let got: Vec<_> = eval.true_tuples.into_iter().collect();
        assert_eq!(got, vec![vec![Term::sym("b")], vec![Term::string("c d")]]);
        std::fs::write(&path, "a b\n").unwrap();
        assert!(matches!(
            evaluate(&dotedge(), &inputs, &Assignment::new()),
            Err(ExtError::Io { .. })
        ));
    }

    #[test]
    fn tail_and_decrement() {
        let eval = evaluate(&tail(), &[Term::string("abc")], &Assignment::new()).unwrap();
        assert_eq!(eval.true_tuples.into_iter().next(), Some(vec![Term::string("bc")]));
        assert!(evaluate(&tail(), &[Term::string("")], &Assignment::new())
            .unwrap()
            .true_tuples
            .is_empty());
        let eval = evaluate(&decrement(), &[Term::Int(5)], &Assignment::new()).unwrap();
        assert_eq!(eval.true_tuples.into_iter().next(), Some(vec![Term::Int(4)]));
        assert!(evaluate(&decrement(), &[Term::Int(0)], &Assignment::new())
            .unwrap()
            .true_tuples
            .is_empty());
    }

    #[test]
    fn two_valued_sources_are_undefined_on_partial_input() {
        let a = Assignment::new().with(unary("p", "a"), Truth::Unknown);
        let eval = evaluate(&union(), &pq(), &a).unwrap();
        assert_eq!(eval, Evaluation::undefined());
    }

    #[test]
    fn registry_lookup() {
        let mut r = Registry::new();
        r.register(diff()).unwrap();
        let d = r.lookup("diff").unwrap();
        assert_eq!(d.signature(), &[Predicate, Predicate]);
        assert_eq!(d.output_arity(), 1);
        assert!(matches!(r.register(diff()), Err(crate::LinkError::DuplicateName(_))));
        assert!(matches!(r.lookup("nosuch"), Err(crate::LinkError::NotFound(_))));
    }

    #[test]
    fn functionality_is_asserted() {
        use crate::extsources::{evaluate_with, FnSource};
        let src = FnSource::new("two", vec![Constant], 1, |_, _| {
            let mut e = Evaluation::new();
            e.output(vec![Term::Int(1)]);
            e.output(vec![Term::Int(2)]);
            Ok(e)
        });
        let mut props = ExtSourceProperties::new();
        props.set_functionality(true);
        let err = evaluate_with(&src, &props, &[Term::Int(0)], &Assignment::new()).unwrap_err();
        assert!(matches!(err, ExtError::FunctionalityViolation { .. }));
    }
}
