//! Finite-groundability analysis.
//!
//! Strong safety forbids value invention by recursive external atoms. The
//! liberal check instead tracks which *attributes* (argument positions of
//! predicates) may receive infinitely many values, using declared source
//! properties and safety plugins to rule out sources of new values. It is a
//! least fixpoint over the set of infinite variables and attributes: a
//! variable is infinite unless one of its binding occurrences is finite.
//! Sources of infinity are
//!
//! * outputs of recursive external atoms without a bounding property,
//! * outputs of non-recursive external atoms with an infinite input,
//! * variables without any positive binding occurrence,
//! * non-ground function terms in heads of recursive rules.
//!
//! `relativefinitedomain i j`, `wellordering i j` and `wellorderingstrlen i j`
//! make output `j` finite whenever input `i` is, even on cycles; a cycle
//! mixing both kinds of well-ordering does not get this treatment.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::extsources::{ExtSourceProperties, InputKind, Registry};
use crate::syntax::{Atom, BodyAtom, ExternalAtom, Program, Rule, Term};
use crate::LinkError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SafetyMode {
    Strong,
    #[default]
    Liberal,
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    Unsafe,
}

/// A variable whose finiteness could not be established.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Hint {
    /// Zero-based rule index; displayed one-based as `r1`, `r2`, ...
    pub rule: usize,
    pub variable: String,
    pub reason: String,
}

impl fmt::Display for Hint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rule r{}, variable {}: {}",
            self.rule + 1,
            self.variable,
            self.reason
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyReport {
    pub verdict: Verdict,
    pub mode: SafetyMode,
    pub hints: Vec<Hint>,
    /// Productive rounds of the liberal fixpoint (0 for the other modes).
    pub iterations: usize,
}

impl SafetyReport {
    fn from_hints(mode: SafetyMode, mut hints: Vec<Hint>, iterations: usize) -> SafetyReport {
        hints.sort();
        hints.dedup_by(|a, b| a.rule == b.rule && a.variable == b.variable);
        let verdict = if hints.is_empty() {
            Verdict::Safe
        } else {
            Verdict::Unsafe
        };
        SafetyReport {
            verdict,
            mode,
            hints,
            iterations,
        }
    }

    pub fn is_safe(&self) -> bool {
        self.verdict == Verdict::Safe
    }
}

/// Position of an external atom: rule index and index into `rule.body()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExtRef {
    pub rule: usize,
    pub literal: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Predicate(String),
    External(ExtRef),
}

#[derive(Debug, Clone)]
pub struct DependencyGraph {
    graph: DiGraph<Node, ()>,
    nodes: HashMap<Node, NodeIndex>,
    component: HashMap<Node, usize>,
    cyclic: BTreeSet<usize>,
}

impl DependencyGraph {
    fn node(&mut self, n: Node) -> NodeIndex {
        if let Some(&i) = self.nodes.get(&n) {
            return i;
        }
        let i = self.graph.add_node(n.clone());
        self.nodes.insert(n, i);
        i
    }

    fn edge(&mut self, from: Node, to: Node) {
        let (a, b) = (self.node(from), self.node(to));
        self.graph.update_edge(a, b, ());
    }

    pub fn has_edge(&self, from: &Node, to: &Node) -> bool {
        match (self.nodes.get(from), self.nodes.get(to)) {
            (Some(&a), Some(&b)) => self.graph.contains_edge(a, b),
            _ => false,
        }
    }

    /// Strongly connected component id of a node, if present.
    pub fn component(&self, n: &Node) -> Option<usize> {
        self.component.get(n).copied()
    }

    /// True iff the node lies on a cycle.
    pub fn on_cycle(&self, n: &Node) -> bool {
        self.component(n).is_some_and(|c| self.cyclic.contains(&c))
    }

    pub fn is_recursive(&self, ext: ExtRef) -> bool {
        self.on_cycle(&Node::External(ext))
    }

    pub fn same_component(&self, a: &Node, b: &Node) -> bool {
        matches!((self.component(a), self.component(b)), (Some(x), Some(y)) if x == y)
    }

    /// All external atom occurrences that lie on a cycle.
    pub fn recursive_externals(&self) -> Vec<ExtRef> {
        let mut out: Vec<ExtRef> = self
            .nodes
            .keys()
            .filter_map(|n| match n {
                Node::External(e) if self.on_cycle(n) => Some(*e),
                _ => None,
            })
            .collect();
        out.sort();
        out
    }

    /// True iff some cycle contains no external atom node.
    pub fn has_ordinary_cycle(&self) -> bool {
        let mut by_comp: BTreeMap<usize, Vec<&Node>> = BTreeMap::new();
        for (n, c) in &self.component {
            by_comp.entry(*c).or_default().push(n);
        }
        by_comp
            .iter()
            .any(|(c, nodes)| self.cyclic.contains(c) && nodes.iter().all(|n| matches!(n, Node::Predicate(_))))
    }
}

/// Predicate inputs of an external atom. Without a registered source every
/// symbolic input counts as a predicate.
fn predicate_inputs(ext: &ExternalAtom, registry: &Registry) -> Vec<(usize, String)> {
    let sig = registry.lookup(&ext.name).ok().map(|s| s.signature().to_vec());
    ext.inputs
        .iter()
        .enumerate()
        .filter(|(i, _)| match &sig {
            Some(sig) => sig.get(*i) == Some(&InputKind::Predicate),
            None => true,
        })
        .filter_map(|(i, t)| t.as_symbol().map(|s| (i, s.to_string())))
        .collect()
}

fn positive_ordinary(rule: &Rule) -> impl Iterator<Item = &Atom> {
    rule.body_pos.iter().filter_map(BodyAtom::as_ordinary)
}

pub fn build_dependency_graph(program: &Program, registry: &Registry) -> DependencyGraph {
    let mut g = DependencyGraph {
        graph: DiGraph::new(),
        nodes: HashMap::new(),
        component: HashMap::new(),
        cyclic: BTreeSet::new(),
    };
    for pred in program.predicates() {
        g.node(Node::Predicate(pred));
    }
    for (r, rule) in program.rules.iter().enumerate() {
        let heads: Vec<Node> = rule.head.iter().map(|a| Node::Predicate(a.predicate.clone())).collect();
        for (l, lit) in rule.body().enumerate() {
            match lit {
                BodyAtom::Ordinary(a) => {
                    for h in &heads {
                        g.edge(Node::Predicate(a.predicate.clone()), h.clone());
                    }
                }
                BodyAtom::External(e) => {
                    let en = Node::External(ExtRef { rule: r, literal: l });
                    g.node(en.clone());
                    for (_, p) in predicate_inputs(e, registry) {
                        g.edge(Node::Predicate(p), en.clone());
                    }
                    let input_vars = e.input_variables();
                    for a in positive_ordinary(rule) {
                        if !a.variables().is_disjoint(&input_vars) {
                            g.edge(Node::Predicate(a.predicate.clone()), en.clone());
                        }
                    }
                    for h in &heads {
                        g.edge(en.clone(), h.clone());
                    }
                }
            }
        }
    }
    for (c, comp) in tarjan_scc(&g.graph).into_iter().enumerate() {
        let cyclic = comp.len() > 1 || comp.iter().any(|&n| g.graph.contains_edge(n, n));
        if cyclic {
            g.cyclic.insert(c);
        }
        for n in comp {
            g.component.insert(g.graph[n].clone(), c);
        }
    }
    g
}

/// True iff some head predicate of the rule is on a cycle through its body.
fn rule_is_recursive(rule: &Rule, r: usize, graph: &DependencyGraph) -> bool {
    rule.head.iter().any(|h| {
        let hn = Node::Predicate(h.predicate.clone());
        rule.body().enumerate().any(|(l, b)| {
            let bn = match b {
                BodyAtom::Ordinary(a) => Node::Predicate(a.predicate.clone()),
                BodyAtom::External(_) => Node::External(ExtRef { rule: r, literal: l }),
            };
            graph.on_cycle(&hn) && graph.same_component(&hn, &bn)
        })
    })
}

fn constructing_head_terms(rule: &Rule) -> impl Iterator<Item = (&Atom, usize, &Term)> {
    rule.head.iter().flat_map(|a| {
        a.args
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t, Term::Function(..)) && !t.is_ground())
            .map(move |(k, t)| (a, k, t))
    })
}

/// Variables of `rule` that do not occur in a positive ordinary atom and
/// are not outputs of a positive external atom with bound inputs.
fn ordinary_safety_hints(program: &Program) -> Vec<Hint> {
    let mut hints = Vec::new();
    for (r, rule) in program.rules.iter().enumerate() {
        let mut bound = BTreeSet::new();
        positive_ordinary(rule).for_each(|a| a.collect_variables(&mut bound));
        loop {
            let before = bound.len();
            for e in rule.body_pos.iter().filter_map(BodyAtom::as_external) {
                if e.input_variables().is_subset(&bound) {
                    bound.extend(e.output_variables());
                }
            }
            if bound.len() == before {
                break;
            }
        }
        for v in rule.variables().difference(&bound) {
            hints.push(Hint {
                rule: r,
                variable: v.clone(),
                reason: "not bound by a positive body atom".into(),
            });
        }
    }
    hints
}

/// Strong safety: ordinary safety, plus every output variable of a
/// recursive external atom must also occur in a positive ordinary body atom
/// over a predicate outside the external atom's cycle.
pub fn check_strong_safety(program: &Program, graph: &DependencyGraph) -> SafetyReport {
    let ordinary = ordinary_safety_hints(program);
    if !ordinary.is_empty() {
        return SafetyReport::from_hints(SafetyMode::Strong, ordinary, 0);
    }
    let mut hints = Vec::new();
    for (r, rule) in program.rules.iter().enumerate() {
        for (l, lit) in rule.body().enumerate() {
            let BodyAtom::External(e) = lit else { continue };
            let en = Node::External(ExtRef { rule: r, literal: l });
            if !graph.on_cycle(&en) {
                continue;
            }
            for v in e.output_variables() {
                let domain_bound = positive_ordinary(rule).any(|a| {
                    a.variables().contains(&v) && !graph.same_component(&Node::Predicate(a.predicate.clone()), &en)
                });
                if !domain_bound {
                    hints.push(Hint {
                        rule: r,
                        variable: v,
                        reason: format!("output of recursive external atom {e} may introduce new values"),
                    });
                }
            }
        }
        if rule_is_recursive(rule, r, graph) {
            for (a, k, t) in constructing_head_terms(rule) {
                for v in t.variables() {
                    hints.push(Hint {
                        rule: r,
                        variable: v,
                        reason: format!("recursive rule builds new terms at argument {k} of {}", a.predicate),
                    });
                }
            }
        }
    }
    SafetyReport::from_hints(SafetyMode::Strong, hints, 0)
}

/// Read-only view of the liberal fixpoint state, passed to plugins.
pub struct BoundednessView<'a> {
    program: &'a Program,
    infinite_vars: &'a BTreeSet<(usize, String)>,
    infinite_attrs: &'a BTreeSet<(String, usize)>,
}

impl BoundednessView<'_> {
    pub fn program(&self) -> &Program {
        self.program
    }

    /// Whether variable `var` of rule `rule` is currently considered bounded.
    pub fn is_bounded(&self, rule: usize, var: &str) -> bool {
        !self.infinite_vars.contains(&(rule, var.to_string()))
    }

    pub fn is_term_bounded(&self, rule: usize, term: &Term) -> bool {
        term.variables().iter().all(|v| self.is_bounded(rule, v))
    }

    pub fn is_predicate_finite(&self, pred: &str) -> bool {
        !self.infinite_attrs.iter().any(|(p, _)| p == pred)
    }
}

/// Custom finiteness knowledge. A plugin must only claim boundedness it can
/// guarantee; claims are consulted in every round of the fixpoint.
pub trait SafetyPlugin: Send + Sync {
    /// Variables of rule `rule` guaranteed to take finitely many values
    /// given the current state.
    fn bounded_variables(&self, rule: usize, view: &BoundednessView<'_>) -> Vec<String>;
}

impl<F> SafetyPlugin for F
where
    F: Fn(usize, &BoundednessView<'_>) -> Vec<String> + Send + Sync,
{
    fn bounded_variables(&self, rule: usize, view: &BoundednessView<'_>) -> Vec<String> {
        self(rule, view)
    }
}

struct ExtInfo<'a> {
    literal: usize,
    atom: &'a ExternalAtom,
    props: ExtSourceProperties,
    kinds: Vec<InputKind>,
    recursive: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum OrderKind {
    General,
    Strlen,
}

pub fn check_liberal_safety(
    program: &Program,
    graph: &DependencyGraph,
    registry: &Registry,
    plugins: &[Arc<dyn SafetyPlugin>],
) -> Result<SafetyReport, LinkError> {
    // resolved externals per rule (positive occurrences bind, negative ones do not)
    let mut exts: Vec<Vec<ExtInfo>> = Vec::with_capacity(program.rules.len());
    for (r, rule) in program.rules.iter().enumerate() {
        let mut infos = Vec::new();
        for (l, lit) in rule.body_pos.iter().enumerate() {
            let BodyAtom::External(e) = lit else { continue };
            let (source, props) = registry.resolve(e)?;
            infos.push(ExtInfo {
                literal: l,
                atom: e,
                props,
                kinds: source.signature().to_vec(),
                recursive: graph.is_recursive(ExtRef { rule: r, literal: l }),
            });
        }
        exts.push(infos);
    }

    // well-ordering kinds per component
    let mut orders: BTreeMap<usize, BTreeSet<u8>> = BTreeMap::new();
    for (r, infos) in exts.iter().enumerate() {
        for info in infos {
            let Some(c) = graph.component(&Node::External(ExtRef {
                rule: r,
                literal: info.literal,
            })) else {
                continue;
            };
            if !info.props.wellordering.is_empty() {
                orders.entry(c).or_default().insert(0);
            }
            if !info.props.wellordering_strlen.is_empty() {
                orders.entry(c).or_default().insert(1);
            }
        }
    }
    // Two different orderings on one cycle may undo each other, so each such
    // component relies on one kind. Safe iff some choice of kinds is safe;
    // more candidate kinds never hurt, keeping the check monotonic in the
    // declared properties.
    let mixed: Vec<usize> = orders
        .iter()
        .filter(|(_, k)| k.len() > 1)
        .map(|(c, _)| *c)
        .take(MAX_ORDER_CHOICES)
        .collect();
    let mut best: Option<SafetyReport> = None;
    for mask in 0u32..1 << mixed.len() {
        let choice: HashMap<usize, OrderKind> = mixed
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                (
                    c,
                    if mask >> i & 1 == 0 {
                        OrderKind::General
                    } else {
                        OrderKind::Strlen
                    },
                )
            })
            .collect();
        let report = liberal_fixpoint(program, graph, &exts, plugins, &orders, &choice);
        if report.is_safe() {
            return Ok(report);
        }
        if best.as_ref().is_none_or(|b| report.hints.len() < b.hints.len()) {
            best = Some(report);
        }
    }
    Ok(best.expect("at least one choice"))
}

/// Components with mixed well-orderings beyond this many fall back to
/// ignoring well-orderings there.
const MAX_ORDER_CHOICES: usize = 8;

fn liberal_fixpoint(
    program: &Program,
    graph: &DependencyGraph,
    exts: &[Vec<ExtInfo>],
    plugins: &[Arc<dyn SafetyPlugin>],
    orders: &BTreeMap<usize, BTreeSet<u8>>,
    choice: &HashMap<usize, OrderKind>,
) -> SafetyReport {
    let order_allowed = |r: usize, info: &ExtInfo, kind: OrderKind| -> bool {
        let Some(c) = graph.component(&Node::External(ExtRef {
            rule: r,
            literal: info.literal,
        })) else {
            return true;
        };
        match choice.get(&c) {
            Some(k) => *k == kind,
            // mixed beyond the choice limit: use neither
            None => orders.get(&c).is_none_or(|k| k.len() < 2),
        }
    };

    let mut infinite_attrs: BTreeSet<(String, usize)> = BTreeSet::new();
    for (r, rule) in program.rules.iter().enumerate() {
        if rule_is_recursive(rule, r, graph) {
            for (a, k, _) in constructing_head_terms(rule) {
                infinite_attrs.insert((a.predicate.clone(), k));
            }
        }
    }
    let mut infinite_vars: BTreeSet<(usize, String)> = BTreeSet::new();
    let rule_vars = program.rule_variables();
    let mut iterations = 0;
    let mut roots: BTreeSet<(usize, String)> = BTreeSet::new();

    loop {
        let view = BoundednessView {
            program,
            infinite_vars: &infinite_vars,
            infinite_attrs: &infinite_attrs,
        };
        let mut newly = Vec::new();
        for (r, rule) in program.rules.iter().enumerate() {
            let plugin_bounded: BTreeSet<String> = plugins.iter().flat_map(|p| p.bounded_variables(r, &view)).collect();
            for v in &rule_vars[r] {
                if infinite_vars.contains(&(r, v.clone())) || plugin_bounded.contains(v) {
                    continue;
                }
                let ordinary_bound = positive_ordinary(rule).any(|a| {
                    a.args
                        .iter()
                        .enumerate()
                        .any(|(k, t)| t.variables().contains(v) && !infinite_attrs.contains(&(a.predicate.clone(), k)))
                });
                let external_bound = exts[r].iter().any(|info| {
                    info.atom.outputs.iter().enumerate().any(|(j, t)| {
                        t.variables().contains(v) && output_finite(r, info, j, &view, |k| order_allowed(r, info, k))
                    })
                });
                if !ordinary_bound && !external_bound {
                    newly.push((r, v.clone()));
                }
            }
        }
        if newly.is_empty() {
            break;
        }
        iterations += 1;
        if roots.is_empty() {
            roots = newly.iter().cloned().collect();
        }
        infinite_vars.extend(newly);
        for (r, rule) in program.rules.iter().enumerate() {
            for a in &rule.head {
                for (k, t) in a.args.iter().enumerate() {
                    if t.variables().iter().any(|v| infinite_vars.contains(&(r, v.clone()))) {
                        infinite_attrs.insert((a.predicate.clone(), k));
                    }
                }
            }
        }
    }

    // report the origins of infinity: variables without any finite binder
    // in the first round, not those that merely inherit it
    let hints = roots
        .iter()
        .map(|(r, v)| Hint {
            rule: *r,
            variable: v.clone(),
            reason: liberal_reason(&program.rules[*r], &exts[*r], v, &infinite_attrs),
        })
        .collect();
    SafetyReport::from_hints(SafetyMode::Liberal, hints, iterations)
}

fn input_finite(r: usize, info: &ExtInfo, i: usize, view: &BoundednessView<'_>) -> bool {
    let term = &info.atom.inputs[i];
    match info.kinds.get(i) {
        Some(InputKind::Predicate) => term.as_symbol().is_none_or(|p| view.is_predicate_finite(p)),
        _ => view.is_term_bounded(r, term),
    }
}

fn output_finite(
    r: usize,
    info: &ExtInfo,
    j: usize,
    view: &BoundednessView<'_>,
    order_allowed: impl Fn(OrderKind) -> bool,
) -> bool {
    let props = &info.props;
    if props.finite_domain_outputs.contains(&j) {
        return true;
    }
    let mut relative: Vec<(usize, OrderKind)> = Vec::new();
    for &(i, o) in &props.relative_finite_domain {
        if o == j {
            relative.push((i, OrderKind::General));
        }
    }
    if order_allowed(OrderKind::General) {
        relative.extend(
            props
                .wellordering
                .iter()
                .filter(|&&(_, o)| o == j)
                .map(|&(i, _)| (i, OrderKind::General)),
        );
    }
    if order_allowed(OrderKind::Strlen) {
        relative.extend(
            props
                .wellordering_strlen
                .iter()
                .filter(|&&(_, o)| o == j)
                .map(|&(i, _)| (i, OrderKind::Strlen)),
        );
    }
    if relative
        .iter()
        .any(|&(i, _)| i < info.atom.inputs.len() && input_finite(r, info, i, view))
    {
        return true;
    }
    !info.recursive && (0..info.atom.inputs.len()).all(|i| input_finite(r, info, i, view))
}

fn liberal_reason(rule: &Rule, exts: &[ExtInfo], var: &str, infinite_attrs: &BTreeSet<(String, usize)>) -> String {
    let ordinary: Vec<String> = positive_ordinary(rule)
        .flat_map(|a| {
            a.args
                .iter()
                .enumerate()
                .filter(|(_, t)| t.variables().contains(var))
                .map(move |(k, _)| (a.predicate.clone(), k))
        })
        .filter(|attr| infinite_attrs.contains(attr))
        .map(|(p, k)| format!("{p}#{k}"))
        .collect();
    if let Some(info) = exts.iter().find(|i| i.atom.output_variables().contains(var)) {
        if info.recursive {
            return format!(
                "output of recursive external atom {} is not bounded by any declared property",
                info.atom
            );
        }
        return format!("output of external atom {} has an unbounded input", info.atom);
    }
    if ordinary.is_empty() {
        "not bound by a positive body atom".into()
    } else {
        format!("occurs only at attributes not proven finite: {}", ordinary.join(", "))
    }
}

/// Runs the check selected by `mode`.
pub fn check_safety(
    program: &Program,
    registry: &Registry,
    mode: SafetyMode,
    plugins: &[Arc<dyn SafetyPlugin>],
) -> Result<SafetyReport, LinkError> {
    registry.link(program)?;
    match mode {
        SafetyMode::Disabled => Ok(SafetyReport::from_hints(SafetyMode::Disabled, Vec::new(), 0)),
        SafetyMode::Strong => Ok(check_strong_safety(program, &build_dependency_graph(program, registry))),
        SafetyMode::Liberal => {
            let graph = build_dependency_graph(program, registry);
            check_liberal_safety(program, &graph, registry, plugins)
        }
    }
}
