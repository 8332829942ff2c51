//! Test oracles: brute-force answer sets computed straight from the AST,
//! a naive full grounder, and a random ground-program generator.
#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use hexsolve::extsources::{evaluate, Assignment, ExternalSource, Registry, Truth};
use hexsolve::pipeline::{run_program, Options};
use hexsolve::safety::SafetyMode;
use hexsolve::solver::SolveOptions;
use hexsolve::syntax::{parse_program, Atom, BodyAtom, ExternalAtom, Program, Rule, Term};
use rand::rngs::StdRng;
use rand::Rng;

pub type Model = BTreeSet<Atom>;

#[derive(Clone, Copy)]
enum Lit {
    Atom(usize),
    Ext(usize),
}

struct ORule {
    head: Vec<usize>,
    pos: Vec<Lit>,
    neg: Vec<Lit>,
}

/// Interpretations are bitmasks over the ordinary atoms of the program.
struct Oracle {
    atoms: Vec<Atom>,
    rules: Vec<ORule>,
    exts: Vec<(Arc<dyn ExternalSource>, ExternalAtom)>,
    cache: RefCell<HashMap<(usize, u32), bool>>,
}

impl Oracle {
    fn new(program: &Program, registry: &Registry) -> Oracle {
        assert!(
            program.rules.iter().all(Rule::is_ground),
            "oracle needs a ground program"
        );
        let mut atoms = BTreeSet::new();
        for r in &program.rules {
            atoms.extend(r.head.iter().cloned());
            atoms.extend(r.body().filter_map(BodyAtom::as_ordinary).cloned());
        }
        let atoms: Vec<Atom> = atoms.into_iter().collect();
        assert!(atoms.len() <= 20, "too many atoms for brute force");
        let idx = |a: &Atom| atoms.iter().position(|b| b == a).unwrap();
        let mut exts: Vec<(Arc<dyn ExternalSource>, ExternalAtom)> = Vec::new();
        let mut lit = |b: &BodyAtom| match b {
            BodyAtom::Ordinary(a) => Lit::Atom(idx(a)),
            BodyAtom::External(e) => {
                let (source, _) = registry.resolve(e).expect("linkable");
                exts.push((source, e.clone()));
                Lit::Ext(exts.len() - 1)
            }
        };
        let rules = program
            .rules
            .iter()
            .map(|r| ORule {
                head: r.head.iter().map(idx).collect(),
                pos: r.body_pos.iter().map(&mut lit).collect(),
                neg: r.body_neg.iter().map(&mut lit).collect(),
            })
            .collect();
        Oracle {
            atoms,
            rules,
            exts,
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn ext_true(&self, e: usize, mask: u32) -> bool {
        if let Some(v) = self.cache.borrow().get(&(e, mask)) {
            return *v;
        }
        let (source, ext) = &self.exts[e];
        let assignment: Assignment = self
            .atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| (a.clone(), Truth::True))
            .collect();
        let eval = evaluate(source.as_ref(), &ext.inputs, &assignment).expect("oracle call");
        let v = eval.truth(&ext.outputs) == Truth::True;
        self.cache.borrow_mut().insert((e, mask), v);
        v
    }

    fn holds(&self, l: Lit, mask: u32) -> bool {
        match l {
            Lit::Atom(i) => mask & (1 << i) != 0,
            Lit::Ext(e) => self.ext_true(e, mask),
        }
    }

    fn body(&self, r: &ORule, mask: u32) -> bool {
        r.pos.iter().all(|&l| self.holds(l, mask)) && r.neg.iter().all(|&l| !self.holds(l, mask))
    }

    fn satisfies(&self, r: &ORule, mask: u32) -> bool {
        !self.body(r, mask) || r.head.iter().any(|&h| mask & (1 << h) != 0)
    }

    fn answer_sets(&self) -> BTreeSet<Model> {
        let n = self.atoms.len();
        let mut out = BTreeSet::new();
        for mask in 0..(1u32 << n) {
            if !self.rules.iter().all(|r| self.satisfies(r, mask)) {
                continue;
            }
            // FLP reduct: rules whose body holds in the candidate
            let reduct: Vec<&ORule> = self.rules.iter().filter(|r| self.body(r, mask)).collect();
            let mut minimal = true;
            let mut sub = mask;
            while sub != 0 {
                sub = (sub - 1) & mask;
                if reduct.iter().all(|r| self.satisfies(r, sub)) {
                    minimal = false;
                    break;
                }
            }
            if minimal {
                out.insert(
                    (0..n)
                        .filter(|i| mask & (1 << i) != 0)
                        .map(|i| self.atoms[i].clone())
                        .collect(),
                );
            }
        }
        out
    }
}

/// FLP answer sets of a ground program by exhaustive enumeration.
pub fn brute_force(program: &Program, registry: &Registry) -> BTreeSet<Model> {
    Oracle::new(program, registry).answer_sets()
}

fn substitute(t: &Term, s: &HashMap<String, Term>) -> Term {
    match t {
        Term::Variable(v) => s[v].clone(),
        Term::Function(f, args) => Term::Function(f.clone(), args.iter().map(|a| substitute(a, s)).collect()),
        other => other.clone(),
    }
}

fn subst_atom(a: &Atom, s: &HashMap<String, Term>) -> Atom {
    Atom::new(a.predicate.clone(), a.args.iter().map(|t| substitute(t, s)).collect())
}

fn subst_body(b: &BodyAtom, s: &HashMap<String, Term>) -> BodyAtom {
    match b {
        BodyAtom::Ordinary(a) => BodyAtom::Ordinary(subst_atom(a, s)),
        BodyAtom::External(e) => BodyAtom::External(
            ExternalAtom::new(
                e.name.clone(),
                e.inputs.iter().map(|t| substitute(t, s)).collect(),
                e.outputs.iter().map(|t| substitute(t, s)).collect(),
            )
            .with_tags(e.tag_properties.clone()),
        ),
    }
}

/// Instantiates every rule with every substitution over `universe`. Only
/// meaningful when no external invents values outside the universe.
pub fn full_grounding(program: &Program, universe: &[Term]) -> Program {
    let mut rules = Vec::new();
    for r in &program.rules {
        let vars: Vec<String> = r.variables().into_iter().collect();
        let total = universe.len().pow(vars.len() as u32);
        for mut k in 0..total {
            let mut s = HashMap::new();
            for v in &vars {
                s.insert(v.clone(), universe[k % universe.len()].clone());
                k /= universe.len();
            }
            rules.push(Rule {
                head: r.head.iter().map(|a| subst_atom(a, &s)).collect(),
                body_pos: r.body_pos.iter().map(|b| subst_body(b, &s)).collect(),
                body_neg: r.body_neg.iter().map(|b| subst_body(b, &s)).collect(),
            });
        }
    }
    Program::new(rules)
}

/// Answer sets from the real pipeline, as plain atom sets.
pub fn solve_sets(program: &Program, registry: &Registry, solve: SolveOptions) -> BTreeSet<Model> {
    let opts = Options {
        safety: SafetyMode::Disabled,
        solve,
        ..Options::default()
    };
    run_program(program, registry, &opts, &[])
        .expect("pipeline")
        .answer_sets
        .into_iter()
        .map(|a| a.0)
        .collect()
}

pub fn solve_text(text: &str) -> BTreeSet<Model> {
    solve_sets(
        &parse_program(text).unwrap(),
        &Registry::with_builtins(),
        SolveOptions::default(),
    )
}

pub fn show(sets: &BTreeSet<Model>) -> String {
    let parts: Vec<String> = sets
        .iter()
        .map(|m| {
            let atoms: Vec<String> = m.iter().map(ToString::to_string).collect();
            format!("{{{}}}", atoms.join(", "))
        })
        .collect();
    parts.join(" ")
}

/// A random ground program: at most 8 rules over at most 10 ordinary atoms
/// (`p/1`, `q/1` over `a,b,c` and propositional `x,y,z`), with builtin
/// external literals `diff`, `union`, `id` and `edge`.
pub fn random_ground_program(rng: &mut StdRng) -> String {
    const CONSTS: [&str; 3] = ["a", "b", "c"];
    let mut pool: Vec<String> = Vec::new();
    for p in ["p", "q"] {
        for c in CONSTS {
            pool.push(format!("{p}({c})"));
        }
    }
    pool.extend(["x", "y", "z"].map(String::from));
    // drop some atoms so programs vary in size; 9 ≤ 10 in any case
    let keep = rng.gen_range(3..=pool.len());
    while pool.len() > keep {
        let i = rng.gen_range(0..pool.len());
        pool.remove(i);
    }
    let pick = |rng: &mut StdRng| pool[rng.gen_range(0..pool.len())].clone();
    let external = |rng: &mut StdRng| -> String {
        let c = CONSTS[rng.gen_range(0..CONSTS.len())];
        match rng.gen_range(0..6) {
            0 => format!("&diff[p,q]({c})"),
            1 => format!("&diff[q,p]({c})"),
            2 => format!("&union[p,q]({c})"),
            3 => "&id[p]()".to_string(),
            4 => "&id[q]()".to_string(),
            _ => format!("&edge[{}]({})", rng.gen_range(1..=3), rng.gen_range(1..=3)),
        }
    };
    let mut text = String::new();
    for _ in 0..rng.gen_range(2..=8) {
        let heads = match rng.gen_range(0..10) {
            0 => 0,
            1..=5 => 1,
            _ => 2,
        };
        let mut head: Vec<String> = (0..heads).map(|_| pick(rng)).collect();
        head.dedup();
        let mut body = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            body.push(pick(rng));
        }
        for _ in 0..rng.gen_range(0..=1) {
            body.push(format!("not {}", pick(rng)));
        }
        if rng.gen_bool(0.45) {
            let e = external(rng);
            body.push(if rng.gen_bool(0.7) { e } else { format!("not {e}") });
        }
        if head.is_empty() && body.is_empty() {
            continue;
        }
        text.push_str(&head.join(" v "));
        if !body.is_empty() {
            text.push_str(if head.is_empty() { ":- " } else { " :- " });
            text.push_str(&body.join(", "));
        }
        text.push_str(".\n");
    }
    text
}

use std::cell::Cell;

use hexsolve::grounder::{ground, ExternalGroup, GroundOptions, GroundProgram};
use hexsolve::learning::{
    learn_io_nogood, minimize_by_linearity, minimize_by_monotonicity, minimize_by_partial_oracle, IoNogoodContext,
    Literal, Nogood, Polarity,
};

#[derive(Debug, Default)]
pub struct MinimizationReport {
    pub nogoods: usize,
    pub violations: Vec<String>,
}

fn group_assignment(group: &ExternalGroup, mask: u64) -> Assignment {
    group
        .input_atoms
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), Truth::from_bool(mask >> i & 1 == 1)))
        .collect()
}

/// The complete assignment of an answer set: its atoms plus the true
/// replacement atoms.
fn answer_assignment(g: &GroundProgram, answer: &Model) -> BTreeSet<Atom> {
    let mut out = answer.clone();
    for group in &g.groups {
        let a: Assignment = group
            .input_atoms
            .iter()
            .map(|x| (x.clone(), Truth::from_bool(answer.contains(x))))
            .collect();
        let eval = hexsolve::extsources::evaluate_with(group.source.as_ref(), &group.properties, &group.inputs, &a)
            .expect("oracle call");
        for t in &group.tuples {
            if eval.truth(t) == Truth::True {
                out.insert(group.replacement(t));
            }
        }
    }
    out
}

fn violated(n: &Nogood, true_atoms: &BTreeSet<Atom>) -> bool {
    n.literals().all(|l| true_atoms.contains(&l.atom) == l.positive)
}

/// Learns an io-nogood for every tuple of every group under every complete
/// input assignment, runs each minimization stage (alone and chained), and
/// checks each result N' against its input N: N' ⊆ N, the replacement
/// literal is kept, every complete input assignment satisfying N' yields
/// the same output, and no answer set violates N'.
pub fn check_minimization(program: &Program, registry: &Registry) -> MinimizationReport {
    let opts = GroundOptions {
        mode: SafetyMode::Disabled,
        ..GroundOptions::default()
    };
    let g = ground(program, registry, &opts).expect("ground");
    let answers: Vec<BTreeSet<Atom>> = solve_sets(
        program,
        registry,
        SolveOptions {
            io_learning: false,
            ..SolveOptions::default()
        },
    )
    .iter()
    .map(|m| answer_assignment(&g, m))
    .collect();
    let mut report = MinimizationReport::default();
    for group in &g.groups {
        let k = group.input_atoms.len();
        assert!(k <= 10, "input universe too large for exhaustive check");
        let outputs: Vec<BTreeSet<Vec<Term>>> = (0..1u64 << k)
            .map(|mask| {
                let eval = hexsolve::extsources::evaluate_with(
                    group.source.as_ref(),
                    &group.properties,
                    &group.inputs,
                    &group_assignment(group, mask),
                )
                .expect("oracle call");
                eval.true_tuples
            })
            .collect();
        for mask in 0..1u64 << k {
            let assignment = group_assignment(group, mask);
            for tuple in &group.tuples {
                let actual = outputs[mask as usize].contains(tuple);
                let ctx = IoNogoodContext {
                    source: group.source.as_ref(),
                    properties: &group.properties,
                    inputs: &group.inputs,
                    input_atoms: &group.input_atoms,
                    assignment: &assignment,
                    tuple: tuple.clone(),
                    replacement: group.replacement(tuple),
                    polarity: if actual {
                        Polarity::OutputTrue
                    } else {
                        Polarity::OutputFalse
                    },
                    oracle_calls: Cell::new(0),
                };
                let repl = if actual {
                    Literal::f(ctx.replacement.clone())
                } else {
                    Literal::t(ctx.replacement.clone())
                };
                let props = &group.properties;
                let n0 = learn_io_nogood(&ctx);
                let lin = minimize_by_linearity(&n0, &ctx, props).expect("linearity");
                let mono = minimize_by_monotonicity(&lin, &ctx, props);
                let part = minimize_by_partial_oracle(&mono, &ctx).expect("partial");
                let stages = [
                    ("learned", &n0, n0.clone()),
                    ("linearity", &n0, lin.clone()),
                    ("monotonicity", &n0, minimize_by_monotonicity(&n0, &ctx, props)),
                    ("partial", &n0, minimize_by_partial_oracle(&n0, &ctx).expect("partial")),
                    ("chain:monotonicity", &lin, mono.clone()),
                    ("chain:partial", &mono, part.clone()),
                ];
                for (stage, before, after) in stages {
                    report.nogoods += 1;
                    let mut fail = |why: &str| {
                        report.violations.push(format!(
                            "&{}[..]{tuple:?} {stage}: {after} from {before}: {why}",
                            group.name
                        ))
                    };
                    if !after.is_subset(before) {
                        fail("not a subset");
                    }
                    if !after.contains(&repl) {
                        fail("replacement literal dropped");
                    }
                    for other in 0..1u64 << k {
                        let covered = group.input_atoms.iter().enumerate().all(|(i, a)| {
                            after
                                .literals()
                                .all(|l| l.atom != *a || l.positive == (other >> i & 1 == 1))
                        });
                        if covered && outputs[other as usize].contains(tuple) != actual {
                            fail(&format!("wrong under input mask {other:#b}"));
                            break;
                        }
                    }
                    if answers.iter().any(|a| violated(&after, a)) {
                        fail("eliminates an answer set");
                    }
                }
            }
        }
    }
    report
}

/// Small programs with at most four constants for the minimization check.
pub const SMALL_UNIVERSE: &[&str] = &[
    "p(a). p(b). q(b). r(X) :- &diff[p,q](X).",
    "p(a). p(b) v q(b). q(c) v p(c). r(X) :- &diff[p,q](X). s(X) :- &union[p,q](X).",
    "d(a). d(b). d(c). d(d). sel(X) :- d(X), not &diff[d,sel](X). :- sel(a), sel(b).",
    "d(a). d(b). p(X) v q(X) :- d(X). ok :- &id[p](). :- not ok.",
    "p(a). q(a) v q(b). u(X) :- &union[p,q](X), not &diff[q,p](X).",
    "d(a). d(b). d(c). in(X) :- d(X), not out(X). out(X) :- d(X), not in(X). :- in(X), not &diff[d,out](X).",
];

/// Non-ground programs exercising every finiteness source, for safety
/// properties.
pub const SAFETY_CORPUS: &[&str] = &[
    "start(1). scc(X) :- start(X). scc(Y) :- scc(X), &edge[X](Y).",
    "start(1). scc(X) :- start(X). scc(Y) :- scc(X), &edge[X](Y)<finitedomain 0>.",
    "start(1). scc(X) :- start(X). scc(Y) :- scc(X), &dotedge[builtin,X](Y).",
    "s(\"abc\"). s(Y) :- s(X), &tail[X](Y)<wellorderingstrlen 0 0>.",
    "s(\"abc\"). s(Y) :- s(X), &tail[X](Y).",
    "n(5). n(Y) :- n(X), &decrement[X](Y).",
    "p(a). p(b). q(b). r(X) :- &diff[p,q](X).",
    "p(a). r(X) :- p(X), &diff[p,r](X).",
    "d(\"ab\"). r(Y) :- d(X), &tail[X](Y).",
    "p(a). r(X) :- &union[p,q](X). q(X) :- r(X).",
    "p(X) :- q(X). q(a).",
    "p(X) :- not q(X).",
    "n(1). m(f(X)) :- n(X). n(X) :- m(f(X)).",
    "n(1). n(f(X)) :- n(X).",
    "e(1,2). e(2,3). t(X,Y) :- e(X,Y). t(X,Z) :- t(X,Y), e(Y,Z).",
    "s(3). s(Y) :- s(X), &tail[X](Y)<wellorderingstrlen 0 0>. s(Y) :- s(X), &decrement[X](Y).",
    "n(2). n(Y) :- n(X), &edge[X](Y)<relativefinitedomain 0 0>.",
    "a. b :- a, &id[p](). p(1) :- b.",
];
pub mod golden;

/// Guess-heavy benchmark: choose a subset of `n` elements; every chosen
/// element must be confirmed by `&diff[dom,out]`. Replacement atoms sort
/// before the guessed atoms, so external guesses are decided first.
pub fn subset_benchmark(n: usize) -> String {
    let mut text: String = (1..=n).map(|i| format!("dom({i}). ")).collect();
    text.push_str(
        "in(X) :- dom(X), not out(X). out(X) :- dom(X), not in(X). :- in(X), out(X). \
         :- in(X), not &diff[dom,out](X).",
    );
    text
}
