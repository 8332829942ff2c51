//! Property-based checks on parsing, oracles, grounding supersets and
//! safety.

mod common;

use std::collections::BTreeSet;

use common::*;
use hexsolve::extsources::{builtins, evaluate, input_predicates, Assignment, Registry, Truth};
use hexsolve::safety::{check_safety, SafetyMode};
use hexsolve::syntax::{parse_program, unparse, Atom, Program, PropertySpec, PropertyType, Term};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn pq_atoms() -> Vec<Atom> {
    let mut out = Vec::new();
    for p in ["p", "q"] {
        for c in ["a", "b", "c"] {
            out.push(Atom::new(p, vec![Term::sym(c)]));
        }
    }
    out
}

fn truth(k: u8) -> Truth {
    match k % 3 {
        0 => Truth::False,
        1 => Truth::True,
        _ => Truth::Unknown,
    }
}

proptest! {
    #[test]
    fn parse_unparse_round_trip(seed in any::<u64>()) {
        let text = random_ground_program(&mut StdRng::seed_from_u64(seed));
        let p = parse_program(&text).unwrap();
        let again = parse_program(&unparse(&p)).unwrap();
        prop_assert_eq!(p, again);
    }

    #[test]
    fn partial_answers_are_knowledge_monotonic(
        partial in proptest::collection::vec(0u8..3, 6),
        fill in proptest::collection::vec(any::<bool>(), 6),
        which in 0usize..2,
    ) {
        let sources: Vec<_> = builtins::all().into_iter().filter(|s| s.properties().provides_partial_answer).collect();
        prop_assume!(!sources.is_empty());
        let source = &sources[which % sources.len()];
        let inputs = vec![Term::sym("p"), Term::sym("q")];
        prop_assume!(source.signature().len() == 2);
        let atoms = pq_atoms();
        let a: Assignment = atoms.iter().cloned().zip(partial.iter().map(|&k| truth(k))).collect();
        let extended: Assignment = atoms
            .iter()
            .zip(partial.iter().zip(&fill))
            .map(|(x, (&k, &b))| {
                let v = truth(k);
                (x.clone(), if v == Truth::Unknown { Truth::from_bool(b) } else { v })
            })
            .collect();
        let before = evaluate(source.as_ref(), &inputs, &a).unwrap();
        let after = evaluate(source.as_ref(), &inputs, &extended).unwrap();
        for c in ["a", "b", "c"] {
            let t = vec![Term::sym(c)];
            let v = before.truth(&t);
            if v != Truth::Unknown {
                prop_assert_eq!(after.truth(&t), v, "tuple {} of &{}", c, source.name());
            }
        }
    }

    #[test]
    fn grounding_superset_is_sound(potential_mask in 0u32..64) {
        let atoms = pq_atoms();
        let potential: BTreeSet<Atom> =
            atoms.iter().enumerate().filter(|(i, _)| potential_mask >> i & 1 == 1).map(|(_, a)| a.clone()).collect();
        let pot: Vec<&Atom> = potential.iter().collect();
        for source in builtins::all() {
            let inputs: Vec<Term> = match source.signature().len() {
                1 if input_predicates(source.as_ref(), &[Term::sym("p")]).len() == 1 => vec![Term::sym("p")],
                2 if input_predicates(source.as_ref(), &[Term::sym("p"), Term::sym("q")]).len() == 2 => {
                    vec![Term::sym("p"), Term::sym("q")]
                }
                _ => continue,
            };
            let superset = source.grounding_superset(&inputs, &potential).unwrap();
            for m in 0u32..1 << pot.len() {
                let a: Assignment = pot
                    .iter()
                    .enumerate()
                    .map(|(i, x)| ((*x).clone(), Truth::from_bool(m >> i & 1 == 1)))
                    .collect();
                let eval = evaluate(source.as_ref(), &inputs, &a).unwrap();
                for t in &eval.true_tuples {
                    prop_assert!(superset.contains(t), "&{} output {:?} missing from superset", source.name(), t);
                }
            }
        }
    }

    #[test]
    fn adding_a_property_never_breaks_safety(index in 0usize..SAFETY_CORPUS.len(), tag in 0usize..4) {
        let reg = Registry::with_builtins();
        let p = parse_program(SAFETY_CORPUS[index]).unwrap();
        let before = check_safety(&p, &reg, SafetyMode::Liberal, &[]).unwrap();
        let spec = match tag {
            0 => PropertySpec::new(PropertyType::FiniteDomain, vec![hexsolve::syntax::PropertyParam::Index(0)]),
            1 => PropertySpec::new(PropertyType::Functional, vec![]),
            2 => PropertySpec::new(PropertyType::FiniteFiber, vec![]),
            _ => PropertySpec::new(
                PropertyType::WellOrdering,
                vec![hexsolve::syntax::PropertyParam::Index(0), hexsolve::syntax::PropertyParam::Index(0)],
            ),
        };
        let tagged = add_tag(&p, &spec, &reg);
        prop_assume!(tagged != p);
        let after = check_safety(&tagged, &reg, SafetyMode::Liberal, &[]).unwrap();
        prop_assert!(!before.is_safe() || after.is_safe(), "{} became unsafe with {}", SAFETY_CORPUS[index], spec);
    }
}

/// Adds `spec` to every external atom it is well-formed for.
fn add_tag(p: &Program, spec: &PropertySpec, reg: &Registry) -> Program {
    let mut out = p.clone();
    for rule in &mut out.rules {
        for lit in rule.body_pos.iter_mut().chain(rule.body_neg.iter_mut()) {
            if let hexsolve::syntax::BodyAtom::External(e) = lit {
                if spec.ptype == PropertyType::FiniteDomain && e.outputs.is_empty() {
                    continue;
                }
                if spec.ptype == PropertyType::WellOrdering && (e.outputs.is_empty() || e.inputs.is_empty()) {
                    continue;
                }
                if reg.resolve(e).is_ok() && !e.tag_properties.contains(spec) {
                    e.tag_properties.push(spec.clone());
                }
            }
        }
    }
    out
}

#[test]
fn liberal_safety_subsumes_strong_safety() {
    let reg = Registry::with_builtins();
    let mut strong_safe = 0;
    for text in SAFETY_CORPUS {
        let p = parse_program(text).unwrap();
        let strong = check_safety(&p, &reg, SafetyMode::Strong, &[]).unwrap();
        let liberal = check_safety(&p, &reg, SafetyMode::Liberal, &[]).unwrap();
        if strong.is_safe() {
            strong_safe += 1;
            assert!(liberal.is_safe(), "strongly but not liberally safe: {text}");
        }
        assert_eq!(strong.hints.is_empty(), strong.is_safe());
        assert_eq!(liberal.hints.is_empty(), liberal.is_safe());
    }
    assert!(strong_safe >= 3);
}
