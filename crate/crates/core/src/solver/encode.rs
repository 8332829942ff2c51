use std::collections::{BTreeSet, HashMap};

use crate::grounder::GroundProgram;
use crate::learning::{Literal, Nogood};
use crate::syntax::Atom;

/// Complementary guess atom of a replacement atom: `e_diff_pq(a)` ↦
/// `ne_diff_pq(a)`.
pub fn ne_atom(e: &Atom) -> Atom {
    Atom::new(format!("n{}", e.predicate), e.args.clone())
}

/// Variables and static nogoods of a ground program.
#[derive(Debug, Clone)]
pub struct Encoding {
    /// Sorted; the position of an atom is its variable.
    pub atoms: Vec<Atom>,
    pub index: HashMap<Atom, usize>,
    pub nogoods: Vec<Nogood>,
    /// (replacement atom, complementary atom)
    pub guesses: Vec<(Atom, Atom)>,
}

impl Encoding {
    pub fn var(&self, a: &Atom) -> Option<usize> {
        self.index.get(a).copied()
    }
}

/// Rule nogoods `{T body⁺, F body⁻, F head}`, `{F a}` for facts, `{T a}`
/// for ordinary atoms no rule can derive, and exactly-one nogoods for each
/// guess pair `e v ne`.
pub fn encode(ground: &GroundProgram) -> Encoding {
    let mut nogoods = Vec::new();
    let mut derivable = BTreeSet::new();
    for r in &ground.rules {
        derivable.extend(r.head.iter().cloned());
        let ng: Nogood = r
            .pos
            .iter()
            .map(|a| Literal::t(a.clone()))
            .chain(r.neg.iter().map(|a| Literal::f(a.clone())))
            .chain(r.head.iter().map(|a| Literal::f(a.clone())))
            .collect();
        // a rule with a literal and its complement in the body never fires
        if ng.is_consistent() {
            nogoods.push(ng);
        }
    }
    for a in ground.ordinary_atoms() {
        if !derivable.contains(a) {
            nogoods.push(Nogood::new([Literal::t(a.clone())]));
        }
    }
    let mut guesses = Vec::new();
    for e in ground.replacement_map.keys() {
        let ne = ne_atom(e);
        nogoods.push(Nogood::new([Literal::t(e.clone()), Literal::t(ne.clone())]));
        nogoods.push(Nogood::new([Literal::f(e.clone()), Literal::f(ne.clone())]));
        guesses.push((e.clone(), ne));
    }
    let mut atoms: Vec<Atom> = ground
        .atoms
        .iter()
        .cloned()
        .chain(guesses.iter().map(|(_, ne)| ne.clone()))
        .collect();
    atoms.sort();
    atoms.dedup();
    let index = atoms.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
    Encoding {
        atoms,
        index,
        nogoods,
        guesses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extsources::Registry;
    use crate::grounder::{ground, GroundOptions};
    use crate::syntax::parse_program;

    fn enc(text: &str) -> Vec<String> {
        let p = parse_program(text).unwrap();
        let g = ground(&p, &Registry::with_builtins(), &GroundOptions::default()).unwrap();
        encode(&g).nogoods.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn fact() {
        assert_eq!(enc("a."), vec!["{F a}"]);
    }

    #[test]
    fn rule() {
        // c is underivable, hence fixed false
        assert_eq!(
            enc("b v d. a :- b, not c."),
            vec!["{F b, F d}", "{F a, T b, F c}", "{T c}"]
        );
    }

    #[test]
    fn guess_pair() {
        let n = enc("p(a). p(b). q(b). r(X) :- &diff[p,q](X).");
        assert!(n.contains(&"{T e_diff_pq(a), T ne_diff_pq(a)}".to_string()));
        assert!(n.contains(&"{F e_diff_pq(a), F ne_diff_pq(a)}".to_string()));
    }
}
