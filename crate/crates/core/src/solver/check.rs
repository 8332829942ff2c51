//! Candidate verification: external guesses (compatibility) and
//! FLP subset-minimality.

use std::cell::Cell;
use std::collections::{BTreeSet, HashMap};

use super::engine::{Engine, Lit};
use super::{SolveError, SolveOptions, Stats};
use crate::extsources::{evaluate_with, Assignment, ExtError, Truth};
use crate::grounder::{ExternalGroup, GroundProgram, GroundRule};
use crate::learning::{learn_minimized, IoNogoodContext, MinimizeOptions, Nogood, Polarity};
use crate::syntax::Atom;

/// The group's input atoms with their values under `truth`.
fn input_assignment(group: &ExternalGroup, truth: impl Fn(&Atom) -> bool) -> Assignment {
    group
        .input_atoms
        .iter()
        .map(|a| (a.clone(), Truth::from_bool(truth(a))))
        .collect()
}

/// Evaluates a group under a complete assignment; every tuple of the group
/// must come out defined.
fn evaluate_group(
    group: &ExternalGroup,
    assignment: &Assignment,
    stats: &mut Stats,
) -> Result<BTreeSet<crate::extsources::Tuple>, SolveError> {
    stats.external_evaluations += 1;
    let eval = evaluate_with(group.source.as_ref(), &group.properties, &group.inputs, assignment)?;
    if let Some(t) = group.tuples.iter().find(|t| eval.truth(t) == Truth::Unknown) {
        return Err(SolveError::External(ExtError::Custom {
            source_name: group.name.clone(),
            message: format!("output {t:?} is unknown under a complete assignment"),
        }));
    }
    Ok(eval.true_tuples)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Compatibility {
    pub ok: bool,
    pub learned: Vec<Nogood>,
}

/// Checks every guessed replacement atom of `candidate` (its set of true
/// atoms) against the oracle and, if enabled, learns an io-nogood for each
/// evaluated tuple regardless of whether the guess was right.
pub fn compatibility_check(
    candidate: &BTreeSet<Atom>,
    ground: &GroundProgram,
    options: &SolveOptions,
    stats: &mut Stats,
) -> Result<Compatibility, SolveError> {
    let mut result = Compatibility {
        ok: true,
        learned: Vec::new(),
    };
    let minimize = if options.minimize_enabled() {
        options.minimize
    } else {
        MinimizeOptions::NONE
    };
    for group in &ground.groups {
        let assignment = input_assignment(group, |a| candidate.contains(a));
        let true_tuples = evaluate_group(group, &assignment, stats)?;
        for tuple in &group.tuples {
            let replacement = group.replacement(tuple);
            let actual = true_tuples.contains(tuple);
            if candidate.contains(&replacement) != actual {
                result.ok = false;
            }
            if !options.io_learning {
                continue;
            }
            let ctx = IoNogoodContext {
                source: group.source.as_ref(),
                properties: &group.properties,
                inputs: &group.inputs,
                input_atoms: &group.input_atoms,
                assignment: &assignment,
                tuple: tuple.clone(),
                replacement,
                polarity: if actual {
                    Polarity::OutputTrue
                } else {
                    Polarity::OutputFalse
                },
                oracle_calls: Cell::new(0),
            };
            let nogood = learn_minimized(&ctx, &minimize)?;
            stats.external_evaluations += ctx.oracle_calls.get();
            result.learned.push(nogood);
        }
    }
    Ok(result)
}

/// Rules whose body holds in the candidate.
fn reduct<'g>(ground: &'g GroundProgram, candidate: &BTreeSet<Atom>) -> Vec<&'g GroundRule> {
    ground
        .rules
        .iter()
        .filter(|r| r.pos.iter().all(|a| candidate.contains(a)) && !r.neg.iter().any(|a| candidate.contains(a)))
        .collect()
}

/// Truth of an atom under a smaller interpretation: ordinary atoms by
/// membership, replacement atoms by the oracle under that interpretation.
struct Interpretation<'a> {
    ground: &'a GroundProgram,
    ordinary: &'a BTreeSet<Atom>,
    cache: HashMap<usize, BTreeSet<crate::extsources::Tuple>>,
}

impl Interpretation<'_> {
    fn holds(&mut self, a: &Atom, stats: &mut Stats) -> Result<bool, SolveError> {
        let Some((g, tuple)) = self.ground.replacement_map.get(a) else {
            return Ok(self.ordinary.contains(a));
        };
        if !self.cache.contains_key(g) {
            let group = &self.ground.groups[*g];
            let assignment = input_assignment(group, |x| self.ordinary.contains(x));
            let t = evaluate_group(group, &assignment, stats)?;
            self.cache.insert(*g, t);
        }
        Ok(self.cache[g].contains(tuple))
    }

    fn is_model(&mut self, rules: &[&GroundRule], stats: &mut Stats) -> Result<bool, SolveError> {
        for r in rules {
            let mut body = true;
            for a in &r.pos {
                if !self.holds(a, stats)? {
                    body = false;
                    break;
                }
            }
            if body {
                for a in &r.neg {
                    if self.holds(a, stats)? {
                        body = false;
                        break;
                    }
                }
            }
            if body && !r.head.iter().any(|h| self.ordinary.contains(h)) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// True iff no interpretation whose true atoms form a proper subset of the
/// candidate's is a model of the FLP reduct. External atoms in the reduct
/// are re-evaluated under each smaller interpretation.
pub fn flp_check(
    candidate: &BTreeSet<Atom>,
    ground: &GroundProgram,
    options: &SolveOptions,
    stats: &mut Stats,
) -> Result<bool, SolveError> {
    stats.flp_checks += 1;
    let rules = reduct(ground, candidate);
    let facts = ground.facts();
    let free: Vec<Atom> = candidate
        .iter()
        .filter(|a| !ground.is_replacement(a) && !facts.contains(a))
        .cloned()
        .collect();
    if free.is_empty() {
        return Ok(true);
    }
    if options.flp_fallback && (free.len() > options.flp_cap || free.len() > options.flp_search_above) {
        return flp_search(ground, &rules, &facts, &free, stats);
    }
    if free.len() > options.flp_cap {
        return Err(SolveError::CheckExplosion {
            atoms: free.len(),
            cap: options.flp_cap,
        });
    }
    let full = (1u64 << free.len()) - 1;
    for mask in 0..full {
        let ordinary: BTreeSet<Atom> = facts
            .iter()
            .map(|a| (*a).clone())
            .chain(
                free.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, a)| a.clone()),
            )
            .collect();
        let mut interp = Interpretation {
            ground,
            ordinary: &ordinary,
            cache: HashMap::new(),
        };
        if interp.is_model(&rules, stats)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Search-based minimality check: enumerates models of the reduct over the
/// free atoms (facts fixed true, everything outside the candidate fixed
/// false) with at least one free atom false, guessing external values and
/// verifying them like the main search.
fn flp_search(
    ground: &GroundProgram,
    rules: &[&GroundRule],
    facts: &BTreeSet<&Atom>,
    free: &[Atom],
    stats: &mut Stats,
) -> Result<bool, SolveError> {
    let mut vars: Vec<Atom> = free.to_vec();
    for r in rules {
        for a in r.pos.iter().chain(&r.neg) {
            if ground.is_replacement(a) {
                vars.push(a.clone());
            }
        }
    }
    vars.sort();
    vars.dedup();
    let index: HashMap<&Atom, usize> = vars.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut engine = Engine::new(vars.len());

    // atoms outside the search: facts true, everything else false
    let fixed = |a: &Atom| -> Option<bool> { (!index.contains_key(a)).then(|| facts.contains(a)) };
    'rules: for r in rules {
        let mut lits = Vec::new();
        for (atoms, body_value) in [(&r.pos, true), (&r.neg, false), (&r.head, false)] {
            for a in atoms {
                match fixed(a) {
                    Some(v) if v == body_value => {}
                    Some(_) => continue 'rules,
                    None => lits.push(Lit::new(index[a], body_value)),
                }
            }
        }
        if !engine.add_nogood(&lits) {
            return Ok(false);
        }
    }
    let all_true: Vec<Lit> = free.iter().map(|a| Lit::new(index[a], true)).collect();
    engine.add_nogood(&all_true);

    loop {
        if engine.propagate().is_some() {
            if !engine.backtrack() {
                return Ok(true);
            }
            continue;
        }
        if engine.decide() {
            continue;
        }
        let ordinary: BTreeSet<Atom> = facts
            .iter()
            .map(|a| (*a).clone())
            .chain(free.iter().filter(|a| engine.value(index[a]) == Some(true)).cloned())
            .collect();
        let mut interp = Interpretation {
            ground,
            ordinary: &ordinary,
            cache: HashMap::new(),
        };
        let mut wrong = Vec::new();
        for (i, a) in vars.iter().enumerate() {
            if ground.is_replacement(a) && interp.holds(a, stats)? != engine.value(i).unwrap() {
                wrong.push(i);
            }
        }
        if wrong.is_empty() {
            return Ok(false);
        }
        // block: same free input atoms, same wrong guess
        for i in wrong {
            let (g, _) = ground.replacement_map[&vars[i]];
            let mut lits: Vec<Lit> = ground.groups[g]
                .input_atoms
                .iter()
                .filter_map(|a| index.get(a).map(|&v| Lit::new(v, engine.value(v).unwrap())))
                .collect();
            lits.push(Lit::new(i, engine.value(i).unwrap()));
            engine.add_nogood(&lits);
        }
        if !engine.backtrack() {
            return Ok(true);
        }
    }
}
