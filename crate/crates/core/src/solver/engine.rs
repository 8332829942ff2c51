//! Nogood propagation and chronological backtracking over boolean
//! variables.
//!
//! Nogoods are stored as clauses (their negation) with two watched
//! literals. Clauses added during search may already be unit or violated;
//! they are kept on a rescan list and re-examined after every backtrack,
//! since flipping a decision can leave them unit without any watched
//! literal being touched.

use std::collections::HashMap;

use crate::learning::{Literal, Nogood};
use crate::syntax::Atom;

pub type Var = usize;

/// Clause literal: variable and polarity packed as `var << 1 | negative`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit((var as u32) << 1 | u32::from(!positive))
    }

    pub fn var(self) -> Var {
        (self.0 >> 1) as Var
    }

    pub fn positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn negated(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy)]
struct Decision {
    trail_pos: usize,
    lit: Lit,
    flipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Satisfied,
    Open,
    Unit(Lit),
    Conflict,
}

#[derive(Debug, Clone)]
pub struct Engine {
    values: Vec<Option<bool>>,
    trail_pos: Vec<usize>,
    trail: Vec<Lit>,
    qhead: usize,
    decisions: Vec<Decision>,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    lazy: Vec<usize>,
    rescan: bool,
    /// Decision order; the positive phase is tried first.
    order: Vec<Var>,
}

impl Engine {
    pub fn new(vars: usize) -> Engine {
        Engine {
            values: vec![None; vars],
            trail_pos: vec![0; vars],
            trail: Vec::new(),
            qhead: 0,
            decisions: Vec::new(),
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * vars],
            lazy: Vec::new(),
            rescan: false,
            order: (0..vars).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, v: Var) -> Option<bool> {
        self.values[v]
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.values[l.var()].map(|v| v == l.positive())
    }

    pub fn is_complete(&self) -> bool {
        self.trail.len() == self.values.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Assigns `l` true. The caller must ensure its variable is unassigned.
    pub fn assign(&mut self, l: Lit) {
        debug_assert!(self.values[l.var()].is_none());
        self.values[l.var()] = Some(l.positive());
        self.trail_pos[l.var()] = self.trail.len();
        self.trail.push(l);
    }

    fn status(&self, clause: &[Lit]) -> Status {
        let mut unassigned = None;
        let mut count = 0;
        for &l in clause {
            match self.lit_value(l) {
                Some(true) => return Status::Satisfied,
                None => {
                    count += 1;
                    unassigned = Some(l);
                }
                Some(false) => {}
            }
        }
        match (count, unassigned) {
            (0, _) => Status::Conflict,
            (1, Some(l)) => Status::Unit(l),
            _ => Status::Open,
        }
    }

    /// Watch order: true or unassigned literals first, then false ones from
    /// the most recently assigned.
    fn rank(&self, l: Lit) -> (u8, usize) {
        match self.lit_value(l) {
            Some(true) | None => (0, 0),
            Some(false) => (1, usize::MAX - self.trail_pos[l.var()]),
        }
    }

    fn choose_watches(&self, clause: &mut [Lit]) {
        for k in 0..clause.len().min(2) {
            let best = (k..clause.len()).min_by_key(|&i| self.rank(clause[i])).unwrap();
            clause.swap(k, best);
        }
    }

    /// Adds the clause of nogood literals `lits` (which must not all hold).
    /// Returns false if the nogood is empty, i.e. unsatisfiable.
    pub fn add_nogood(&mut self, lits: &[Lit]) -> bool {
        let mut clause: Vec<Lit> = lits.iter().map(|l| l.negated()).collect();
        clause.sort();
        clause.dedup();
        if clause.is_empty() {
            return false;
        }
        if clause.windows(2).any(|w| w[0].var() == w[1].var()) {
            return true; // tautology
        }
        let searching = !self.trail.is_empty();
        if searching {
            self.choose_watches(&mut clause);
        }
        let idx = self.clauses.len();
        if clause.len() >= 2 {
            self.watches[clause[0].code()].push(idx);
            self.watches[clause[1].code()].push(idx);
        }
        if searching || clause.len() == 1 {
            self.lazy.push(idx);
            self.rescan = true;
        }
        self.clauses.push(clause);
        true
    }

    fn unwatch(&mut self, l: Lit, c: usize) {
        let ws = &mut self.watches[l.code()];
        if let Some(i) = ws.iter().position(|&x| x == c) {
            ws.swap_remove(i);
        }
    }

    fn rescan_lazy(&mut self) -> Option<usize> {
        self.rescan = false;
        for i in 0..self.lazy.len() {
            let c = self.lazy[i];
            let mut clause = std::mem::take(&mut self.clauses[c]);
            let status = self.status(&clause);
            if clause.len() >= 2 && status != Status::Satisfied {
                let old = (clause[0], clause[1]);
                self.choose_watches(&mut clause);
                if (clause[0], clause[1]) != old {
                    self.unwatch(old.0, c);
                    self.unwatch(old.1, c);
                    self.watches[clause[0].code()].push(c);
                    self.watches[clause[1].code()].push(c);
                }
            }
            self.clauses[c] = clause;
            match status {
                Status::Conflict => return Some(c),
                Status::Unit(l) => self.assign(l),
                Status::Satisfied | Status::Open => {}
            }
        }
        None
    }

    /// Unit propagation to a fixpoint. Returns the index of a violated
    /// clause on conflict.
    pub fn propagate(&mut self) -> Option<usize> {
        if self.rescan {
            if let Some(c) = self.rescan_lazy() {
                return Some(c);
            }
        }
        while self.qhead < self.trail.len() {
            let falsified = self.trail[self.qhead].negated();
            self.qhead += 1;
            let watchers = std::mem::take(&mut self.watches[falsified.code()]);
            let mut kept = Vec::with_capacity(watchers.len());
            let mut conflict = None;
            for (n, &c) in watchers.iter().enumerate() {
                if conflict.is_some() {
                    kept.extend_from_slice(&watchers[n..]);
                    break;
                }
                let mut clause = std::mem::take(&mut self.clauses[c]);
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                if self.lit_value(clause[0]) == Some(true) {
                    kept.push(c);
                    self.clauses[c] = clause;
                    continue;
                }
                if let Some(k) = (2..clause.len()).find(|&k| self.lit_value(clause[k]) != Some(false)) {
                    clause.swap(1, k);
                    self.watches[clause[1].code()].push(c);
                    self.clauses[c] = clause;
                    continue;
                }
                kept.push(c);
                match self.lit_value(clause[0]) {
                    Some(false) => conflict = Some(c),
                    _ => self.assign(clause[0]),
                }
                self.clauses[c] = clause;
            }
            self.watches[falsified.code()].extend(kept);
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    pub fn set_order(&mut self, order: Vec<Var>) {
        debug_assert_eq!(order.len(), self.values.len());
        self.order = order;
    }

    /// Assigns the first unassigned variable in decision order to true.
    /// Returns false when the assignment is complete.
    pub fn decide(&mut self) -> bool {
        let Some(&v) = self.order.iter().find(|&&v| self.values[v].is_none()) else {
            return false;
        };
        let lit = Lit::new(v, true);
        self.decisions.push(Decision {
            trail_pos: self.trail.len(),
            lit,
            flipped: false,
        });
        self.assign(lit);
        true
    }

    /// Undoes everything up to the latest decision not yet flipped and
    /// flips it. Returns false when the search space is exhausted.
    pub fn backtrack(&mut self) -> bool {
        let Some(idx) = self.decisions.iter().rposition(|d| !d.flipped) else {
            return false;
        };
        let d = self.decisions[idx];
        for l in self.trail.drain(d.trail_pos..) {
            self.values[l.var()] = None;
        }
        self.qhead = self.qhead.min(d.trail_pos);
        self.decisions.truncate(idx);
        self.decisions.push(Decision {
            trail_pos: d.trail_pos,
            lit: d.lit.negated(),
            flipped: true,
        });
        self.assign(d.lit.negated());
        self.rescan = true;
        true
    }

    pub fn clause(&self, c: usize) -> &[Lit] {
        &self.clauses[c]
    }
}

/// Outcome of [`SearchState::propagate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    NoConflict,
    Conflict(Nogood),
}

/// Atom-level view of the engine: a nogood store plus a partial assignment.
#[derive(Debug, Clone)]
pub struct SearchState {
    engine: Engine,
    atoms: Vec<Atom>,
    index: HashMap<Atom, Var>,
}

impl SearchState {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> SearchState {
        let mut atoms: Vec<Atom> = atoms.into_iter().collect();
        atoms.sort();
        atoms.dedup();
        let index = atoms.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        SearchState {
            engine: Engine::new(atoms.len()),
            atoms,
            index,
        }
    }

    fn lit(&self, l: &Literal) -> Lit {
        Lit::new(self.index[&l.atom], l.positive)
    }

    /// Panics if the nogood mentions an atom outside the state.
    pub fn add_nogood(&mut self, nogood: &Nogood) -> bool {
        let lits: Vec<Lit> = nogood.literals().map(|l| self.lit(l)).collect();
        self.engine.add_nogood(&lits)
    }

    pub fn assign(&mut self, atom: &Atom, value: bool) {
        let v = self.index[atom];
        self.engine.assign(Lit::new(v, value));
    }

    pub fn value(&self, atom: &Atom) -> Option<bool> {
        self.index.get(atom).and_then(|&v| self.engine.value(v))
    }

    pub fn propagate(&mut self) -> Propagation {
        match self.engine.propagate() {
            None => Propagation::NoConflict,
            Some(c) => Propagation::Conflict(
                self.engine
                    .clause(c)
                    .iter()
                    .map(|l| Literal {
                        atom: self.atoms[l.var()].clone(),
                        positive: !l.positive(),
                    })
                    .collect(),
            ),
        }
    }
}
