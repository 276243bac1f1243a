//! A VSIDS-style branching heuristic built on the extension interface.
//!
//! Every atom starts with score 0 and gains 1 each time it occurs in a learned constraint.
//! After every [`VSIDS_PERIOD`] conflicts all scores are halved and the branching order is
//! recomputed: descending score, ties broken by ascending atom id. Between rescorings the order
//! is fixed. The heuristic branches on the negative literal of the first undefined atom.

use crate::extension::{ExtResult, Heuristic, HeuristicDirective, Priority, Propagator, SolverView};
use crate::program::{Atom, Literal};

pub const VSIDS_PERIOD: u64 = 256;

#[derive(Debug, Default)]
pub struct Vsids {
    scores: Vec<u64>,
    order: Vec<Atom>,
    assigned: Vec<bool>,
    conflicts: u64,
}

impl Vsids {
    pub fn new() -> Vsids {
        Vsids::default()
    }

    pub fn score(&self, atom: Atom) -> u64 {
        self.scores.get(atom.index()).copied().unwrap_or(0)
    }

    pub fn set_score(&mut self, atom: Atom, score: u64) {
        self.scores[atom.index()] = score;
    }

    /// Conflicts since the last rescoring.
    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    pub fn order(&self) -> &[Atom] {
        &self.order
    }

    /// Sorts atoms by descending score. The sort is stable, so equal scores keep ascending ids.
    pub fn reorder(&mut self) {
        self.order.sort_by_key(|a| a.index());
        let scores = &self.scores;
        self.order.sort_by(|a, b| scores[b.index()].cmp(&scores[a.index()]));
    }

    fn rescore(&mut self) {
        for s in &mut self.scores {
            *s /= 2;
        }
        self.reorder();
    }
}

impl Propagator for Vsids {
    fn name(&self) -> &str {
        "vsids"
    }

    fn priority(&self) -> Priority {
        Priority::Post
    }

    fn attach_literals(&mut self, view: &SolverView) -> ExtResult<Vec<Literal>> {
        let n = view.atoms().len();
        self.scores = vec![0; n + 1];
        self.assigned = vec![false; n + 1];
        self.order = view.atoms().iter().map(|(a, _)| a).collect();
        self.conflicts = 0;
        Ok(self.order.iter().flat_map(|a| [a.pos(), a.neg()]).collect())
    }

    fn on_literals_true(&mut self, lits: &[Literal], _: &SolverView) -> ExtResult<Vec<Literal>> {
        for l in lits {
            self.assigned[l.atom().index()] = true;
        }
        Ok(Vec::new())
    }

    fn on_literals_undefined(&mut self, lits: &[Literal], _: &SolverView) -> ExtResult<()> {
        for l in lits {
            self.assigned[l.atom().index()] = false;
        }
        Ok(())
    }
}

impl Heuristic for Vsids {
    fn on_conflict(&mut self, _: &SolverView) -> ExtResult<()> {
        self.conflicts += 1;
        if self.conflicts == VSIDS_PERIOD {
            self.conflicts = 0;
            self.rescore();
        }
        Ok(())
    }

    fn on_learning_constraint(&mut self, lits: &[Literal], _: &SolverView) -> ExtResult<()> {
        // Constraints may mention auxiliary atoms, which are not scored.
        for l in lits {
            if let Some(s) = self.scores.get_mut(l.atom().index()) {
                *s += 1;
            }
        }
        Ok(())
    }

    fn select_literal(&mut self, _: &SolverView) -> ExtResult<HeuristicDirective> {
        Ok(match self.order.iter().find(|a| !self.assigned[a.index()]) {
            Some(a) => HeuristicDirective::Choice(a.neg()),
            None => HeuristicDirective::Minisat(1),
        })
    }
}
