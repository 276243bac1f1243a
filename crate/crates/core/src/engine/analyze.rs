//! First-UIP conflict analysis.

use crate::extension::Method;
use crate::program::{Literal, NogoodKind};

use super::store::Status;
use super::{view, NogoodId, Reason, SolveError, Solver, SolverView};

impl Solver {
    /// Handles a violated nogood. Returns false when the conflict is at level 0.
    pub(crate) fn resolve_conflict(&mut self, conflict: NogoodId) -> Result<bool, SolveError> {
        self.stats.conflicts += 1;
        self.schedule.on_conflict();
        if let Some(slot) = self.slots.heuristic_slot() {
            self.note(slot, Method::OnConflict, &[]);
            let v = view!(self);
            self.slots
                .heuristic()
                .unwrap()
                .on_conflict(&v)
                .map_err(|e| self.ext_error(slot, Method::OnConflict, e))?;
        }
        let max_level = self
            .store
            .literals(conflict)
            .iter()
            .map(|l| self.assignment.level(l.atom()))
            .max()
            .unwrap_or(0);
        if max_level == 0 {
            return Ok(false);
        }
        if max_level < self.assignment.decision_level() {
            self.backjump(max_level)?;
        }

        let (learned, level) = self.analyze(conflict)?;
        let uip = learned[0];
        let id = self.store.push(learned.clone(), NogoodKind::Learned);
        self.stats.learned += 1;
        self.store.bump_activity(id);
        self.notify_learning(&learned)?;
        self.backjump(level)?;
        self.store.attach(id, &self.assignment);
        if self.config.audit {
            self.audit.learned_checked += 1;
            let status = self.store.status(id, &self.assignment);
            if status != Status::Unit(uip) {
                self.audit.violations.push(format!(
                    "learned nogood {:?} is {:?} after backjumping to level {level}",
                    learned, status
                ));
            }
        }
        self.assignment.assign(uip.complement(), Reason::Nogood(id));
        self.stats.propagations += 1;
        self.minisat.decay();
        self.store.decay_activity();
        Ok(true)
    }

    /// Resolves the violated nogood against reasons of current-level literals, in reverse
    /// trail order, until one current-level literal remains. Returns the learned nogood with
    /// that literal first, and the backjump level.
    pub(crate) fn analyze(&mut self, conflict: NogoodId) -> Result<(Vec<Literal>, u32), SolveError> {
        let level = self.assignment.decision_level();
        let mut seen = vec![false; self.assignment.num_atoms() + 1];
        let mut learned = Vec::new();
        let mut counter = 0usize;
        let mut lits = self.store.literals(conflict).to_vec();
        if self.store.get(conflict).kind == NogoodKind::Learned {
            self.store.bump_activity(conflict);
        }
        let mut resolved: Option<Literal> = None;
        let mut index = self.assignment.trail().len();
        let uip = loop {
            for &l in &lits {
                if Some(l.complement()) == resolved {
                    continue;
                }
                let atom = l.atom();
                let lvl = self.assignment.level(atom);
                if seen[atom.index()] || lvl == 0 {
                    continue;
                }
                seen[atom.index()] = true;
                self.bump_in_conflict(l)?;
                if lvl == level {
                    counter += 1;
                } else {
                    learned.push(l);
                }
            }
            let p = loop {
                index -= 1;
                let p = self.assignment.trail()[index];
                if seen[p.atom().index()] {
                    break p;
                }
            };
            counter -= 1;
            if counter == 0 {
                break p;
            }
            lits = self.reason_nogood(p)?;
            resolved = Some(p);
        };
        learned.insert(0, uip);
        let back = learned[1..]
            .iter()
            .map(|l| self.assignment.level(l.atom()))
            .max()
            .unwrap_or(0);
        if self.config.audit {
            let at_level = learned
                .iter()
                .filter(|l| self.assignment.level(l.atom()) == level)
                .count();
            if at_level != 1 || learned.iter().any(|&l| !self.assignment.is_true(l)) {
                self.audit
                    .violations
                    .push(format!("learned nogood {learned:?} is not first-UIP at level {level}"));
            }
        }
        Ok((learned, back))
    }

    fn bump_in_conflict(&mut self, lit: Literal) -> Result<(), SolveError> {
        self.minisat.bump(lit.atom());
        if let Some(slot) = self.slots.heuristic_slot() {
            self.note(slot, Method::OnLitInConflict, &[lit]);
            let v = view!(self);
            self.slots
                .heuristic()
                .unwrap()
                .on_lit_in_conflict(lit, &v)
                .map_err(|e| self.ext_error(slot, Method::OnLitInConflict, e))?;
        }
        Ok(())
    }

    /// The nogood that forced the true literal `p`, fetching it from the propagator if needed.
    fn reason_nogood(&mut self, p: Literal) -> Result<Vec<Literal>, SolveError> {
        let id = match self.assignment.reason(p.atom()) {
            Reason::Nogood(id) => id,
            Reason::Extension(slot) => self.fetch_reason(slot, p)?,
            r => unreachable!("literal {p:?} with reason {r:?} resolved during analysis"),
        };
        if self.store.get(id).kind == NogoodKind::Learned {
            self.store.bump_activity(id);
        }
        let lits = self.store.literals(id).to_vec();
        if self.config.audit {
            self.audit.reasons_checked += 1;
            let pos = self.assignment.position(p.atom());
            let ok = lits.contains(&p.complement())
                && lits.iter().filter(|&&l| l != p.complement()).all(|&l| {
                    self.assignment.is_true(l) && self.assignment.position(l.atom()) < pos
                });
            if !ok {
                self.audit
                    .violations
                    .push(format!("nogood {lits:?} is not a valid reason for {p:?}"));
            }
        }
        Ok(lits)
    }
}
