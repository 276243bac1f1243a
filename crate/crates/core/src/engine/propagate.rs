//! Propagation: unit propagation over nogoods interleaved with extension callbacks.

use crate::extension::{validate_reason, Method};
use crate::program::{Literal, Nogood, NogoodKind};

use super::{view, NogoodId, Reason, SolveError, Solver, SolverView, Truth};

impl Solver {
    /// Unit propagation over the nogoods only.
    pub(crate) fn propagate_nogoods(&mut self) -> Option<NogoodId> {
        while self.nogood_head < self.assignment.trail().len() {
            let lit = self.assignment.trail()[self.nogood_head];
            self.nogood_head += 1;
            if let Some(c) = self.store.propagate(lit, &mut self.assignment, &mut self.stats.propagations) {
                return Some(c);
            }
        }
        None
    }

    /// Runs propagation to a fixpoint. Eager propagators are told about each literal as soon
    /// as unit propagation settles; post propagators receive batches once nothing eager is
    /// left, in registration order. Returns a violated nogood on conflict.
    pub(crate) fn propagate(&mut self) -> Result<Option<NogoodId>, SolveError> {
        'fixpoint: loop {
            loop {
                if let Some(c) = self.propagate_nogoods() {
                    return Ok(Some(c));
                }
                if self.ext_head >= self.assignment.trail().len() {
                    break;
                }
                let lit = self.assignment.trail()[self.ext_head];
                self.ext_head += 1;
                for k in 0..self.eager_watch[lit.code()].len() {
                    let slot = self.eager_watch[lit.code()][k];
                    self.mark_notified(slot, lit);
                    self.note(slot, Method::OnLiteralTrue, &[lit]);
                    let v = view!(self);
                    let out = self
                        .slots
                        .get(slot)
                        .on_literal_true(lit, &v)
                        .map_err(|e| self.ext_error(slot, Method::OnLiteralTrue, e))?;
                    if let Some(c) = self.apply_inferences(slot, Method::OnLiteralTrue, out)? {
                        return Ok(Some(c));
                    }
                }
            }
            for k in 0..self.post_slots.len() {
                let slot = self.post_slots[k];
                let len = self.assignment.trail().len();
                let meta = &self.slots.meta[slot];
                let batch: Vec<Literal> = self.assignment.trail()[meta.post_head..len]
                    .iter()
                    .copied()
                    .filter(|l| meta.attached[l.code()])
                    .collect();
                self.slots.meta[slot].post_head = len;
                if batch.is_empty() {
                    continue;
                }
                for &l in &batch {
                    self.mark_notified(slot, l);
                }
                self.note(slot, Method::OnLiteralsTrue, &batch);
                let v = view!(self);
                let out = self
                    .slots
                    .get(slot)
                    .on_literals_true(&batch, &v)
                    .map_err(|e| self.ext_error(slot, Method::OnLiteralsTrue, e))?;
                if let Some(c) = self.apply_inferences(slot, Method::OnLiteralsTrue, out)? {
                    return Ok(Some(c));
                }
                if self.assignment.trail().len() > len {
                    continue 'fixpoint;
                }
            }
            return Ok(None);
        }
    }

    fn mark_notified(&mut self, slot: usize, lit: Literal) {
        let meta = &mut self.slots.meta[slot];
        meta.notified.push(lit);
        if self.config.audit {
            self.audit.notifications_checked += 1;
            if meta.live[lit.code()] {
                self.audit
                    .violations
                    .push(format!("{}: {} reported true twice", meta.name, lit.to_signed()));
            }
            meta.live[lit.code()] = true;
        }
    }

    /// Asserts literals inferred by an extension. A literal that is already false makes the
    /// solver fetch its reason right away; the reason is then the conflict.
    fn apply_inferences(
        &mut self,
        slot: usize,
        method: Method,
        lits: Vec<Literal>,
    ) -> Result<Option<NogoodId>, SolveError> {
        self.check_atoms(slot, method, lits.iter().map(|l| l.atom()))?;
        for lit in lits {
            match self.assignment.value(lit) {
                Truth::True => {}
                Truth::Undefined => {
                    self.assignment.assign(lit, Reason::Extension(slot));
                    self.stats.propagations += 1;
                }
                Truth::False => return self.fetch_reason(slot, lit).map(Some),
            }
        }
        Ok(None)
    }

    /// Asks an extension why it inferred `lit`, validates the answer and installs it as a
    /// constraint. For an assigned `lit` the constraint becomes its reason.
    pub(crate) fn fetch_reason(&mut self, slot: usize, lit: Literal) -> Result<NogoodId, SolveError> {
        self.note(slot, Method::GetReasonForLiteral, &[lit]);
        let v = view!(self);
        let reason = self
            .slots
            .get(slot)
            .get_reason_for_literal(lit, &v)
            .map_err(|e| self.ext_error(slot, Method::GetReasonForLiteral, e))?;
        self.check_atoms(slot, Method::GetReasonForLiteral, reason.iter().map(|l| l.atom()))?;
        validate_reason(lit, &reason, &self.assignment, self.num_program_atoms)
            .map_err(|d| self.violation(slot, Method::GetReasonForLiteral, d))?;
        let lits = Nogood::new(reason, NogoodKind::External)
            .ok_or_else(|| {
                self.violation(slot, Method::GetReasonForLiteral, "reason contains complementary literals")
            })?
            .into_literals();
        let id = self.store.push(lits.clone(), NogoodKind::External);
        self.store.attach(id, &self.assignment);
        self.stats.external_constraints += 1;
        if self.assignment.is_true(lit) {
            self.assignment.set_reason(lit.atom(), Reason::Nogood(id));
        }
        self.notify_learning(&lits)?;
        Ok(id)
    }
}
