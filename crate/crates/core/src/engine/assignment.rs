use crate::program::{Atom, Literal};

use super::store::NogoodId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Undefined,
}

/// Why a literal is on the trail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reason {
    Decision,
    /// Asserted at level 0 without a recorded nogood (propagator simplification).
    Fact,
    Nogood(NogoodId),
    /// Inferred by the extension in this slot; the reason is fetched on demand.
    Extension(usize),
}

/// Partial interpretation stored as a trail with decision levels and reasons.
#[derive(Clone, Debug)]
pub struct Assignment {
    /// 0 = undefined, 1 = atom true, 2 = atom false.
    values: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    position: Vec<u32>,
    trail: Vec<Literal>,
    level_starts: Vec<usize>,
}

impl Assignment {
    pub fn new(num_atoms: usize) -> Assignment {
        Assignment {
            values: vec![0; num_atoms + 1],
            level: vec![0; num_atoms + 1],
            reason: vec![Reason::Decision; num_atoms + 1],
            position: vec![0; num_atoms + 1],
            trail: Vec::with_capacity(num_atoms),
            level_starts: Vec::new(),
        }
    }

    pub fn num_atoms(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, lit: Literal) -> Truth {
        match (self.values[lit.atom().index()], lit.is_positive()) {
            (0, _) => Truth::Undefined,
            (1, true) | (2, false) => Truth::True,
            _ => Truth::False,
        }
    }

    pub fn is_true(&self, lit: Literal) -> bool {
        self.value(lit) == Truth::True
    }

    pub fn is_false(&self, lit: Literal) -> bool {
        self.value(lit) == Truth::False
    }

    pub fn is_assigned(&self, atom: Atom) -> bool {
        self.values[atom.index()] != 0
    }

    pub fn level(&self, atom: Atom) -> u32 {
        self.level[atom.index()]
    }

    pub fn reason(&self, atom: Atom) -> Reason {
        self.reason[atom.index()]
    }

    pub(crate) fn set_reason(&mut self, atom: Atom, reason: Reason) {
        self.reason[atom.index()] = reason;
    }

    /// Trail index of an assigned atom.
    pub fn position(&self, atom: Atom) -> usize {
        self.position[atom.index()] as usize
    }

    pub fn trail(&self) -> &[Literal] {
        &self.trail
    }

    pub fn decision_level(&self) -> u32 {
        self.level_starts.len() as u32
    }

    /// Trail index where `level` begins.
    pub fn level_start(&self, level: u32) -> usize {
        if level == 0 {
            0
        } else {
            self.level_starts[level as usize - 1]
        }
    }

    pub fn is_total(&self) -> bool {
        self.trail.len() == self.num_atoms()
    }

    pub(crate) fn new_level(&mut self) {
        self.level_starts.push(self.trail.len());
    }

    pub(crate) fn assign(&mut self, lit: Literal, reason: Reason) {
        let atom = lit.atom();
        debug_assert!(!self.is_assigned(atom), "atom {atom:?} assigned twice");
        self.values[atom.index()] = if lit.is_positive() { 1 } else { 2 };
        self.level[atom.index()] = self.decision_level();
        self.reason[atom.index()] = reason;
        self.position[atom.index()] = self.trail.len() as u32;
        self.trail.push(lit);
    }

    /// Removes every literal above `level`, returning them in trail order.
    pub(crate) fn unassign_above(&mut self, level: u32) -> Vec<Literal> {
        if level >= self.decision_level() {
            return Vec::new();
        }
        let start = self.level_start(level + 1);
        let removed = self.trail.split_off(start);
        for lit in &removed {
            self.values[lit.atom().index()] = 0;
        }
        self.level_starts.truncate(level as usize);
        removed
    }
}
