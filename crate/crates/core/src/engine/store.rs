//! Nogood database with two watched literals per nogood.
//!
//! A nogood is watched on its first two literals. The watch list of a literal holds the
//! nogoods to visit when that literal becomes true. Deleted nogoods are dropped lazily from
//! watch lists.

use crate::program::{Literal, NogoodKind};

use super::assignment::{Assignment, Reason, Truth};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NogoodId(pub(crate) usize);

impl NogoodId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
pub(crate) struct StoredNogood {
    pub literals: Vec<Literal>,
    pub kind: NogoodKind,
    pub activity: f64,
    pub deleted: bool,
}

/// Result of examining a nogood against the current assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Status {
    /// Some literal is false.
    Satisfied,
    /// Every literal is true.
    Violated,
    /// Every literal but this undefined one is true.
    Unit(Literal),
    Open,
}

#[derive(Debug, Default)]
pub(crate) struct NogoodStore {
    nogoods: Vec<StoredNogood>,
    watches: Vec<Vec<NogoodId>>,
    activity_inc: f64,
    learned: usize,
}

const ACTIVITY_DECAY: f64 = 0.999;

impl NogoodStore {
    pub fn new(num_atoms: usize) -> NogoodStore {
        NogoodStore {
            nogoods: Vec::new(),
            watches: vec![Vec::new(); 2 * num_atoms + 2],
            activity_inc: 1.0,
            learned: 0,
        }
    }

    pub fn get(&self, id: NogoodId) -> &StoredNogood {
        &self.nogoods[id.0]
    }

    pub fn literals(&self, id: NogoodId) -> &[Literal] {
        &self.nogoods[id.0].literals
    }

    pub fn ids(&self) -> impl Iterator<Item = NogoodId> + '_ {
        (0..self.nogoods.len())
            .map(NogoodId)
            .filter(|id| !self.nogoods[id.0].deleted)
    }

    pub fn num_learned(&self) -> usize {
        self.learned
    }

    pub fn count_kind(&self, kind: NogoodKind) -> usize {
        self.nogoods.iter().filter(|n| !n.deleted && n.kind == kind).count()
    }

    /// Adds a nogood without watches, to be attached with [`NogoodStore::attach`].
    pub fn push(&mut self, literals: Vec<Literal>, kind: NogoodKind) -> NogoodId {
        let id = NogoodId(self.nogoods.len());
        if kind == NogoodKind::Learned {
            self.learned += 1;
        }
        self.nogoods.push(StoredNogood { literals, kind, activity: 0.0, deleted: false });
        id
    }

    /// Orders the literals so the best two are watched and registers the watches.
    ///
    /// Preference: false literals (highest level first), then undefined ones, then true
    /// literals assigned latest.
    pub fn attach(&mut self, id: NogoodId, assignment: &Assignment) {
        let ng = &mut self.nogoods[id.0];
        if ng.literals.len() >= 2 {
            let rank = |l: Literal| -> (u8, i64) {
                let atom = l.atom();
                match assignment.value(l) {
                    Truth::False => (0, -(assignment.level(atom) as i64)),
                    Truth::Undefined => (1, 0),
                    Truth::True => (2, -(assignment.position(atom) as i64)),
                }
            };
            for slot in 0..2 {
                let best = (slot..ng.literals.len())
                    .min_by_key(|&i| rank(ng.literals[i]))
                    .unwrap();
                ng.literals.swap(slot, best);
            }
            let (w0, w1) = (ng.literals[0], ng.literals[1]);
            self.watches[w0.code()].push(id);
            self.watches[w1.code()].push(id);
        }
    }

    /// Re-selects the watched literals of an attached nogood for the current assignment.
    pub fn rewatch(&mut self, id: NogoodId, assignment: &Assignment) {
        let lits = &self.nogoods[id.0].literals;
        if lits.len() >= 2 {
            let (w0, w1) = (lits[0], lits[1]);
            self.watches[w0.code()].retain(|&x| x != id);
            self.watches[w1.code()].retain(|&x| x != id);
        }
        self.attach(id, assignment);
    }

    pub fn status(&self, id: NogoodId, assignment: &Assignment) -> Status {
        let mut open = None;
        let mut undefined = 0;
        for &l in &self.nogoods[id.0].literals {
            match assignment.value(l) {
                Truth::False => return Status::Satisfied,
                Truth::Undefined => {
                    undefined += 1;
                    open = Some(l);
                }
                Truth::True => {}
            }
        }
        match (undefined, open) {
            (0, _) => Status::Violated,
            (1, Some(l)) => Status::Unit(l),
            _ => Status::Open,
        }
    }

    pub fn delete(&mut self, id: NogoodId) {
        let ng = &mut self.nogoods[id.0];
        if !ng.deleted {
            ng.deleted = true;
            if ng.kind == NogoodKind::Learned {
                self.learned -= 1;
            }
        }
    }

    pub fn bump_activity(&mut self, id: NogoodId) {
        let ng = &mut self.nogoods[id.0];
        ng.activity += self.activity_inc;
        if ng.activity > 1e20 {
            for n in &mut self.nogoods {
                n.activity *= 1e-20;
            }
            self.activity_inc *= 1e-20;
        }
    }

    pub fn decay_activity(&mut self) {
        self.activity_inc /= ACTIVITY_DECAY;
    }

    /// Replaces the literal list of an unattached or to-be-rewatched nogood.
    pub fn replace_literals(&mut self, id: NogoodId, literals: Vec<Literal>) {
        self.nogoods[id.0].literals = literals;
    }

    pub fn clear_watches(&mut self) {
        for w in &mut self.watches {
            w.clear();
        }
    }

    /// Visits the nogoods watching `lit`, which just became true. Infers complements of unit
    /// nogoods and returns the first violated nogood.
    pub fn propagate(
        &mut self,
        lit: Literal,
        assignment: &mut Assignment,
        propagations: &mut u64,
    ) -> Option<NogoodId> {
        let mut watchers = std::mem::take(&mut self.watches[lit.code()]);
        let mut keep = 0;
        let mut conflict = None;
        let mut i = 0;
        while i < watchers.len() {
            let id = watchers[i];
            i += 1;
            let ng = &mut self.nogoods[id.0];
            if ng.deleted {
                continue;
            }
            if ng.literals[0] == lit {
                ng.literals.swap(0, 1);
            }
            debug_assert_eq!(ng.literals[1], lit);
            let other = ng.literals[0];
            if assignment.is_false(other) {
                watchers[keep] = id;
                keep += 1;
                continue;
            }
            let replacement = (2..ng.literals.len()).find(|&k| !assignment.is_true(ng.literals[k]));
            if let Some(k) = replacement {
                ng.literals.swap(1, k);
                let new_watch = ng.literals[1];
                self.watches[new_watch.code()].push(id);
                continue;
            }
            watchers[keep] = id;
            keep += 1;
            match assignment.value(other) {
                Truth::Undefined => {
                    assignment.assign(other.complement(), Reason::Nogood(id));
                    *propagations += 1;
                }
                Truth::True => {
                    conflict = Some(id);
                    break;
                }
                Truth::False => unreachable!(),
            }
        }
        while i < watchers.len() {
            watchers[keep] = watchers[i];
            keep += 1;
            i += 1;
        }
        watchers.truncate(keep);
        // New watches may have been pushed onto this literal's list meanwhile.
        let added = std::mem::replace(&mut self.watches[lit.code()], watchers);
        self.watches[lit.code()].extend(added);
        conflict
    }

    /// Checks that every live nogood either has a false literal or a non-true watch.
    pub fn watch_violations(&self, assignment: &Assignment) -> Vec<NogoodId> {
        let mut bad = Vec::new();
        for id in self.ids() {
            let lits = &self.nogoods[id.0].literals;
            if lits.len() < 2 || lits.iter().any(|&l| assignment.is_false(l)) {
                continue;
            }
            let watched_ok = !assignment.is_true(lits[0]) || !assignment.is_true(lits[1]);
            let registered = self.watches[lits[0].code()].contains(&id)
                && self.watches[lits[1].code()].contains(&id);
            if !watched_ok || !registered {
                bad.push(id);
            }
        }
        bad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::Atom;

    fn l(i: i64) -> Literal {
        Literal::from_signed(i).unwrap()
    }

    #[test]
    fn binary_nogood_infers_complement() {
        let mut a = Assignment::new(2);
        let mut s = NogoodStore::new(2);
        let id = s.push(vec![l(1), l(2)], NogoodKind::Input);
        s.attach(id, &a);
        a.assign(l(1), Reason::Decision);
        let mut props = 0;
        assert_eq!(s.propagate(l(1), &mut a, &mut props), None);
        assert!(a.is_true(l(-2)));
        assert_eq!(a.reason(Atom::new(2)), Reason::Nogood(id));
        assert_eq!(props, 1);
    }

    #[test]
    fn watch_moves_to_non_true_literal() {
        let mut a = Assignment::new(3);
        let mut s = NogoodStore::new(3);
        let id = s.push(vec![l(1), l(2), l(3)], NogoodKind::Input);
        s.attach(id, &a);
        let first = s.literals(id)[0];
        a.assign(first, Reason::Decision);
        let mut props = 0;
        assert_eq!(s.propagate(first, &mut a, &mut props), None);
        assert_eq!(props, 0);
        assert!(s.watch_violations(&a).is_empty());
        assert_eq!(s.status(id, &a), Status::Open);
    }

    #[test]
    fn violated_nogood_is_reported() {
        let mut a = Assignment::new(2);
        let mut s = NogoodStore::new(2);
        let id = s.push(vec![l(1), l(-2)], NogoodKind::Input);
        s.attach(id, &a);
        a.assign(l(-2), Reason::Decision);
        a.assign(l(1), Reason::Decision);
        let mut props = 0;
        let _ = s.propagate(l(-2), &mut a, &mut props);
        assert_eq!(s.status(id, &a), Status::Violated);
    }

    #[test]
    fn attach_prefers_false_then_latest_true() {
        let mut a = Assignment::new(4);
        a.assign(l(1), Reason::Decision);
        a.assign(l(2), Reason::Decision);
        a.assign(l(3), Reason::Decision);
        let mut s = NogoodStore::new(4);
        let id = s.push(vec![l(1), l(2), l(3)], NogoodKind::External);
        s.attach(id, &a);
        assert_eq!(&s.literals(id)[..2], &[l(3), l(2)]);
        let id2 = s.push(vec![l(1), l(2), l(-3), l(4)], NogoodKind::External);
        s.attach(id2, &a);
        assert_eq!(&s.literals(id2)[..2], &[l(-3), l(4)]);
    }
}
