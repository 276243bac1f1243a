//! Default activity-based branching heuristic.
//!
//! Every atom has an activity, initially 0. Atoms involved in a conflict are bumped by `inc`,
//! and `inc` grows by the decay factor after each learned constraint, so recent conflicts
//! weigh more. The branching atom is the undefined atom with the largest
//! `activity * factor`; equal keys are ordered by a per-atom random tie-break drawn from the
//! solver's seeded generator. The branching literal uses the atom's preferred sign, negative
//! unless overridden.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::program::{Atom, Literal, Sign};

pub const DECAY: f64 = 1.0 / 0.95;
pub const RESCALE_LIMIT: f64 = 1e100;
pub const RESCALE_FACTOR: f64 = 1e-100;

#[derive(Clone, Debug)]
pub struct MinisatHeuristic {
    activity: Vec<f64>,
    factor: Vec<f64>,
    sign: Vec<Sign>,
    tiebreak: Vec<u64>,
    inc: f64,
    heap: Vec<u32>,
    /// Position in `heap`, or `usize::MAX` when absent.
    heap_pos: Vec<usize>,
}

impl MinisatHeuristic {
    pub fn new(num_atoms: usize, rng: &mut ChaCha8Rng) -> MinisatHeuristic {
        let mut h = MinisatHeuristic {
            activity: vec![0.0; num_atoms + 1],
            factor: vec![1.0; num_atoms + 1],
            sign: vec![Sign::Neg; num_atoms + 1],
            tiebreak: (0..=num_atoms).map(|_| rng.random()).collect(),
            inc: 1.0,
            heap: Vec::with_capacity(num_atoms),
            heap_pos: vec![usize::MAX; num_atoms + 1],
        };
        for id in 1..=num_atoms as u32 {
            h.insert(Atom::new(id));
        }
        h
    }

    pub fn activity(&self, atom: Atom) -> f64 {
        self.activity[atom.index()]
    }

    pub fn increment(&self) -> f64 {
        self.inc
    }

    pub fn factor(&self, atom: Atom) -> f64 {
        self.factor[atom.index()]
    }

    pub fn sign(&self, atom: Atom) -> Sign {
        self.sign[atom.index()]
    }

    pub fn set_activity(&mut self, atom: Atom, value: f64) {
        self.activity[atom.index()] = value;
        self.reposition(atom);
    }

    pub fn set_factor(&mut self, atom: Atom, factor: f64) {
        self.factor[atom.index()] = factor;
        self.reposition(atom);
    }

    pub fn set_sign(&mut self, atom: Atom, sign: Sign) {
        self.sign[atom.index()] = sign;
    }

    /// Adds `inc` to the activity of `atom`, rescaling everything past the limit.
    pub fn bump(&mut self, atom: Atom) {
        let a = &mut self.activity[atom.index()];
        *a += self.inc;
        if *a > RESCALE_LIMIT {
            self.rescale();
        }
        self.reposition(atom);
    }

    /// Multiplies `inc` by the decay factor.
    pub fn decay(&mut self) {
        self.inc *= DECAY;
        if self.inc > RESCALE_LIMIT {
            self.rescale();
        }
    }

    /// Bumps every atom of `learned` once, then decays.
    pub fn bump_and_decay(&mut self, learned: &[Literal]) {
        let mut atoms: Vec<Atom> = learned.iter().map(|l| l.atom()).collect();
        atoms.sort_unstable();
        atoms.dedup();
        for a in atoms {
            self.bump(a);
        }
        self.decay();
    }

    fn rescale(&mut self) {
        for a in &mut self.activity {
            *a *= RESCALE_FACTOR;
        }
        self.inc *= RESCALE_FACTOR;
    }

    /// Makes an unassigned atom selectable again.
    pub fn insert(&mut self, atom: Atom) {
        if self.heap_pos[atom.index()] != usize::MAX {
            return;
        }
        self.heap_pos[atom.index()] = self.heap.len();
        self.heap.push(atom.id());
        self.sift_up(self.heap.len() - 1);
    }

    /// The undefined atom with maximal key, as a literal with its preferred sign. Assigned
    /// atoms met on the way are dropped from the queue.
    pub fn select(&mut self, is_assigned: impl Fn(Atom) -> bool) -> Option<Literal> {
        while let Some(&top) = self.heap.first() {
            let atom = Atom::new(top);
            if is_assigned(atom) {
                self.pop();
                continue;
            }
            return Some(Literal::new(atom, self.sign(atom)));
        }
        None
    }

    fn key(&self, id: u32) -> (f64, u64) {
        let i = id as usize;
        (self.activity[i] * self.factor[i], self.tiebreak[i])
    }

    fn greater(&self, a: u32, b: u32) -> bool {
        let (ka, ta) = self.key(a);
        let (kb, tb) = self.key(b);
        ka > kb || (ka == kb && ta > tb)
    }

    fn pop(&mut self) {
        let last = self.heap.len() - 1;
        self.heap.swap(0, last);
        let removed = self.heap.pop().unwrap();
        self.heap_pos[removed as usize] = usize::MAX;
        if !self.heap.is_empty() {
            self.heap_pos[self.heap[0] as usize] = 0;
            self.sift_down(0);
        }
    }

    fn reposition(&mut self, atom: Atom) {
        let pos = self.heap_pos[atom.index()];
        if pos != usize::MAX {
            self.sift_up(pos);
            let pos = self.heap_pos[atom.index()];
            self.sift_down(pos);
        }
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.greater(self.heap[i], self.heap[parent]) {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < self.heap.len() && self.greater(self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < self.heap.len() && self.greater(self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.heap_pos[self.heap[i] as usize] = i;
        self.heap_pos[self.heap[j] as usize] = j;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn heuristic(n: usize, seed: u64) -> MinisatHeuristic {
        MinisatHeuristic::new(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn highest_activity_negative_by_default() {
        let (a, b) = (Atom::new(1), Atom::new(2));
        let mut h = heuristic(2, 0);
        h.set_activity(a, 5.0);
        h.set_activity(b, 3.0);
        assert_eq!(h.select(|_| false), Some(a.neg()));
        h.set_sign(a, Sign::Pos);
        assert_eq!(h.select(|_| false), Some(a.pos()));
    }

    #[test]
    fn factor_scales_the_key() {
        let (a, b) = (Atom::new(1), Atom::new(2));
        let mut h = heuristic(2, 3);
        h.set_activity(a, 5.0);
        h.set_activity(b, 3.0);
        h.set_factor(b, 2.0);
        assert_eq!(h.select(|_| false), Some(b.neg()));
        h.set_factor(b, 0.0);
        h.set_factor(a, 1.0);
        assert_eq!(h.select(|_| false), Some(a.neg()));
        assert_eq!(h.select(|x| x == a), Some(b.neg()));
    }

    #[test]
    fn ties_are_reproducible_per_seed() {
        let pick = |seed| heuristic(8, seed).select(|_| false);
        assert_eq!(pick(7), pick(7));
        let picks: std::collections::BTreeSet<_> = (0..32).map(pick).collect();
        assert!(picks.len() > 1, "tie-break ignores the seed");
    }

    #[test]
    fn bump_then_decay_arithmetic() {
        let a = Atom::new(1);
        let mut h = heuristic(1, 0);
        assert_eq!(h.activity(a), 0.0);
        h.bump_and_decay(&[a.pos()]);
        assert_eq!(h.activity(a), 1.0);
        assert!((h.increment() - 1.0 / 0.95).abs() < 1e-12);
        assert!((h.increment() - 1.0526315789).abs() < 1e-9);
    }

    #[test]
    fn rescale_preserves_order() {
        let mut h = heuristic(3, 1);
        h.set_activity(Atom::new(1), 1e99);
        h.set_activity(Atom::new(2), 5e99);
        h.set_activity(Atom::new(3), 2e99);
        h.inc = 9e99;
        h.bump(Atom::new(3));
        assert!((h.activity(Atom::new(3)) - 1.1).abs() < 1e-9);
        assert!((h.increment() - 0.9).abs() < 1e-9);
        assert!(h.activity(Atom::new(2)) > h.activity(Atom::new(1)));
        assert!(h.activity(Atom::new(3)) > h.activity(Atom::new(2)));
        assert_eq!(h.select(|_| false), Some(Atom::new(3).neg()));
    }
}
