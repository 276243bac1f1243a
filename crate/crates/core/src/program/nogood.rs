//! Nogood translation of rules and of the Clark completion.

use std::collections::BTreeMap;

use super::{Atom, GroundProgram, Literal, Rule};

/// Origin of a nogood inside the solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NogoodKind {
    Input,
    Learned,
    External,
}

/// A set of literals that must not be true together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nogood {
    literals: Vec<Literal>,
    kind: NogoodKind,
}

impl Nogood {
    /// Builds a nogood, removing duplicate literals. Returns `None` when the set contains a
    /// literal and its complement, since such a nogood can never be violated.
    pub fn new(literals: impl IntoIterator<Item = Literal>, kind: NogoodKind) -> Option<Nogood> {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort_unstable();
        literals.dedup();
        if literals.windows(2).any(|w| w[0].atom() == w[1].atom()) {
            return None;
        }
        Some(Nogood { literals, kind })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn kind(&self) -> NogoodKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.binary_search(&lit).is_ok()
    }

    /// A nogood is violated iff every literal is true.
    pub fn is_violated_by(&self, is_true: impl Fn(Literal) -> bool) -> bool {
        self.literals.iter().all(|&l| is_true(l))
    }

    pub fn into_literals(self) -> Vec<Literal> {
        self.literals
    }
}

/// `C(r)`: the head negatively, the positive body positively, the negative body negatively.
pub fn rule_nogood(rule: &Rule) -> Nogood {
    let head = rule.head.map(|h| h.neg());
    Nogood::new(head.into_iter().chain(rule.body()), NogoodKind::Input)
        .expect("normalized rules have consistent nogoods")
}

/// Nogoods of the Clark completion over the program atoms plus body auxiliaries.
#[derive(Clone, Debug)]
pub struct Completion {
    pub nogoods: Vec<Nogood>,
    /// Number of program atoms; auxiliary atoms follow them.
    pub num_program_atoms: usize,
    /// Body of each auxiliary atom, indexed from `num_program_atoms + 1`.
    pub aux_bodies: Vec<Vec<Literal>>,
}

impl Completion {
    pub fn num_atoms(&self) -> usize {
        self.num_program_atoms + self.aux_bodies.len()
    }

    pub fn is_aux(&self, atom: Atom) -> bool {
        atom.index() > self.num_program_atoms
    }
}

/// Translates `program` into completion nogoods.
///
/// Each rule body with two or more literals gets an auxiliary atom equivalent to the body
/// conjunction (shared between identical bodies); singleton bodies use their literal
/// directly. Every atom `a` with bodies `b1..bk` gets the support nogood `{a, ~b1, ..., ~bk}`,
/// which reduces to `{a}` when the atom heads no rule.
pub fn completion_nogoods(program: &GroundProgram) -> Completion {
    let n = program.num_atoms();
    let mut aux_bodies: Vec<Vec<Literal>> = Vec::new();
    let mut aux_index: BTreeMap<Vec<Literal>, Literal> = BTreeMap::new();
    let mut nogoods = Vec::new();
    let mut supports: Vec<Vec<Literal>> = vec![Vec::new(); n + 1];
    let mut forced_true = vec![false; n + 1];

    let push = |nogoods: &mut Vec<Nogood>, lits: Vec<Literal>| {
        if let Some(ng) = Nogood::new(lits, NogoodKind::Input) {
            nogoods.push(ng);
        }
    };

    for rule in program.rules() {
        let body: Vec<Literal> = rule.body().collect();
        let Some(head) = rule.head else {
            push(&mut nogoods, body);
            continue;
        };
        match body.len() {
            0 => {
                forced_true[head.index()] = true;
                push(&mut nogoods, vec![head.neg()]);
            }
            1 => {
                push(&mut nogoods, vec![head.neg(), body[0]]);
                supports[head.index()].push(body[0]);
            }
            _ => {
                let mut key = body.clone();
                key.sort_unstable();
                let beta = match aux_index.get(&key) {
                    Some(&beta) => beta,
                    None => {
                        let beta = Atom::new((n + aux_bodies.len() + 1) as u32).pos();
                        for &l in &key {
                            push(&mut nogoods, vec![beta, l.complement()]);
                        }
                        push(&mut nogoods, std::iter::once(beta.complement()).chain(key.iter().copied()).collect());
                        aux_index.insert(key.clone(), beta);
                        aux_bodies.push(key);
                        beta
                    }
                };
                push(&mut nogoods, vec![head.neg(), beta]);
                supports[head.index()].push(beta);
            }
        }
    }

    for (atom, _) in program.atoms().iter() {
        if forced_true[atom.index()] {
            continue;
        }
        let support = std::iter::once(atom.pos())
            .chain(supports[atom.index()].iter().map(|l| l.complement()))
            .collect();
        push(&mut nogoods, support);
    }

    Completion { nogoods, num_program_atoms: n, aux_bodies }
}
