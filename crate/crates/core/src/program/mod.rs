//! Ground programs: atoms, literals, rules and their nogood translation.
//!
//! A [`GroundProgram`] is a finite set of normal rules `h :- b1, ..., bj, not c1, ..., not ck.`
//! plus constraints (rules without a head). Atoms are interned in an [`AtomTable`] with dense
//! ids starting at 1.

mod nogood;
mod parse;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub use nogood::{completion_nogoods, rule_nogood, Completion, Nogood, NogoodKind};
pub use parse::{parse_program, ParseError};

/// A propositional atom, identified by a dense positive index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(u32);

impl Atom {
    /// Creates an atom from its id. Ids start at 1.
    pub fn new(id: u32) -> Atom {
        assert!(id > 0, "atom ids start at 1");
        Atom(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn pos(self) -> Literal {
        Literal::new(self, Sign::Pos)
    }

    pub fn neg(self) -> Literal {
        Literal::new(self, Sign::Neg)
    }
}

/// Polarity of a literal, also used as the preferred branching sign of an atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Pos => "pos",
            Sign::Neg => "neg",
        }
    }
}

/// An atom `a` or its default negation `~a`.
///
/// Encoded as `2 * atom + (1 if negative)`, so literal codes can index per-literal tables.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(u32);

impl Literal {
    pub fn new(atom: Atom, sign: Sign) -> Literal {
        Literal(atom.0 << 1 | (sign == Sign::Neg) as u32)
    }

    pub fn atom(self) -> Atom {
        Atom(self.0 >> 1)
    }

    pub fn sign(self) -> Sign {
        if self.0 & 1 == 1 {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// The literal of the same atom with the opposite polarity.
    pub fn complement(self) -> Literal {
        Literal(self.0 ^ 1)
    }

    /// Dense code usable as a table index.
    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// Signed-integer form: the atom id, negated for `~a`.
    pub fn to_signed(self) -> i64 {
        let id = self.atom().0 as i64;
        if self.is_positive() {
            id
        } else {
            -id
        }
    }

    /// Inverse of [`Literal::to_signed`]; `None` for zero or ids beyond `u32`.
    pub fn from_signed(value: i64) -> Option<Literal> {
        if value == 0 {
            return None;
        }
        let id = u32::try_from(value.unsigned_abs()).ok()?;
        let atom = Atom(id);
        Some(if value > 0 { atom.pos() } else { atom.neg() })
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_signed())
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        self.complement()
    }
}

/// Bijective mapping between atom names and ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AtomTable {
    names: Vec<String>,
    index: HashMap<String, Atom>,
}

impl AtomTable {
    pub fn new() -> AtomTable {
        AtomTable::default()
    }

    /// Returns the atom named `name`, creating it if needed.
    pub fn intern(&mut self, name: &str) -> Atom {
        if let Some(&atom) = self.index.get(name) {
            return atom;
        }
        let atom = Atom(self.names.len() as u32 + 1);
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), atom);
        atom
    }

    pub fn get(&self, name: &str) -> Option<Atom> {
        self.index.get(name).copied()
    }

    pub fn name(&self, atom: Atom) -> &str {
        &self.names[atom.index() - 1]
    }

    pub fn contains(&self, atom: Atom) -> bool {
        atom.0 >= 1 && atom.index() <= self.names.len()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Atom, &str)> + '_ {
        self.names
            .iter()
            .enumerate()
            .map(|(i, name)| (Atom(i as u32 + 1), name.as_str()))
    }

    /// Formats a literal with its atom name, `not` marking negation.
    pub fn display_literal(&self, lit: Literal) -> String {
        if lit.is_positive() {
            self.name(lit.atom()).to_owned()
        } else {
            format!("not {}", self.name(lit.atom()))
        }
    }
}

/// A normal rule; constraints have no head.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub head: Option<Atom>,
    pub positive: Vec<Atom>,
    pub negative: Vec<Atom>,
}

impl Rule {
    pub fn fact(head: Atom) -> Rule {
        Rule {
            head: Some(head),
            positive: Vec::new(),
            negative: Vec::new(),
        }
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.is_body_empty()
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    pub fn is_body_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    /// Body literals, positive atoms first.
    pub fn body(&self) -> impl Iterator<Item = Literal> + '_ {
        self.positive
            .iter()
            .map(|a| a.pos())
            .chain(self.negative.iter().map(|a| a.neg()))
    }

    pub fn body_len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    /// Whether the rule holds in the total interpretation whose true atoms satisfy `is_true`.
    pub fn is_satisfied_by(&self, is_true: impl Fn(Atom) -> bool) -> bool {
        let body = self.positive.iter().all(|&a| is_true(a))
            && self.negative.iter().all(|&a| !is_true(a));
        !body || self.head.is_some_and(&is_true)
    }

    /// Normalizes the rule: sorts and deduplicates bodies, drops tautologies and rules with a
    /// contradictory body, and turns `h :- ..., not h` into a constraint.
    ///
    /// Returns `None` when the rule can be discarded.
    pub(crate) fn normalized(mut self) -> Option<Rule> {
        self.positive.sort_unstable();
        self.positive.dedup();
        self.negative.sort_unstable();
        self.negative.dedup();
        if self.positive.iter().any(|a| self.negative.binary_search(a).is_ok()) {
            return None;
        }
        if let Some(head) = self.head {
            if self.positive.binary_search(&head).is_ok() {
                return None;
            }
            if self.negative.binary_search(&head).is_ok() {
                self.head = None;
            }
        }
        Some(self)
    }
}

/// A ground normal program with its symbol table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    atoms: AtomTable,
    rules: Vec<Rule>,
}

impl GroundProgram {
    pub fn new() -> GroundProgram {
        GroundProgram::default()
    }

    pub fn atoms(&self) -> &AtomTable {
        &self.atoms
    }

    pub fn atoms_mut(&mut self) -> &mut AtomTable {
        &mut self.atoms
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Adds a rule after normalization. Panics if the rule mentions an atom missing from the
    /// table.
    pub fn add_rule(&mut self, rule: Rule) {
        for a in rule.head.iter().chain(&rule.positive).chain(&rule.negative) {
            assert!(self.atoms.contains(*a), "rule references unknown atom {a:?}");
        }
        if let Some(rule) = rule.normalized() {
            if !self.rules.contains(&rule) {
                self.rules.push(rule);
            }
        }
    }

    /// Interns `name` and adds it as a fact.
    pub fn add_fact(&mut self, name: &str) -> Atom {
        let atom = self.atoms.intern(name);
        self.add_rule(Rule::fact(atom));
        atom
    }

    pub fn facts(&self) -> BTreeSet<Atom> {
        self.rules
            .iter()
            .filter(|r| r.is_fact())
            .filter_map(|r| r.head)
            .collect()
    }

    pub fn display_rule(&self, rule: &Rule) -> String {
        let mut out = String::new();
        if let Some(head) = rule.head {
            out.push_str(self.atoms.name(head));
        }
        if !rule.is_body_empty() || rule.head.is_none() {
            if rule.head.is_some() {
                out.push(' ');
            }
            out.push_str(":- ");
            let body: Vec<String> = rule.body().map(|l| self.atoms.display_literal(l)).collect();
            out.push_str(&body.join(", "));
        }
        out.push('.');
        out
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            writeln!(f, "{}", self.display_rule(rule))?;
        }
        Ok(())
    }
}
