//! Stable marriage: preference tables, the ground encoding, an instance generator and three
//! propagators replacing the stability constraint.
//!
//! The encoding, over `man/1`, `woman/1` and `pref/3` facts:
//!
//! ```text
//! match(M,W)  :- man(M), woman(W), not nmatch(M,W).
//! nmatch(M,W) :- man(M), woman(W), not match(M,W).
//! :- match(M1,W), match(M2,W), M1 != M2.
//! :- match(M,W1), match(M,W2), W1 != W2.
//! married(M) :- match(M,W).
//! :- man(M), not married(M).
//! :- match(M,W1), match(M1,W), W1 != W,
//!    pref(M,W1,SM1), pref(M,W,SM), SM > SM1, pref(W,M1,SW1), pref(W,M,SW), SW >= SW1.
//! ```
//!
//! The last constraint says that `(M,W)` must not be a blocking pair: `M` strictly prefers `W`
//! to his partner `W1` while `W` likes `M` at least as much as her partner `M1`. Its ground
//! instantiation is quadratic in the number of matches, so the propagators check it instead:
//! [`LazyStableMarriage`] on total candidates, [`EagerStableMarriage`] during propagation.

use std::collections::{BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::split_atom;
use crate::extension::{ExtResult, Priority, Propagator, SolverView};
use crate::program::{Atom, GroundProgram, Literal, Rule};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PreferenceError {
    #[error("no man/1 or woman/1 facts")]
    Empty,
    #[error("pref({0},{1},_) is missing")]
    Missing(String, String),
    #[error("pref({0},{1},{2}) has a non-positive or malformed score")]
    BadScore(String, String, String),
    #[error("pref({0},{1},_) names an unknown person")]
    UnknownPerson(String, String),
}

/// Complete preference scores between `n` men and `m` women; higher means more preferred.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceTable {
    men: Vec<String>,
    women: Vec<String>,
    man_pref: Vec<Vec<i64>>,
    woman_pref: Vec<Vec<i64>>,
}

impl PreferenceTable {
    /// A table where every score is `score`.
    pub fn uniform(men: Vec<String>, women: Vec<String>, score: i64) -> PreferenceTable {
        let (n, m) = (men.len(), women.len());
        PreferenceTable {
            man_pref: vec![vec![score; m]; n],
            woman_pref: vec![vec![score; n]; m],
            men,
            women,
        }
    }

    /// `n` men `m1..mn` and `n` women `w1..wn`, all scores `score`.
    pub fn square(n: usize, score: i64) -> PreferenceTable {
        let men = (1..=n).map(|i| format!("m{i}")).collect();
        let women = (1..=n).map(|i| format!("w{i}")).collect();
        PreferenceTable::uniform(men, women, score)
    }

    pub fn men(&self) -> &[String] {
        &self.men
    }

    pub fn women(&self) -> &[String] {
        &self.women
    }

    /// Score man `m` gives woman `w` (indices).
    pub fn man_score(&self, m: usize, w: usize) -> i64 {
        self.man_pref[m][w]
    }

    /// Score woman `w` gives man `m` (indices).
    pub fn woman_score(&self, w: usize, m: usize) -> i64 {
        self.woman_pref[w][m]
    }

    pub fn set_man_score(&mut self, m: usize, w: usize, score: i64) {
        self.man_pref[m][w] = score;
    }

    pub fn set_woman_score(&mut self, w: usize, m: usize, score: i64) {
        self.woman_pref[w][m] = score;
    }

    pub fn man_index(&self, name: &str) -> Option<usize> {
        self.men.iter().position(|m| m == name)
    }

    pub fn woman_index(&self, name: &str) -> Option<usize> {
        self.women.iter().position(|w| w == name)
    }

    /// Whether `match(m,w1)` and `match(m1,w)` make `(m,w)` a blocking pair.
    pub fn blocks(&self, m: usize, w1: usize, m1: usize, w: usize) -> bool {
        w1 != w
            && self.man_score(m, w) > self.man_score(m, w1)
            && self.woman_score(w, m) >= self.woman_score(w, m1)
    }

    /// Reads `man/1`, `woman/1` and `pref/3` facts.
    pub fn from_program(program: &GroundProgram) -> Result<PreferenceTable, PreferenceError> {
        let mut men = Vec::new();
        let mut women = Vec::new();
        let mut prefs = Vec::new();
        for atom in program.facts() {
            let (pred, args) = split_atom(program.atoms().name(atom));
            match (pred, args.as_slice()) {
                ("man", [m]) => men.push(m.to_string()),
                ("woman", [w]) => women.push(w.to_string()),
                ("pref", [a, b, s]) => prefs.push((a.to_string(), b.to_string(), s.to_string())),
                _ => {}
            }
        }
        if men.is_empty() || women.is_empty() {
            return Err(PreferenceError::Empty);
        }
        let mut man_pref = vec![vec![None; women.len()]; men.len()];
        let mut woman_pref = vec![vec![None; men.len()]; women.len()];
        for (a, b, s) in prefs {
            let score = match s.parse::<i64>() {
                Ok(v) if v > 0 => v,
                _ => return Err(PreferenceError::BadScore(a, b, s)),
            };
            let man = men.iter().position(|x| *x == a);
            let woman = women.iter().position(|x| *x == b);
            if let (Some(m), Some(w)) = (man, woman) {
                man_pref[m][w] = Some(score);
                continue;
            }
            let woman = women.iter().position(|x| *x == a);
            let man = men.iter().position(|x| *x == b);
            match (woman, man) {
                (Some(w), Some(m)) => woman_pref[w][m] = Some(score),
                _ => return Err(PreferenceError::UnknownPerson(a, b)),
            }
        }
        let man_pref = complete(man_pref, &men, &women)?;
        let woman_pref = complete(woman_pref, &women, &men)?;
        Ok(PreferenceTable { men, women, man_pref, woman_pref })
    }

    /// The table as `man/1`, `woman/1` and `pref/3` facts, one per line.
    pub fn to_facts(&self) -> String {
        let mut out = String::new();
        for m in &self.men {
            out.push_str(&format!("man({m}).\n"));
        }
        for w in &self.women {
            out.push_str(&format!("woman({w}).\n"));
        }
        for (i, m) in self.men.iter().enumerate() {
            for (j, w) in self.women.iter().enumerate() {
                out.push_str(&format!("pref({m},{w},{}).\n", self.man_pref[i][j]));
            }
        }
        for (j, w) in self.women.iter().enumerate() {
            for (i, m) in self.men.iter().enumerate() {
                out.push_str(&format!("pref({w},{m},{}).\n", self.woman_pref[j][i]));
            }
        }
        out
    }
}

fn complete(
    table: Vec<Vec<Option<i64>>>,
    rows: &[String],
    cols: &[String],
) -> Result<Vec<Vec<i64>>, PreferenceError> {
    table
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, s)| s.ok_or_else(|| PreferenceError::Missing(rows[i].clone(), cols[j].clone())))
                .collect()
        })
        .collect()
}

/// Stable marriage instance with `n` men and `n` women. Every score starts at 2; for each
/// person, `round(n * k / 100)` candidates chosen at random are demoted to 1.
pub fn generate_sm_instance(n: usize, k: u32, seed: u64) -> PreferenceTable {
    assert!(k <= 100, "perturbation percentage above 100");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = PreferenceTable::square(n, 2);
    let demoted = (n as f64 * k as f64 / 100.0).round() as usize;
    for m in 0..n {
        for w in sample(&mut rng, n, demoted.min(n)) {
            table.set_man_score(m, w, 1);
        }
    }
    for w in 0..n {
        for m in sample(&mut rng, n, demoted.min(n)) {
            table.set_woman_score(w, m, 1);
        }
    }
    table
}

/// Grounds the encoding for `table`. Facts are kept as facts and dropped from rule bodies.
/// With `include_r7` the stability constraint's violated instances are added.
pub fn encode_stable_marriage(table: &PreferenceTable, include_r7: bool) -> GroundProgram {
    let mut p = GroundProgram::new();
    for fact in table.to_facts().lines() {
        p.add_fact(fact.trim_end_matches('.'));
    }
    let (n, m) = (table.men.len(), table.women.len());
    let mut matched = vec![vec![Atom::new(1); m]; n];
    let mut unmatched = vec![vec![Atom::new(1); m]; n];
    for (i, man) in table.men.iter().enumerate() {
        for (j, woman) in table.women.iter().enumerate() {
            matched[i][j] = p.atoms_mut().intern(&format!("match({man},{woman})"));
            unmatched[i][j] = p.atoms_mut().intern(&format!("nmatch({man},{woman})"));
        }
    }
    let married: Vec<Atom> =
        table.men.iter().map(|man| p.atoms_mut().intern(&format!("married({man})"))).collect();

    let rule = |head: Option<Atom>, positive: Vec<Atom>, negative: Vec<Atom>| Rule { head, positive, negative };
    for i in 0..n {
        for j in 0..m {
            p.add_rule(rule(Some(matched[i][j]), vec![], vec![unmatched[i][j]]));
            p.add_rule(rule(Some(unmatched[i][j]), vec![], vec![matched[i][j]]));
        }
    }
    for j in 0..m {
        for i1 in 0..n {
            for i2 in 0..n {
                if i1 != i2 {
                    p.add_rule(rule(None, vec![matched[i1][j], matched[i2][j]], vec![]));
                }
            }
        }
    }
    for i in 0..n {
        for j1 in 0..m {
            for j2 in 0..m {
                if j1 != j2 {
                    p.add_rule(rule(None, vec![matched[i][j1], matched[i][j2]], vec![]));
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..m {
            p.add_rule(rule(Some(married[i]), vec![matched[i][j]], vec![]));
        }
        p.add_rule(rule(None, vec![], vec![married[i]]));
    }
    if include_r7 {
        for man in 0..n {
            for w1 in 0..m {
                for m1 in 0..n {
                    for w in 0..m {
                        if table.blocks(man, w1, m1, w) {
                            p.add_rule(rule(None, vec![matched[man][w1], matched[m1][w]], vec![]));
                        }
                    }
                }
            }
        }
    }
    p
}

/// `match(m,w)` atoms of a program, resolved against a preference table.
#[derive(Clone, Debug, Default)]
struct MatchAtoms {
    /// `(atom, man, woman)` for every match atom.
    all: Vec<(Atom, usize, usize)>,
    /// `grid[m][w]`.
    grid: Vec<Vec<Option<Atom>>>,
    /// Atom id to `(man, woman)`.
    pairs: HashMap<Atom, (usize, usize)>,
}

impl MatchAtoms {
    fn collect(table: &PreferenceTable, view: &SolverView) -> MatchAtoms {
        let mut found = MatchAtoms {
            grid: vec![vec![None; table.women.len()]; table.men.len()],
            ..MatchAtoms::default()
        };
        for (atom, name) in view.atoms().iter() {
            let (pred, args) = split_atom(name);
            if pred != "match" || args.len() != 2 {
                continue;
            }
            if let (Some(m), Some(w)) = (table.man_index(args[0]), table.woman_index(args[1])) {
                found.all.push((atom, m, w));
                found.grid[m][w] = Some(atom);
                found.pairs.insert(atom, (m, w));
            }
        }
        found
    }
}

/// Checks the stability constraint on total candidates and returns its violated instances.
#[derive(Clone, Debug)]
pub struct LazyStableMarriage {
    table: PreferenceTable,
    matches: Option<MatchAtoms>,
    violated: Vec<Vec<Literal>>,
}

impl LazyStableMarriage {
    pub fn new(table: PreferenceTable) -> LazyStableMarriage {
        LazyStableMarriage { table, matches: None, violated: Vec::new() }
    }
}

impl Propagator for LazyStableMarriage {
    fn name(&self) -> &str {
        "sm-lazy"
    }

    fn check_stable_model(&mut self, view: &SolverView) -> ExtResult<bool> {
        let table = &self.table;
        let matches = self.matches.get_or_insert_with(|| MatchAtoms::collect(table, view));
        let current: Vec<(Atom, usize, usize)> =
            matches.all.iter().copied().filter(|&(a, _, _)| view.is_true(a.pos())).collect();
        let mut violated = BTreeSet::new();
        for &(a, m, w1) in &current {
            for &(b, m1, w) in &current {
                if m != m1 && table.blocks(m, w1, m1, w) {
                    let mut c = vec![a.pos(), b.pos()];
                    c.sort();
                    violated.insert(c);
                }
            }
        }
        self.violated = violated.into_iter().collect();
        Ok(self.violated.is_empty())
    }

    fn get_reasons_for_check_failure(&mut self, _: &SolverView) -> ExtResult<Vec<Vec<Literal>>> {
        Ok(std::mem::take(&mut self.violated))
    }
}

/// Simulates unit propagation over the stability constraint: once `match(m,w1)` is true, every
/// `match(m1,w)` that would complete a blocking pair with it, in either role, is inferred
/// false. The reason for `~match(m1,w)` is `{match(m1,w), match(m,w1)}`.
///
/// With [`Priority::Post`] the same inferences are computed per batch.
#[derive(Clone, Debug)]
pub struct EagerStableMarriage {
    table: PreferenceTable,
    priority: Priority,
    matches: MatchAtoms,
    /// For each inferred literal, the true match literal that triggered it.
    trigger: HashMap<Literal, Literal>,
}

impl EagerStableMarriage {
    pub fn eager(table: PreferenceTable) -> EagerStableMarriage {
        EagerStableMarriage::with_priority(table, Priority::Eager)
    }

    pub fn post(table: PreferenceTable) -> EagerStableMarriage {
        EagerStableMarriage::with_priority(table, Priority::Post)
    }

    fn with_priority(table: PreferenceTable, priority: Priority) -> EagerStableMarriage {
        EagerStableMarriage { table, priority, matches: MatchAtoms::default(), trigger: HashMap::new() }
    }

    fn infer(&mut self, lit: Literal, view: &SolverView, out: &mut Vec<Literal>) {
        let Some(&(m, w1)) = self.matches.pairs.get(&lit.atom()) else {
            return;
        };
        if !lit.is_positive() {
            return;
        }
        for &(other, m1, w) in &self.matches.all {
            if m1 == m {
                continue;
            }
            if !(self.table.blocks(m, w1, m1, w) || self.table.blocks(m1, w, m, w1)) {
                continue;
            }
            let inferred = other.neg();
            if view.is_true(inferred) {
                continue;
            }
            self.trigger.entry(inferred).or_insert(lit);
            out.push(inferred);
        }
    }
}

impl Propagator for EagerStableMarriage {
    fn name(&self) -> &str {
        match self.priority {
            Priority::Eager => "sm-eager",
            Priority::Post => "sm-post",
        }
    }

    fn priority(&self) -> Priority {
        self.priority
    }

    fn attach_literals(&mut self, view: &SolverView) -> ExtResult<Vec<Literal>> {
        self.matches = MatchAtoms::collect(&self.table, view);
        Ok(self.matches.all.iter().map(|&(a, _, _)| a.pos()).collect())
    }

    fn on_literal_true(&mut self, lit: Literal, view: &SolverView) -> ExtResult<Vec<Literal>> {
        let mut out = Vec::new();
        self.infer(lit, view, &mut out);
        Ok(out)
    }

    fn on_literals_true(&mut self, lits: &[Literal], view: &SolverView) -> ExtResult<Vec<Literal>> {
        let mut out = Vec::new();
        for &lit in lits {
            self.infer(lit, view, &mut out);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn on_literals_undefined(&mut self, lits: &[Literal], _: &SolverView) -> ExtResult<()> {
        let gone: BTreeSet<Literal> = lits.iter().copied().collect();
        self.trigger.retain(|_, t| !gone.contains(t));
        Ok(())
    }

    fn get_reason_for_literal(&mut self, lit: Literal, _: &SolverView) -> ExtResult<Vec<Literal>> {
        match self.trigger.get(&lit) {
            Some(&t) => Ok(vec![lit.complement(), t]),
            None => Err(format!("no inference recorded for {}", lit.to_signed()).into()),
        }
    }
}
