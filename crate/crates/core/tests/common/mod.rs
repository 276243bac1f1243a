//! Oracles and instance generators shared by the integration suites. Nothing here calls into
//! the solver's own semantics module.

#![allow(dead_code)]

pub mod malformed;

use std::collections::{BTreeMap, BTreeSet};
use std::process::{Command, Stdio};

use aspx_core::builtin::PreferenceTable;
use aspx_core::{Atom, GroundProgram, Rule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type ModelSet = BTreeSet<Vec<String>>;

/// A random normal program over `1..=max_atoms` atoms with up to `max_rules` rules.
pub fn random_program(seed: u64, max_atoms: usize, max_rules: usize) -> GroundProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_atoms);
    let mut p = GroundProgram::new();
    let atoms: Vec<Atom> = (0..n).map(|i| p.atoms_mut().intern(&format!("p{i}"))).collect();
    let rules = rng.random_range(0..=max_rules);
    for _ in 0..rules {
        let head = if rng.random_bool(0.85) { Some(atoms[rng.random_range(0..n)]) } else { None };
        let pos = rng.random_range(0..=2);
        let neg = rng.random_range(0..=2);
        let positive = (0..pos).map(|_| atoms[rng.random_range(0..n)]).collect();
        let negative = (0..neg).map(|_| atoms[rng.random_range(0..n)]).collect();
        p.add_rule(Rule { head, positive, negative });
    }
    p
}

/// Stable models by enumerating all interpretations and testing each against its reduct.
pub fn brute_force(p: &GroundProgram) -> ModelSet {
    let n = p.num_atoms();
    assert!(n <= 20, "brute force over {n} atoms");
    let mut out = ModelSet::new();
    for mask in 0u32..(1 << n) {
        let holds = |a: &Atom| mask >> (a.id() - 1) & 1 == 1;
        // Least model of the reduct.
        let mut lm = vec![false; n + 1];
        let mut changed = true;
        while changed {
            changed = false;
            for r in p.rules() {
                let Some(h) = r.head else { continue };
                if lm[h.index()] || r.negative.iter().any(holds) {
                    continue;
                }
                if r.positive.iter().all(|a| lm[a.index()]) {
                    lm[h.index()] = true;
                    changed = true;
                }
            }
        }
        let same = p.atoms().iter().all(|(a, _)| lm[a.index()] == holds(&a));
        let constraints_ok = p
            .rules()
            .iter()
            .filter(|r| r.head.is_none())
            .all(|r| !(r.positive.iter().all(holds) && !r.negative.iter().any(holds)));
        if same && constraints_ok {
            let mut m: Vec<String> =
                p.atoms().iter().filter(|(a, _)| holds(a)).map(|(_, s)| s.to_owned()).collect();
            m.sort();
            out.insert(m);
        }
    }
    out
}

pub fn as_set(models: Vec<Vec<String>>) -> ModelSet {
    models.into_iter().collect()
}

/// Every permutation of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Stable matchings of a square instance: perfect matchings without a pair `(m, w)` where `m`
/// strictly prefers `w` to his partner and `w` likes `m` at least as much as hers.
pub fn stable_matchings(t: &PreferenceTable) -> BTreeSet<Vec<(String, String)>> {
    let n = t.men().len();
    assert_eq!(n, t.women().len());
    let mut out = BTreeSet::new();
    for wife in permutations(n) {
        let mut husband = vec![0; n];
        for (m, &w) in wife.iter().enumerate() {
            husband[w] = m;
        }
        let blocked = (0..n).any(|m| {
            (0..n).any(|w| {
                w != wife[m]
                    && t.man_score(m, w) > t.man_score(m, wife[m])
                    && t.woman_score(w, m) >= t.woman_score(w, husband[w])
            })
        });
        if !blocked {
            let mut pairs: Vec<(String, String)> =
                (0..n).map(|m| (t.men()[m].clone(), t.women()[wife[m]].clone())).collect();
            pairs.sort();
            out.insert(pairs);
        }
    }
    out
}

/// The `match(m,w)` atoms of each model.
pub fn matchings(models: &[Vec<String>]) -> BTreeSet<Vec<(String, String)>> {
    models
        .iter()
        .map(|m| {
            let mut pairs: Vec<(String, String)> = m
                .iter()
                .filter_map(|a| a.strip_prefix("match(")?.strip_suffix(')')?.split_once(','))
                .map(|(x, y)| (x.to_owned(), y.to_owned()))
                .collect();
            pairs.sort();
            pairs
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CspConstraint {
    pub terms: Vec<(i64, usize)>,
    pub rel: &'static str,
    pub bound: i64,
}

impl CspConstraint {
    pub fn holds(&self, values: &[i64]) -> bool {
        let lhs: i64 = self.terms.iter().map(|&(k, v)| k * values[v]).sum();
        match self.rel {
            "<" => lhs < self.bound,
            "<=" => lhs <= self.bound,
            ">" => lhs > self.bound,
            ">=" => lhs >= self.bound,
            "=" => lhs == self.bound,
            "!=" => lhs != self.bound,
            _ => unreachable!(),
        }
    }

    pub fn render(&self, names: &[&str]) -> String {
        let mut s = String::new();
        for (i, &(k, v)) in self.terms.iter().enumerate() {
            if i > 0 && k >= 0 {
                s.push('+');
            }
            s.push_str(&format!("{k}*{}", names[v]));
        }
        format!("{s}{}{}", self.rel, self.bound)
    }
}

pub const CSP_VARS: [&str; 4] = ["x", "y", "z", "u"];

/// A constraint answer set instance: choice atoms guard required constraints over small domains.
pub struct CaspInstance {
    pub source: String,
    pub domains: Vec<(i64, i64)>,
    /// Constraint and the choice atom guarding it, if any.
    pub constraints: Vec<(CspConstraint, Option<usize>)>,
    pub choices: usize,
}

pub fn random_casp(seed: u64) -> CaspInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = rng.random_range(1..=4);
    let choices = rng.random_range(0..=3);
    let mut src = String::from("cspdomain(fd).\n");
    let mut domains = Vec::new();
    for v in CSP_VARS.iter().take(vars) {
        let lo = rng.random_range(-2..=2);
        let hi = lo + rng.random_range(0..4);
        src.push_str(&format!("cspvar({v},{lo},{hi}).\n"));
        domains.push((lo, hi));
    }
    for c in 0..choices {
        src.push_str(&format!("c{c} :- not d{c}.\nd{c} :- not c{c}.\n"));
    }
    let rels = ["<", "<=", ">", ">=", "=", "!="];
    let mut constraints = Vec::new();
    for _ in 0..rng.random_range(1..=6) {
        let mut terms = Vec::new();
        for _ in 0..rng.random_range(1..=2) {
            let k = [-2, -1, 1, 2][rng.random_range(0..4)];
            terms.push((k, rng.random_range(0..vars)));
        }
        let c = CspConstraint { terms, rel: rels[rng.random_range(0..6)], bound: rng.random_range(-3..=5) };
        let guard = if choices > 0 && rng.random_bool(0.7) { Some(rng.random_range(0..choices)) } else { None };
        match guard {
            Some(g) => src.push_str(&format!("required({}) :- c{g}.\n", c.render(&CSP_VARS))),
            None => src.push_str(&format!("required({}).\n", c.render(&CSP_VARS))),
        }
        constraints.push((c, guard));
    }
    CaspInstance { source: src, domains, constraints, choices }
}

/// Accepted answer sets of a CASP instance: the choice combinations whose active constraints
/// have a solution, together with the special atoms that are true.
pub fn casp_oracle(inst: &CaspInstance) -> BTreeSet<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << inst.choices) {
        let chosen = |c: usize| mask >> c & 1 == 1;
        let active: Vec<&CspConstraint> = inst
            .constraints
            .iter()
            .filter(|(_, g)| g.is_none_or(chosen))
            .map(|(c, _)| c)
            .collect();
        let mut values: Vec<i64> = inst.domains.iter().map(|d| d.0).collect();
        let mut found = false;
        'search: loop {
            if active.iter().all(|c| c.holds(&values)) {
                found = true;
                break;
            }
            for i in 0..values.len() {
                if values[i] < inst.domains[i].1 {
                    values[i] += 1;
                    continue 'search;
                }
                values[i] = inst.domains[i].0;
            }
            break;
        }
        if found {
            let mut atoms: BTreeSet<String> = (0..inst.choices)
                .map(|c| if chosen(c) { format!("c{c}") } else { format!("d{c}") })
                .collect();
            atoms.extend(
                active.iter().map(|c| format!("required({})", c.render(&CSP_VARS))),
            );
            out.insert(atoms);
        }
    }
    out
}

/// Drops the CSP declaration facts, which are in every answer set.
pub fn without_declarations(model: &[String]) -> BTreeSet<String> {
    model.iter().filter(|a| !a.starts_with("csp")).cloned().collect()
}

pub fn python3() -> bool {
    Command::new("python3")
        .arg("--version")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .is_ok_and(|s| s.success())
}

pub fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Counts of each dispatched method, for comparing logs in aggregate.
pub fn histogram<'a>(methods: impl Iterator<Item = &'a str>) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for m in methods {
        *h.entry(m.to_owned()).or_default() += 1;
    }
    h
}
