//! Naive constraint answer set solving.
//!
//! Programs mark CSP content with three kinds of special atoms:
//!
//! - `cspdomain(fd)` declares the domain kind (only finite integer domains exist here);
//! - `cspvar(x,lo,hi)` declares variable `x` ranging over `lo..=hi`;
//! - `required(e REL c)` is an irregular atom standing for a linear constraint, where `e` is a
//!   sum of terms `k*x`, `x` or `k`, and `REL` is one of `<`, `<=`, `>`, `>=`, `=`, `!=`.
//!   Both sides may be linear expressions.
//!
//! An answer set is accepted iff the constraints of its true `required` atoms have a solution
//! over the domains of its true `cspvar` atoms. The check runs on total candidates only, by
//! exhaustive search over the domain product. On failure the reason is the set of all true
//! special atoms.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::split_atom;
use crate::extension::{ExtResult, Propagator, SolverView};
use crate::program::{Atom, Literal};

/// Largest domain product searched.
pub const DEFAULT_PRODUCT_CAP: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CaspError {
    #[error("domain product of {size} exceeds the limit of {cap}")]
    DomainProductTooLarge { size: u128, cap: u128 },
    #[error("malformed CSP atom {atom}: {message}")]
    MalformedConstraint { atom: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Relation {
    fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ne => lhs != rhs,
        }
    }
}

/// `sum(coef * var) REL constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(i64, String)>,
    pub relation: Relation,
    pub constant: i64,
}

impl LinearConstraint {
    pub fn parse(text: &str) -> Result<LinearConstraint, String> {
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (at, op, relation) = [
            ("<=", Relation::Le),
            (">=", Relation::Ge),
            ("!=", Relation::Ne),
            ("<", Relation::Lt),
            (">", Relation::Gt),
            ("=", Relation::Eq),
        ]
        .into_iter()
        .filter_map(|(op, rel)| text.find(op).map(|i| (i, op, rel)))
        .min_by_key(|&(i, op, _)| (i, std::cmp::Reverse(op.len())))
        .ok_or_else(|| format!("no relation in `{text}`"))?;
        let (lhs, rhs) = (&text[..at], &text[at + op.len()..]);
        if rhs.contains(['<', '>', '=', '!']) {
            return Err(format!("more than one relation in `{text}`"));
        }
        let (left, lc) = parse_sum(lhs)?;
        let (right, rc) = parse_sum(rhs)?;
        let mut coef: BTreeMap<String, i64> = BTreeMap::new();
        for (k, v) in left {
            *coef.entry(v).or_default() += k;
        }
        for (k, v) in right {
            *coef.entry(v).or_default() -= k;
        }
        Ok(LinearConstraint {
            terms: coef.into_iter().filter(|&(_, k)| k != 0).map(|(v, k)| (k, v)).collect(),
            relation,
            constant: rc - lc,
        })
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|(_, v)| v.as_str())
    }

    pub fn holds(&self, value: impl Fn(&str) -> i64) -> bool {
        let lhs: i64 = self.terms.iter().map(|(k, v)| k * value(v)).sum();
        self.relation.holds(lhs, self.constant)
    }
}

/// Parses `t1 ± t2 ± ...` into variable terms and a constant.
fn parse_sum(text: &str) -> Result<(Vec<(i64, String)>, i64), String> {
    if text.is_empty() {
        return Err("empty side of a relation".into());
    }
    let mut terms = Vec::new();
    let mut constant = 0i64;
    let mut rest = text;
    let mut first = true;
    while !rest.is_empty() {
        let mut sign = 1;
        if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        } else if let Some(r) = rest.strip_prefix('-') {
            sign = -1;
            rest = r;
        } else if !first {
            return Err(format!("expected + or - before `{rest}`"));
        }
        first = false;
        let end = rest.find(['+', '-']).unwrap_or(rest.len());
        let term = &rest[..end];
        rest = &rest[end..];
        match term.split_once('*') {
            Some((k, v)) => {
                let k: i64 = k.parse().map_err(|_| format!("bad coefficient `{k}`"))?;
                terms.push((sign * k, variable(v)?));
            }
            None if term.starts_with(|c: char| c.is_ascii_digit()) => {
                let k: i64 = term.parse().map_err(|_| format!("bad constant `{term}`"))?;
                constant += sign * k;
            }
            None => terms.push((sign, variable(term)?)),
        }
    }
    Ok((terms, constant))
}

fn variable(name: &str) -> Result<String, String> {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') => {
            Ok(name.to_owned())
        }
        _ => Err(format!("bad variable `{name}`")),
    }
}

/// Variable bindings satisfying the constraints of an accepted answer set, sorted by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CspSolution {
    pub bindings: Vec<(String, i64)>,
}

impl fmt::Display for CspSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, x)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}={x}")?;
        }
        Ok(())
    }
}

enum Special {
    Domain,
    Var(Result<(String, i64, i64), String>),
    Required(Result<LinearConstraint, String>),
}

type SolutionSink = Box<dyn FnMut(&CspSolution)>;

pub struct CaspPropagator {
    special: Vec<(Atom, Special)>,
    cap: u128,
    reason: Vec<Literal>,
    solutions: Vec<CspSolution>,
    on_solution: Option<SolutionSink>,
}

impl Default for CaspPropagator {
    fn default() -> CaspPropagator {
        CaspPropagator::new()
    }
}

impl CaspPropagator {
    pub fn new() -> CaspPropagator {
        CaspPropagator {
            special: Vec::new(),
            cap: DEFAULT_PRODUCT_CAP,
            reason: Vec::new(),
            solutions: Vec::new(),
            on_solution: None,
        }
    }

    pub fn with_cap(mut self, cap: u128) -> CaspPropagator {
        self.cap = cap;
        self
    }

    /// Calls `f` with the solution of every accepted candidate.
    pub fn on_solution(mut self, f: impl FnMut(&CspSolution) + 'static) -> CaspPropagator {
        self.on_solution = Some(Box::new(f));
        self
    }

    /// Solutions of all accepted candidates so far.
    pub fn solutions(&self) -> &[CspSolution] {
        &self.solutions
    }

    fn classify(name: &str) -> Option<Special> {
        let (pred, args) = split_atom(name);
        match (pred, args.as_slice()) {
            ("cspdomain", [_]) => Some(Special::Domain),
            ("cspvar", [x, lo, hi]) => Some(Special::Var(
                match (variable(x), lo.parse::<i64>(), hi.parse::<i64>()) {
                    (Ok(x), Ok(lo), Ok(hi)) if lo <= hi => Ok((x, lo, hi)),
                    (Ok(_), Ok(lo), Ok(hi)) => Err(format!("empty bounds {lo}..{hi}")),
                    _ => Err("expected cspvar(var,lo,hi) with integer bounds".into()),
                },
            )),
            ("required", [c]) => Some(Special::Required(LinearConstraint::parse(c))),
            _ => None,
        }
    }

    /// Solves the CSP induced by the true special atoms.
    fn solve(&self, view: &SolverView) -> Result<Option<CspSolution>, CaspError> {
        let malformed = |atom: Atom, message: String| CaspError::MalformedConstraint {
            atom: view.atom_name(atom).to_owned(),
            message,
        };
        let mut domains: BTreeMap<String, (i64, i64)> = BTreeMap::new();
        let mut constraints = Vec::new();
        for (atom, kind) in &self.special {
            if !view.is_true(atom.pos()) {
                continue;
            }
            match kind {
                Special::Domain => {}
                Special::Var(Ok((x, lo, hi))) => {
                    let d = domains.entry(x.clone()).or_insert((*lo, *hi));
                    *d = (d.0.max(*lo), d.1.min(*hi));
                }
                Special::Var(Err(e)) | Special::Required(Err(e)) => return Err(malformed(*atom, e.clone())),
                Special::Required(Ok(c)) => constraints.push((*atom, c)),
            }
        }
        for (atom, c) in &constraints {
            if let Some(v) = c.variables().find(|v| !domains.contains_key(*v)) {
                return Err(malformed(*atom, format!("variable {v} has no true cspvar declaration")));
            }
        }
        let vars: Vec<(&String, i64, i64)> = domains.iter().map(|(v, &(lo, hi))| (v, lo, hi)).collect();
        if vars.iter().any(|&(_, lo, hi)| lo > hi) {
            return Ok(None);
        }
        let size = vars
            .iter()
            .try_fold(1u128, |acc, &(_, lo, hi)| acc.checked_mul((hi - lo + 1) as u128))
            .unwrap_or(u128::MAX);
        if size > self.cap {
            return Err(CaspError::DomainProductTooLarge { size, cap: self.cap });
        }
        let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.0.as_str(), i)).collect();
        let mut values: Vec<i64> = vars.iter().map(|v| v.1).collect();
        loop {
            if constraints.iter().all(|(_, c)| c.holds(|v| values[index[v]])) {
                let bindings = vars.iter().zip(&values).map(|(v, &x)| (v.0.clone(), x)).collect();
                return Ok(Some(CspSolution { bindings }));
            }
            // Advance the odometer, last variable fastest.
            let mut i = vars.len();
            loop {
                if i == 0 {
                    return Ok(None);
                }
                i -= 1;
                if values[i] < vars[i].2 {
                    values[i] += 1;
                    break;
                }
                values[i] = vars[i].1;
            }
        }
    }
}

impl Propagator for CaspPropagator {
    fn name(&self) -> &str {
        "casp"
    }

    fn attach_literals(&mut self, view: &SolverView) -> ExtResult<Vec<Literal>> {
        self.special = view
            .atoms()
            .iter()
            .filter_map(|(a, name)| CaspPropagator::classify(name).map(|s| (a, s)))
            .collect();
        Ok(Vec::new())
    }

    fn check_stable_model(&mut self, view: &SolverView) -> ExtResult<bool> {
        match self.solve(view)? {
            Some(solution) => {
                if let Some(f) = &mut self.on_solution {
                    f(&solution);
                }
                self.solutions.push(solution);
                Ok(true)
            }
            None => {
                self.reason = self
                    .special
                    .iter()
                    .map(|(a, _)| a.pos())
                    .filter(|&l| view.is_true(l))
                    .collect();
                Ok(false)
            }
        }
    }

    fn get_reasons_for_check_failure(&mut self, _: &SolverView) -> ExtResult<Vec<Vec<Literal>>> {
        Ok(vec![std::mem::take(&mut self.reason)])
    }
}
