//! Model-theoretic checks: reducts, least models, stability and support.

use std::collections::BTreeSet;

use crate::program::{Atom, GroundProgram, Rule};

/// Least model of the positive rules in `rules`, by fixpoint of the immediate-consequence step.
///
/// Negative bodies are ignored by the caller's contract: pass a positive program (e.g. a
/// reduct). Constraints are skipped.
pub fn least_model<'a>(num_atoms: usize, rules: impl IntoIterator<Item = &'a Rule>) -> Vec<bool> {
    let rules: Vec<&Rule> = rules.into_iter().filter(|r| r.head.is_some()).collect();
    let mut model = vec![false; num_atoms + 1];
    // Counter-based propagation: each rule fires once its positive body is derived.
    let mut missing: Vec<usize> = rules.iter().map(|r| r.positive.len()).collect();
    let mut watchers: Vec<Vec<usize>> = vec![Vec::new(); num_atoms + 1];
    for (i, r) in rules.iter().enumerate() {
        for a in &r.positive {
            watchers[a.index()].push(i);
        }
    }
    let mut queue: Vec<Atom> = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        if missing[i] == 0 {
            let h = r.head.unwrap();
            if !model[h.index()] {
                model[h.index()] = true;
                queue.push(h);
            }
        }
    }
    while let Some(a) = queue.pop() {
        for &i in &watchers[a.index()] {
            missing[i] -= 1;
            if missing[i] == 0 {
                let h = rules[i].head.unwrap();
                if !model[h.index()] {
                    model[h.index()] = true;
                    queue.push(h);
                }
            }
        }
    }
    model
}

/// The reduct of `program` w.r.t. the interpretation `is_true`: rules whose negative body is
/// false are deleted, the others lose their negative body.
pub fn reduct(program: &GroundProgram, is_true: impl Fn(Atom) -> bool) -> Vec<Rule> {
    program
        .rules()
        .iter()
        .filter(|r| r.head.is_some() && r.negative.iter().all(|&a| !is_true(a)))
        .map(|r| Rule { head: r.head, positive: r.positive.clone(), negative: Vec::new() })
        .collect()
}

/// Reduct test: the least model of the reduct equals the true atoms, and every rule holds.
pub fn is_stable_model(program: &GroundProgram, model: &BTreeSet<Atom>) -> bool {
    let is_true = |a: Atom| model.contains(&a);
    if model.iter().any(|a| !program.atoms().contains(*a)) {
        return false;
    }
    if !program.rules().iter().all(|r| r.is_satisfied_by(is_true)) {
        return false;
    }
    let reduct = reduct(program, is_true);
    let least = least_model(program.num_atoms(), &reduct);
    program.atoms().iter().all(|(a, _)| least[a.index()] == is_true(a))
}

/// Every true atom heads a rule whose body holds in `model`.
pub fn is_supported(program: &GroundProgram, model: &BTreeSet<Atom>) -> bool {
    let is_true = |a: Atom| model.contains(&a);
    model.iter().all(|&a| {
        program.rules().iter().any(|r| {
            r.head == Some(a)
                && r.positive.iter().all(|&b| is_true(b))
                && r.negative.iter().all(|&b| !is_true(b))
        })
    })
}

/// Whether the positive dependency graph of `program` is acyclic.
pub fn is_tight(program: &GroundProgram) -> bool {
    let n = program.num_atoms();
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for r in program.rules() {
        if let Some(h) = r.head {
            for b in &r.positive {
                edges[h.index()].push(b.index());
            }
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n + 1];
    for start in 1..=n {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state[start] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < edges[v].len() {
                let w = edges[v][*next];
                *next += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => return false,
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    true
}
