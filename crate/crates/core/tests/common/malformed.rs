//! In-process extensions that break one method contract each.

use aspx_core::{ExtResult, Heuristic, HeuristicDirective, Literal, Method, Priority, Propagator, SolverView};

/// Program for the broken propagators: atoms `a`=1, `b`=2 in an even loop, plus an
/// independent even loop over `c`, `d`.
pub const PROGRAM: &str = "a :- not b. b :- not a. c :- not d. d :- not c.";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Reason for an inferred literal omits its negation.
    MissingNegation,
    /// Reason mentions a literal that is not true.
    UntrueReason,
    /// Failure constraint with a literal that is false under the candidate.
    UntrueFailure,
    /// Rejects a candidate without giving any constraint.
    EmptyFailure,
    /// Branches on an assigned literal.
    AssignedChoice,
    /// Asks to unroll an undefined literal.
    UndefinedUnroll,
}

impl Fault {
    pub const ALL: [Fault; 6] = [
        Fault::MissingNegation,
        Fault::UntrueReason,
        Fault::UntrueFailure,
        Fault::EmptyFailure,
        Fault::AssignedChoice,
        Fault::UndefinedUnroll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fault::MissingNegation => "missing-negation",
            Fault::UntrueReason => "untrue-reason",
            Fault::UntrueFailure => "untrue-failure",
            Fault::EmptyFailure => "empty-failure",
            Fault::AssignedChoice => "assigned-choice",
            Fault::UndefinedUnroll => "undefined-unroll",
        }
    }

    /// The method whose result the engine must reject.
    pub fn method(self) -> Method {
        match self {
            Fault::MissingNegation | Fault::UntrueReason => Method::GetReasonForLiteral,
            Fault::UntrueFailure | Fault::EmptyFailure => Method::GetReasonsForCheckFailure,
            Fault::AssignedChoice | Fault::UndefinedUnroll => Method::SelectLiteral,
        }
    }

    pub fn is_heuristic(self) -> bool {
        matches!(self, Fault::AssignedChoice | Fault::UndefinedUnroll)
    }
}

fn lit(x: i64) -> Literal {
    Literal::from_signed(x).unwrap()
}

pub struct Broken(pub Fault);

impl Propagator for Broken {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn priority(&self) -> Priority {
        Priority::Eager
    }

    fn attach_literals(&mut self, _: &SolverView) -> ExtResult<Vec<Literal>> {
        Ok(match self.0 {
            Fault::MissingNegation | Fault::UntrueReason => vec![lit(1)],
            _ => Vec::new(),
        })
    }

    fn on_literal_true(&mut self, l: Literal, _: &SolverView) -> ExtResult<Vec<Literal>> {
        // Claims `~a` once `a` holds, which is already false: the reason is requested at once.
        Ok(vec![l.complement()])
    }

    fn get_reason_for_literal(&mut self, _: Literal, _: &SolverView) -> ExtResult<Vec<Literal>> {
        Ok(match self.0 {
            Fault::MissingNegation => vec![],
            // `b` is false whenever `a` is true.
            _ => vec![lit(1), lit(2)],
        })
    }

    fn check_stable_model(&mut self, _: &SolverView) -> ExtResult<bool> {
        Ok(!matches!(self.0, Fault::UntrueFailure | Fault::EmptyFailure))
    }

    fn get_reasons_for_check_failure(&mut self, view: &SolverView) -> ExtResult<Vec<Vec<Literal>>> {
        Ok(match self.0 {
            Fault::EmptyFailure => vec![],
            _ => vec![view.true_atoms().iter().map(|a| a.neg()).collect()],
        })
    }
}

impl Heuristic for Broken {
    fn select_literal(&mut self, view: &SolverView) -> ExtResult<HeuristicDirective> {
        let first_true = view.true_atoms().first().map(|a| a.pos());
        Ok(match (self.0, first_true) {
            (Fault::AssignedChoice, Some(l)) => HeuristicDirective::Choice(l),
            (Fault::UndefinedUnroll, _) => {
                let free = view.atoms().iter().map(|(a, _)| a).find(|&a| view.is_undefined(a));
                HeuristicDirective::Unroll(free.map(|a| a.pos()).unwrap_or(lit(1)))
            }
            // Nothing assigned yet: make an honest first choice.
            _ => HeuristicDirective::Choice(lit(-1)),
        })
    }
}
