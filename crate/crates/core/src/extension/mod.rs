//! External propagators and heuristics.
//!
//! A [`Propagator`] attaches to a set of literals and is notified when they become true or
//! undefined. It may infer further literals, explaining each one on demand with
//! [`Propagator::get_reason_for_literal`], and may veto total candidate models through
//! [`Propagator::check_stable_model`]. A [`Heuristic`] additionally observes conflicts,
//! learning and restarts, can tune the default activity heuristic, and can take over branching
//! via [`Heuristic::select_literal`].
//!
//! The engine calls every method synchronously on its own thread and validates every returned
//! value against the method's contract; violations abort the search with
//! [`crate::SolveError::ContractViolation`].
//!
//! Reasons for inferred literals are requested lazily: only when conflict analysis needs the
//! implication graph edge for that literal, or immediately when the inferred literal is
//! already false (the propagator detected a conflict). A propagator must therefore be able to
//! explain any of its inferences for as long as the literal stays assigned.

mod contract;
mod method;

use std::time::Duration;

use crate::engine::{Assignment, Statistics, Truth};
use crate::program::{Atom, AtomTable, Literal, Sign};

pub(crate) use contract::{validate_failure_constraint, validate_reason};
pub use method::Method;

/// Error raised by an extension callback. Scripted plugins surface transport failures here.
pub type ExtensionError = Box<dyn std::error::Error + Send + Sync + 'static>;

pub type ExtResult<T> = Result<T, ExtensionError>;

/// When a propagator runs inside the propagation fixpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Priority {
    /// Receives [`Propagator::on_literal_true`] for every attached literal, interleaved with
    /// unit propagation.
    Eager,
    /// Receives [`Propagator::on_literals_true`] batches once eager propagation is exhausted.
    Post,
}

/// Read-only view of the search state handed to every callback.
pub struct SolverView<'a> {
    pub(crate) assignment: &'a Assignment,
    pub(crate) atoms: &'a AtomTable,
    pub(crate) stats: &'a Statistics,
    pub(crate) elapsed: Duration,
}

impl<'a> SolverView<'a> {
    /// A view outside any search, for driving an extension directly.
    pub fn new(assignment: &'a Assignment, atoms: &'a AtomTable, stats: &'a Statistics) -> SolverView<'a> {
        SolverView { assignment, atoms, stats, elapsed: Duration::ZERO }
    }

    pub fn value(&self, lit: Literal) -> Truth {
        self.assignment.value(lit)
    }

    pub fn is_true(&self, lit: Literal) -> bool {
        self.assignment.is_true(lit)
    }

    pub fn is_undefined(&self, atom: Atom) -> bool {
        !self.assignment.is_assigned(atom)
    }

    pub fn atoms(&self) -> &'a AtomTable {
        self.atoms
    }

    pub fn atom_name(&self, atom: Atom) -> &'a str {
        self.atoms.name(atom)
    }

    /// Program atoms that are currently true, by increasing id.
    pub fn true_atoms(&self) -> Vec<Atom> {
        self.atoms
            .iter()
            .map(|(a, _)| a)
            .filter(|&a| self.assignment.is_true(a.pos()))
            .collect()
    }

    pub fn decision_level(&self) -> u32 {
        self.assignment.decision_level()
    }

    pub fn statistics(&self) -> &'a Statistics {
        self.stats
    }

    /// Monotonic time since the search started.
    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }
}

/// Return value of [`Heuristic::select_literal`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeuristicDirective {
    /// Branch on this undefined literal.
    Choice(Literal),
    /// Let the activity heuristic make the next `n` choices, or all future ones if `n == 0`.
    Minisat(u32),
    /// Retract choices until this assigned literal is undefined again.
    Unroll(Literal),
    /// Restart the search from decision level 0.
    Restart,
}

/// A custom propagator. All methods have inert defaults.
pub trait Propagator {
    fn name(&self) -> &str {
        "propagator"
    }

    fn priority(&self) -> Priority {
        Priority::Eager
    }

    /// Literals whose assignment changes are reported to this propagator. Called once, before
    /// the initial simplifications.
    fn attach_literals(&mut self, _view: &SolverView) -> ExtResult<Vec<Literal>> {
        Ok(Vec::new())
    }

    /// Literals that hold in every stable model; asserted at decision level 0.
    fn simplify(&mut self, _view: &SolverView) -> ExtResult<Vec<Literal>> {
        Ok(Vec::new())
    }

    /// `lit` (attached) became true. Returned literals are added to the assignment.
    fn on_literal_true(&mut self, _lit: Literal, _view: &SolverView) -> ExtResult<Vec<Literal>> {
        Ok(Vec::new())
    }

    /// Attached literals that became true since the last post-propagation round.
    fn on_literals_true(
        &mut self,
        _lits: &[Literal],
        _view: &SolverView,
    ) -> ExtResult<Vec<Literal>> {
        Ok(Vec::new())
    }

    /// Attached literals removed from the assignment by an unroll or restart.
    fn on_literals_undefined(&mut self, _lits: &[Literal], _view: &SolverView) -> ExtResult<()> {
        Ok(())
    }

    /// Explains an inferred `lit`: a constraint containing `~lit` whose other literals are all
    /// true and were assigned before `lit`.
    fn get_reason_for_literal(
        &mut self,
        lit: Literal,
        _view: &SolverView,
    ) -> ExtResult<Vec<Literal>> {
        Err(format!("no reason available for literal {}", lit.to_signed()).into())
    }

    /// Accepts or rejects a total assignment.
    fn check_stable_model(&mut self, _view: &SolverView) -> ExtResult<bool> {
        Ok(true)
    }

    /// Constraints violated by the assignment just rejected by `check_stable_model`.
    fn get_reasons_for_check_failure(
        &mut self,
        _view: &SolverView,
    ) -> ExtResult<Vec<Vec<Literal>>> {
        Ok(Vec::new())
    }
}

/// A custom branching heuristic. It is also a propagator, so it can attach literals to mirror
/// the assignment.
pub trait Heuristic: Propagator {
    fn on_conflict(&mut self, _view: &SolverView) -> ExtResult<()> {
        Ok(())
    }

    /// A literal traversed while computing the first UIP.
    fn on_lit_in_conflict(&mut self, _lit: Literal, _view: &SolverView) -> ExtResult<()> {
        Ok(())
    }

    /// A constraint was added to the program: a learned nogood, an installed propagator
    /// reason, or a check-failure constraint.
    fn on_learning_constraint(
        &mut self,
        _constraint: &[Literal],
        _view: &SolverView,
    ) -> ExtResult<()> {
        Ok(())
    }

    fn on_restart(&mut self, _view: &SolverView) -> ExtResult<()> {
        Ok(())
    }

    /// Initial activities for the default heuristic.
    fn init_minisat(&mut self, _view: &SolverView) -> ExtResult<Vec<(Atom, u64)>> {
        Ok(Vec::new())
    }

    /// Amplifying factors applied to activities when selecting a branching atom.
    fn factor_minisat(&mut self, _view: &SolverView) -> ExtResult<Vec<(Atom, u64)>> {
        Ok(Vec::new())
    }

    /// Preferred branching polarity; the default is negative.
    fn sign_minisat(&mut self, _view: &SolverView) -> ExtResult<Vec<(Atom, Sign)>> {
        Ok(Vec::new())
    }

    fn select_literal(&mut self, _view: &SolverView) -> ExtResult<HeuristicDirective> {
        Ok(HeuristicDirective::Minisat(0))
    }
}

/// Extensions registered for one search.
#[derive(Default)]
pub struct Extensions {
    pub propagators: Vec<Box<dyn Propagator>>,
    pub heuristic: Option<Box<dyn Heuristic>>,
}

impl Extensions {
    pub fn new() -> Extensions {
        Extensions::default()
    }

    pub fn with_propagator(mut self, p: impl Propagator + 'static) -> Extensions {
        self.propagators.push(Box::new(p));
        self
    }

    pub fn with_heuristic(mut self, h: impl Heuristic + 'static) -> Extensions {
        self.heuristic = Some(Box::new(h));
        self
    }
}
