//! Answer set solving with conflict-driven nogood learning and pluggable propagators and
//! branching heuristics.

pub mod engine;
pub mod extension;
pub mod program;
pub mod bridge;
pub mod builtin;
pub mod semantics;

pub use engine::{
    enumerate, solve, Assignment, AuditReport, DispatchCounts, DispatchEvent, Model, Reason,
    ResourceLimit, SearchOutcome, SolveError, Solver, SolverConfig, Statistics, Truth, Verdict,
};
pub use extension::{
    ExtResult, ExtensionError, Extensions, Heuristic, HeuristicDirective, Method, Priority,
    Propagator, SolverView,
};
pub use program::{parse_program, Atom, AtomTable, GroundProgram, Literal, ParseError, Rule, Sign};
