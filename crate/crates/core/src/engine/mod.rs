//! CDCL search for stable models.
//!
//! The loop alternates propagation, conflict analysis and branching:
//!
//! 1. propagate to a fixpoint (unit propagation and eager propagators, then post
//!    propagators, repeating while post propagation infers something);
//! 2. on a conflict, learn a first-UIP nogood, backjump and assert it;
//! 3. on a total assignment, run the reduct check and every propagator's model check,
//!    adding their failure constraints when the candidate is rejected;
//! 4. otherwise restart if the Luby budget is spent, reduce the learned nogoods, and branch.

mod analyze;
mod assignment;
mod minisat;
mod propagate;
mod restart;
mod store;

use std::collections::{BTreeMap, VecDeque};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::extension::{
    validate_failure_constraint, ExtensionError, Extensions, Heuristic, HeuristicDirective,
    Method, Priority, Propagator, SolverView,
};
use crate::program::{completion_nogoods, Atom, GroundProgram, Literal, Nogood, NogoodKind};
use crate::semantics::{least_model, reduct};

pub use assignment::{Assignment, Reason, Truth};
pub use minisat::{MinisatHeuristic, DECAY, RESCALE_FACTOR, RESCALE_LIMIT};
pub use restart::luby;
pub use store::NogoodId;

use restart::{deletion_threshold, RestartSchedule};
use store::{NogoodStore, Status};

/// Search parameters.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub seed: u64,
    /// Stop after this many conflicts.
    pub conflict_budget: Option<u64>,
    pub timeout: Option<Duration>,
    /// Conflicts per Luby unit.
    pub restart_unit: u64,
    /// Learned nogoods are reduced once they exceed `max(deletion_base, deletion_factor * input)`.
    pub deletion_base: usize,
    pub deletion_factor: f64,
    /// Check first-UIP, reason and notification invariants while searching.
    pub audit: bool,
    /// Also check the watch invariant after every propagation fixpoint (slow).
    pub audit_watches: bool,
    /// Keep a log of every extension dispatch.
    pub record_dispatch: bool,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            seed: 0,
            conflict_budget: None,
            timeout: None,
            restart_unit: 64,
            deletion_base: 4000,
            deletion_factor: 2.0,
            audit: false,
            audit_watches: false,
            record_dispatch: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Statistics {
    pub conflicts: u64,
    pub decisions: u64,
    pub restarts: u64,
    pub learned: u64,
    pub deleted: u64,
    pub propagations: u64,
    pub models: u64,
    /// Constraints installed from propagator reasons.
    pub external_constraints: u64,
    /// Rejected total candidates (reduct check or propagator checks).
    pub check_failures: u64,
    pub dispatch: Vec<DispatchCounts>,
}

/// Calls per interface method for one registered extension.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DispatchCounts {
    pub extension: String,
    pub counts: BTreeMap<Method, u64>,
}

impl DispatchCounts {
    pub fn get(&self, method: Method) -> u64 {
        self.counts.get(&method).copied().unwrap_or(0)
    }
}

/// One extension call, recorded when `record_dispatch` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DispatchEvent {
    pub extension: usize,
    pub method: Method,
    pub literals: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Coherent,
    Incoherent,
}

/// Invariant checks performed in audit mode.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub learned_checked: u64,
    pub reasons_checked: u64,
    pub notifications_checked: u64,
    pub violations: Vec<String>,
}

/// A stable model as its true program atoms, by increasing id.
pub type Model = Vec<Atom>;

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub verdict: Verdict,
    pub models: Vec<Model>,
    pub statistics: Statistics,
    /// False when a resource limit stopped the enumeration early.
    pub complete: bool,
    pub trail_len: usize,
    pub audit: AuditReport,
}

impl SearchOutcome {
    /// Models as sorted atom-name lists.
    pub fn named_models(&self, program: &GroundProgram) -> Vec<Vec<String>> {
        self.models
            .iter()
            .map(|m| {
                let mut names: Vec<String> =
                    m.iter().map(|&a| program.atoms().name(a).to_owned()).collect();
                names.sort();
                names
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResourceLimit {
    Conflicts(u64),
    Time(Duration),
}

impl std::fmt::Display for ResourceLimit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResourceLimit::Conflicts(n) => write!(f, "conflict budget of {n} exhausted"),
            ResourceLimit::Time(t) => write!(f, "timeout of {:.1}s reached", t.as_secs_f64()),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("{extension}: contract violation in {method}: {detail}")]
    ContractViolation { extension: String, method: Method, detail: String },
    #[error("{extension}: {method} returned unknown atom {atom}")]
    UnknownAtom { extension: String, method: Method, atom: i64 },
    #[error("{extension}: {method} failed: {source}")]
    Extension {
        extension: String,
        method: Method,
        #[source]
        source: ExtensionError,
    },
    #[error("{0}")]
    ResourceLimit(ResourceLimit),
}

/// Computes one stable model.
pub fn solve(
    program: &GroundProgram,
    extensions: Extensions,
    config: &SolverConfig,
) -> Result<SearchOutcome, SolveError> {
    Solver::new(program.clone(), extensions, config.clone()).enumerate(1)
}

/// Computes up to `limit` stable models, all of them when `limit == 0`.
pub fn enumerate(
    program: &GroundProgram,
    extensions: Extensions,
    config: &SolverConfig,
    limit: usize,
) -> Result<SearchOutcome, SolveError> {
    Solver::new(program.clone(), extensions, config.clone()).enumerate(limit)
}

macro_rules! view {
    ($s:expr) => {
        SolverView {
            assignment: &$s.assignment,
            atoms: $s.program.atoms(),
            stats: &$s.stats,
            elapsed: $s.started.elapsed(),
        }
    };
}
pub(crate) use view;

/// Bookkeeping for one registered extension.
struct Slot {
    name: String,
    priority: Priority,
    attached: Vec<bool>,
    /// Literals reported true and not yet reported undefined, in trail order.
    notified: Vec<Literal>,
    post_head: usize,
    /// Audit copy of `notified` as a per-literal flag.
    live: Vec<bool>,
    counts: [u64; 16],
}

struct Slots {
    propagators: Vec<Box<dyn Propagator>>,
    heuristic: Option<Box<dyn Heuristic>>,
    meta: Vec<Slot>,
}

impl Slots {
    fn get(&mut self, i: usize) -> &mut dyn Propagator {
        if i < self.propagators.len() {
            &mut *self.propagators[i]
        } else {
            let h: &mut dyn Heuristic = self.heuristic.as_deref_mut().expect("heuristic slot");
            h
        }
    }

    fn heuristic(&mut self) -> Option<&mut (dyn Heuristic + 'static)> {
        self.heuristic.as_deref_mut()
    }

    fn heuristic_slot(&self) -> Option<usize> {
        self.heuristic.as_ref().map(|_| self.propagators.len())
    }

    fn len(&self) -> usize {
        self.meta.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum HeuristicMode {
    Custom,
    /// The activity heuristic makes this many more choices.
    Fallback(u32),
    Permanent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Fresh,
    Ready,
    Incoherent,
}

enum Settle {
    Conflict(NogoodId),
    Assigned,
    Quiet,
}

/// A CDCL solver instance for one program and one set of extensions.
pub struct Solver {
    program: GroundProgram,
    num_program_atoms: usize,
    config: SolverConfig,
    assignment: Assignment,
    store: NogoodStore,
    minisat: MinisatHeuristic,
    slots: Slots,
    eager_watch: Vec<Vec<usize>>,
    post_slots: Vec<usize>,
    stats: Statistics,
    schedule: RestartSchedule,
    mode: HeuristicMode,
    nogood_head: usize,
    ext_head: usize,
    pending: VecDeque<NogoodId>,
    input_count: usize,
    audit: AuditReport,
    log: Vec<DispatchEvent>,
    started: Instant,
    state: State,
    models: Vec<Model>,
}

impl Solver {
    pub fn new(program: GroundProgram, extensions: Extensions, config: SolverConfig) -> Solver {
        let completion = completion_nogoods(&program);
        let num_atoms = completion.num_atoms();
        Solver::from_parts(program, num_atoms, completion.nogoods, extensions, config)
    }

    /// Builds a solver over explicit nogoods; `num_atoms` counts program and auxiliary atoms.
    pub(crate) fn from_parts(
        program: GroundProgram,
        num_atoms: usize,
        nogoods: Vec<Nogood>,
        extensions: Extensions,
        config: SolverConfig,
    ) -> Solver {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut store = NogoodStore::new(num_atoms);
        for ng in nogoods {
            let kind = ng.kind();
            store.push(ng.into_literals(), kind);
        }
        let num_codes = 2 * num_atoms + 2;
        let mut meta = Vec::new();
        let mut names: Vec<String> =
            extensions.propagators.iter().map(|p| p.name().to_owned()).collect();
        let mut priorities: Vec<Priority> =
            extensions.propagators.iter().map(|p| p.priority()).collect();
        if let Some(h) = &extensions.heuristic {
            names.push(h.name().to_owned());
            priorities.push(h.priority());
        }
        for (name, priority) in names.into_iter().zip(priorities) {
            meta.push(Slot {
                name,
                priority,
                attached: vec![false; num_codes],
                notified: Vec::new(),
                post_head: 0,
                live: vec![false; num_codes],
                counts: [0; 16],
            });
        }
        let schedule = RestartSchedule::new(config.restart_unit);
        Solver {
            num_program_atoms: program.num_atoms(),
            program,
            assignment: Assignment::new(num_atoms),
            store,
            minisat: MinisatHeuristic::new(num_atoms, &mut rng),
            slots: Slots {
                propagators: extensions.propagators,
                heuristic: extensions.heuristic,
                meta,
            },
            eager_watch: vec![Vec::new(); num_codes],
            post_slots: Vec::new(),
            stats: Statistics::default(),
            schedule,
            mode: HeuristicMode::Custom,
            nogood_head: 0,
            ext_head: 0,
            pending: VecDeque::new(),
            input_count: 0,
            audit: AuditReport::default(),
            log: Vec::new(),
            started: Instant::now(),
            state: State::Fresh,
            models: Vec::new(),
            config,
        }
    }

    pub fn program(&self) -> &GroundProgram {
        &self.program
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn dispatch_log(&self) -> &[DispatchEvent] {
        &self.log
    }

    pub fn minisat(&self) -> &MinisatHeuristic {
        &self.minisat
    }

    /// Statistics including per-extension dispatch counts.
    pub fn statistics(&self) -> Statistics {
        let mut stats = self.stats.clone();
        stats.dispatch = self
            .slots
            .meta
            .iter()
            .map(|slot| DispatchCounts {
                extension: slot.name.clone(),
                counts: Method::ALL
                    .iter()
                    .filter(|m| slot.counts[m.index()] > 0)
                    .map(|&m| (m, slot.counts[m.index()]))
                    .collect(),
            })
            .collect();
        stats
    }

    pub fn solve(&mut self) -> Result<SearchOutcome, SolveError> {
        self.enumerate(1)
    }

    /// Searches for up to `limit` further stable models (all when `limit == 0`). Each model
    /// found is blocked before the search continues.
    pub fn enumerate(&mut self, limit: usize) -> Result<SearchOutcome, SolveError> {
        self.started = Instant::now();
        let start_models = self.models.len();
        let mut complete = true;
        if self.state == State::Fresh {
            self.state = if self.prepare()? { State::Ready } else { State::Incoherent };
        }
        while self.state == State::Ready {
            if let Some(limit) = self.limit_reached() {
                if self.models.len() == start_models {
                    return Err(SolveError::ResourceLimit(limit));
                }
                complete = false;
                break;
            }
            let conflict = match self.propagate()? {
                Some(c) => Some(c),
                None => match self.settle_pending() {
                    Settle::Conflict(c) => Some(c),
                    Settle::Assigned => continue,
                    Settle::Quiet => None,
                },
            };
            if let Some(conflict) = conflict {
                if !self.resolve_conflict(conflict)? {
                    self.state = State::Incoherent;
                }
                continue;
            }
            if self.config.audit_watches {
                for id in self.store.watch_violations(&self.assignment) {
                    self.audit.violations.push(format!("watch invariant broken for nogood {}", id.0));
                }
            }
            if self.assignment.is_total() {
                if self.check_model()? {
                    self.record_model();
                    if limit != 0 && self.models.len() - start_models >= limit {
                        complete = false;
                        break;
                    }
                }
                continue;
            }
            if self.schedule.due() {
                self.restart()?;
                self.schedule.advance();
                self.reduce_learned();
                continue;
            }
            self.decide()?;
        }
        if self.state == State::Incoherent {
            complete = true;
        }
        let models = self.models[start_models..].to_vec();
        Ok(SearchOutcome {
            verdict: if self.models.is_empty() { Verdict::Incoherent } else { Verdict::Coherent },
            models,
            statistics: self.statistics(),
            complete,
            trail_len: self.assignment.trail().len(),
            audit: self.audit.clone(),
        })
    }

    fn limit_reached(&self) -> Option<ResourceLimit> {
        if let Some(budget) = self.config.conflict_budget {
            if self.stats.conflicts >= budget {
                return Some(ResourceLimit::Conflicts(budget));
            }
        }
        if let Some(timeout) = self.config.timeout {
            if self.started.elapsed() >= timeout {
                return Some(ResourceLimit::Time(timeout));
            }
        }
        None
    }

    fn note(&mut self, slot: usize, method: Method, lits: &[Literal]) {
        self.slots.meta[slot].counts[method.index()] += 1;
        if self.config.record_dispatch {
            self.log.push(DispatchEvent {
                extension: slot,
                method,
                literals: lits.iter().map(|l| l.to_signed()).collect(),
            });
        }
    }

    fn violation(&self, slot: usize, method: Method, detail: impl Into<String>) -> SolveError {
        SolveError::ContractViolation {
            extension: self.slots.meta[slot].name.clone(),
            method,
            detail: detail.into(),
        }
    }

    fn ext_error(&self, slot: usize, method: Method, source: ExtensionError) -> SolveError {
        SolveError::Extension { extension: self.slots.meta[slot].name.clone(), method, source }
    }

    fn check_atoms(&self, slot: usize, method: Method, atoms: impl IntoIterator<Item = Atom>) -> Result<(), SolveError> {
        for a in atoms {
            if a.index() > self.num_program_atoms {
                return Err(SolveError::UnknownAtom {
                    extension: self.slots.meta[slot].name.clone(),
                    method,
                    atom: a.id() as i64,
                });
            }
        }
        Ok(())
    }

    /// Attaches extensions, simplifies the nogoods at level 0, applies propagator
    /// simplifications and heuristic initialization. Returns false if a level-0 conflict
    /// proves the program incoherent.
    fn prepare(&mut self) -> Result<bool, SolveError> {
        for slot in 0..self.slots.len() {
            self.note(slot, Method::AttachLiterals, &[]);
            let v = view!(self);
            let lits = self
                .slots
                .get(slot)
                .attach_literals(&v)
                .map_err(|e| self.ext_error(slot, Method::AttachLiterals, e))?;
            self.check_atoms(slot, Method::AttachLiterals, lits.iter().map(|l| l.atom()))?;
            let meta = &mut self.slots.meta[slot];
            for l in lits {
                if !meta.attached[l.code()] {
                    meta.attached[l.code()] = true;
                    if meta.priority == Priority::Eager {
                        self.eager_watch[l.code()].push(slot);
                    }
                }
            }
            if meta.priority == Priority::Post {
                self.post_slots.push(slot);
            }
        }

        let ids: Vec<NogoodId> = self.store.ids().collect();
        for &id in &ids {
            match self.store.literals(id).len() {
                0 => return Ok(false),
                1 => match self.store.status(id, &self.assignment) {
                    Status::Violated => return Ok(false),
                    Status::Unit(l) => self.assignment.assign(l.complement(), Reason::Nogood(id)),
                    _ => {}
                },
                _ => self.store.attach(id, &self.assignment),
            }
        }
        if self.propagate_nogoods().is_some() {
            return Ok(false);
        }
        self.simplify_store();

        for slot in 0..self.slots.len() {
            self.note(slot, Method::Simplify, &[]);
            let v = view!(self);
            let lits = self
                .slots
                .get(slot)
                .simplify(&v)
                .map_err(|e| self.ext_error(slot, Method::Simplify, e))?;
            self.check_atoms(slot, Method::Simplify, lits.iter().map(|l| l.atom()))?;
            for l in lits {
                match self.assignment.value(l) {
                    Truth::False => return Ok(false),
                    Truth::Undefined => self.assignment.assign(l, Reason::Fact),
                    Truth::True => {}
                }
            }
        }
        if self.propagate_nogoods().is_some() {
            return Ok(false);
        }

        if let Some(slot) = self.slots.heuristic_slot() {
            self.note(slot, Method::InitMinisat, &[]);
            let v = view!(self);
            let init = self
                .slots
                .heuristic()
                .unwrap()
                .init_minisat(&v)
                .map_err(|e| self.ext_error(slot, Method::InitMinisat, e))?;
            self.check_atoms(slot, Method::InitMinisat, init.iter().map(|p| p.0))?;
            for (a, value) in init {
                self.minisat.set_activity(a, value as f64);
            }
            self.note(slot, Method::FactorMinisat, &[]);
            let v = view!(self);
            let factors = self
                .slots
                .heuristic()
                .unwrap()
                .factor_minisat(&v)
                .map_err(|e| self.ext_error(slot, Method::FactorMinisat, e))?;
            self.check_atoms(slot, Method::FactorMinisat, factors.iter().map(|p| p.0))?;
            for (a, factor) in factors {
                self.minisat.set_factor(a, factor as f64);
            }
            self.note(slot, Method::SignMinisat, &[]);
            let v = view!(self);
            let signs = self
                .slots
                .heuristic()
                .unwrap()
                .sign_minisat(&v)
                .map_err(|e| self.ext_error(slot, Method::SignMinisat, e))?;
            self.check_atoms(slot, Method::SignMinisat, signs.iter().map(|p| p.0))?;
            for (a, sign) in signs {
                self.minisat.set_sign(a, sign);
            }
        }
        self.input_count = self.store.count_kind(NogoodKind::Input);
        Ok(true)
    }

    /// Drops nogoods satisfied at level 0 and removes their level-0 true literals.
    fn simplify_store(&mut self) {
        let ids: Vec<NogoodId> = self.store.ids().collect();
        for id in ids {
            let lits = self.store.literals(id);
            if lits.iter().any(|&l| self.assignment.is_false(l)) {
                self.store.delete(id);
                continue;
            }
            let kept: Vec<Literal> =
                lits.iter().copied().filter(|&l| !self.assignment.is_true(l)).collect();
            self.store.replace_literals(id, kept);
        }
        self.store.clear_watches();
        let ids: Vec<NogoodId> = self.store.ids().collect();
        for id in ids {
            self.store.attach(id, &self.assignment);
        }
    }

    /// Processes queued constraints (model checks, blocking, late reasons) against the
    /// current assignment.
    fn settle_pending(&mut self) -> Settle {
        let mut assigned = false;
        while let Some(id) = self.pending.pop_front() {
            if self.store.get(id).deleted {
                continue;
            }
            self.store.rewatch(id, &self.assignment);
            match self.store.status(id, &self.assignment) {
                Status::Violated => return Settle::Conflict(id),
                Status::Unit(l) => {
                    self.assignment.assign(l.complement(), Reason::Nogood(id));
                    self.stats.propagations += 1;
                    assigned = true;
                }
                Status::Satisfied | Status::Open => {}
            }
        }
        if assigned {
            Settle::Assigned
        } else {
            Settle::Quiet
        }
    }

    /// Adds a constraint to the program and queues it for settling.
    fn add_constraint(&mut self, lits: Vec<Literal>, kind: NogoodKind) -> NogoodId {
        let id = self.store.push(lits, kind);
        self.store.attach(id, &self.assignment);
        self.pending.push_back(id);
        id
    }

    fn notify_learning(&mut self, lits: &[Literal]) -> Result<(), SolveError> {
        if let Some(slot) = self.slots.heuristic_slot() {
            self.note(slot, Method::OnLearningConstraint, lits);
            let v = view!(self);
            self.slots
                .heuristic()
                .unwrap()
                .on_learning_constraint(lits, &v)
                .map_err(|e| self.ext_error(slot, Method::OnLearningConstraint, e))?;
        }
        Ok(())
    }

    /// Checks a total assignment: the reduct test, then every propagator's model check.
    fn check_model(&mut self) -> Result<bool, SolveError> {
        let n = self.num_program_atoms;
        let is_true = |a: Atom| self.assignment.is_true(a.pos());
        let reduct = reduct(&self.program, is_true);
        let least = least_model(n, &reduct);
        let true_atoms: Vec<Atom> = (1..=n as u32).map(Atom::new).filter(|&a| is_true(a)).collect();
        if true_atoms.iter().any(|a| !least[a.index()]) {
            self.stats.check_failures += 1;
            let blocking: Vec<Literal> = true_atoms.iter().map(|a| a.pos()).collect();
            self.notify_learning(&blocking)?;
            self.add_constraint(blocking, NogoodKind::Input);
            return Ok(false);
        }

        let mut accepted = true;
        for slot in 0..self.slots.len() {
            self.note(slot, Method::CheckStableModel, &[]);
            let v = view!(self);
            let ok = self
                .slots
                .get(slot)
                .check_stable_model(&v)
                .map_err(|e| self.ext_error(slot, Method::CheckStableModel, e))?;
            if ok {
                continue;
            }
            accepted = false;
            self.note(slot, Method::GetReasonsForCheckFailure, &[]);
            let v = view!(self);
            let reasons = self
                .slots
                .get(slot)
                .get_reasons_for_check_failure(&v)
                .map_err(|e| self.ext_error(slot, Method::GetReasonsForCheckFailure, e))?;
            if reasons.is_empty() {
                return Err(self.violation(
                    slot,
                    Method::GetReasonsForCheckFailure,
                    "model check failed without failure constraints",
                ));
            }
            for reason in reasons {
                validate_failure_constraint(&reason, &self.assignment, n)
                    .map_err(|d| self.violation(slot, Method::GetReasonsForCheckFailure, d))?;
                let ng = Nogood::new(reason, NogoodKind::External)
                    .expect("fully true constraints are consistent");
                let lits = ng.into_literals();
                self.notify_learning(&lits)?;
                self.add_constraint(lits, NogoodKind::External);
            }
        }
        if !accepted {
            self.stats.check_failures += 1;
        }
        Ok(accepted)
    }

    fn record_model(&mut self) {
        let model: Model = (1..=self.num_program_atoms as u32)
            .map(Atom::new)
            .filter(|a| self.assignment.is_true(a.pos()))
            .collect();
        let blocking = model.iter().map(|a| a.pos()).collect();
        self.models.push(model);
        self.stats.models += 1;
        self.add_constraint(blocking, NogoodKind::Input);
    }

    /// Removes every literal above `level` and notifies the extensions that observed them.
    pub(crate) fn backjump(&mut self, level: u32) -> Result<Vec<Literal>, SolveError> {
        let removed = self.assignment.unassign_above(level);
        if removed.is_empty() {
            return Ok(removed);
        }
        for l in &removed {
            self.minisat.insert(l.atom());
        }
        let len = self.assignment.trail().len();
        self.nogood_head = self.nogood_head.min(len);
        self.ext_head = self.ext_head.min(len);
        for slot in 0..self.slots.len() {
            let meta = &mut self.slots.meta[slot];
            meta.post_head = meta.post_head.min(len);
            let keep = meta
                .notified
                .iter()
                .rposition(|l| self.assignment.is_assigned(l.atom()))
                .map_or(0, |i| i + 1);
            if keep == meta.notified.len() {
                continue;
            }
            let undone = meta.notified.split_off(keep);
            if self.config.audit {
                for l in &undone {
                    self.audit.notifications_checked += 1;
                    if !meta.live[l.code()] {
                        self.audit.violations.push(format!(
                            "{}: undefined notification for {} without a true notification",
                            meta.name,
                            l.to_signed()
                        ));
                    }
                    if self.assignment.is_assigned(l.atom()) {
                        self.audit.violations.push(format!(
                            "{}: {} reported undefined while assigned",
                            meta.name,
                            l.to_signed()
                        ));
                    }
                    meta.live[l.code()] = false;
                }
            }
            self.note(slot, Method::OnLiteralsUndefined, &undone);
            let v = view!(self);
            self.slots
                .get(slot)
                .on_literals_undefined(&undone, &v)
                .map_err(|e| self.ext_error(slot, Method::OnLiteralsUndefined, e))?;
        }
        Ok(removed)
    }

    fn restart(&mut self) -> Result<(), SolveError> {
        self.backjump(0)?;
        self.stats.restarts += 1;
        if let Some(slot) = self.slots.heuristic_slot() {
            self.note(slot, Method::OnRestart, &[]);
            let v = view!(self);
            self.slots
                .heuristic()
                .unwrap()
                .on_restart(&v)
                .map_err(|e| self.ext_error(slot, Method::OnRestart, e))?;
        }
        Ok(())
    }

    fn is_locked(&self, id: NogoodId) -> bool {
        self.store.literals(id).iter().any(|l| {
            self.assignment.is_assigned(l.atom())
                && self.assignment.reason(l.atom()) == Reason::Nogood(id)
        })
    }

    /// Deletes the least active half of the learned nogoods once they exceed the threshold.
    /// Reasons of assigned literals and nogoods with at most two literals are kept.
    pub(crate) fn reduce_learned(&mut self) -> usize {
        let learned = self.store.num_learned();
        let threshold = deletion_threshold(
            self.config.deletion_base,
            self.config.deletion_factor,
            self.input_count,
        );
        if learned <= threshold {
            return 0;
        }
        let mut candidates: Vec<NogoodId> = self
            .store
            .ids()
            .filter(|&id| {
                let ng = self.store.get(id);
                ng.kind == NogoodKind::Learned && ng.literals.len() > 2 && !self.is_locked(id)
            })
            .collect();
        candidates.sort_by(|a, b| {
            self.store
                .get(*a)
                .activity
                .total_cmp(&self.store.get(*b).activity)
                .then(a.cmp(b))
        });
        let target = (learned / 2).min(candidates.len());
        for &id in &candidates[..target] {
            self.store.delete(id);
        }
        self.stats.deleted += target as u64;
        target
    }

    /// Makes a branching decision, consulting the custom heuristic when it is active.
    fn decide(&mut self) -> Result<(), SolveError> {
        let directive = match (self.slots.heuristic_slot(), self.mode) {
            (Some(slot), HeuristicMode::Custom) => {
                self.note(slot, Method::SelectLiteral, &[]);
                let v = view!(self);
                let d = self
                    .slots
                    .heuristic()
                    .unwrap()
                    .select_literal(&v)
                    .map_err(|e| self.ext_error(slot, Method::SelectLiteral, e))?;
                Some((slot, d))
            }
            _ => None,
        };
        let choice = match directive {
            None => {
                if let HeuristicMode::Fallback(n) = self.mode {
                    self.mode = if n <= 1 { HeuristicMode::Custom } else { HeuristicMode::Fallback(n - 1) };
                }
                self.minisat_choice()
            }
            Some((slot, HeuristicDirective::Choice(l))) => {
                self.check_atoms(slot, Method::SelectLiteral, [l.atom()])?;
                if self.assignment.is_assigned(l.atom()) {
                    return Err(self.violation(
                        slot,
                        Method::SelectLiteral,
                        format!("choice literal {} is not undefined", l.to_signed()),
                    ));
                }
                l
            }
            Some((_, HeuristicDirective::Minisat(n))) => {
                self.mode = match n {
                    0 => HeuristicMode::Permanent,
                    1 => HeuristicMode::Custom,
                    n => HeuristicMode::Fallback(n - 1),
                };
                self.minisat_choice()
            }
            Some((slot, HeuristicDirective::Unroll(l))) => {
                self.check_atoms(slot, Method::SelectLiteral, [l.atom()])?;
                if !self.assignment.is_assigned(l.atom()) {
                    return Err(self.violation(
                        slot,
                        Method::SelectLiteral,
                        format!("unroll literal {} is undefined", l.to_signed()),
                    ));
                }
                let level = self.assignment.level(l.atom());
                if level == 0 {
                    return Err(self.violation(
                        slot,
                        Method::SelectLiteral,
                        format!("unroll literal {} is fixed at decision level 0", l.to_signed()),
                    ));
                }
                self.backjump(level - 1)?;
                return Ok(());
            }
            Some((_, HeuristicDirective::Restart)) => {
                self.restart()?;
                self.schedule.reset_counter();
                return Ok(());
            }
        };
        self.assignment.new_level();
        self.assignment.assign(choice, Reason::Decision);
        self.stats.decisions += 1;
        Ok(())
    }

    fn minisat_choice(&mut self) -> Literal {
        let assignment = &self.assignment;
        self.minisat
            .select(|a| assignment.is_assigned(a))
            .expect("a non-total assignment has an undefined atom")
    }
}
