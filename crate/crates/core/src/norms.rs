//! Conditional norms `(cond; O|F(target); deadline; sanction)` and their
//! monitors.
//!
//! Each norm is tracked by a three-state monitor (idle, active, violated)
//! that consumes one labelling per step. The transition table:
//!
//! * idle: if `cond` holds the norm detaches and the active checks below are
//!   applied to the same labelling; otherwise it stays idle.
//! * active obligation: target holds → complied, back to idle; else deadline
//!   holds → violated; else stays active.
//! * active prohibition: target holds → violated; else deadline holds →
//!   withdrawn, back to idle; else stays active.
//!
//! When target and deadline hold in the same state the target wins unless
//! [`TieBreak::DeadlineFirst`] is selected. An instance that closes at step
//! `j` is idle afterwards, so `cond` is next evaluated at step `j + 1`.
//!
//! In [`MonitorMode::Path`] the violated state is absorbing, which gives the
//! path-set semantics used for revision analysis. In [`MonitorMode::Event`]
//! a violation is reported (with its sanction) and the monitor behaves as
//! idle on the next input, which is what the runtime sanction ledger needs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Labels};
use crate::model::{ModelError, Path, TransitionSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormError {
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("invalid norm id `{0}`")]
    InvalidId(String),
    #[error("negative sanction {sanction} on norm {norm}")]
    NegativeSanction { norm: String, sanction: Decimal },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    Obligation,
    Prohibition,
}

/// End of a detached norm's window. `Never` is unsatisfiable and is the
/// strictest possible deadline.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Deadline {
    Never,
    At(Formula),
}

impl Deadline {
    pub fn holds(&self, labels: &Labels) -> bool {
        match self {
            Deadline::Never => false,
            Deadline::At(f) => f.eval(labels),
        }
    }

    /// Formula with the same satisfying states; `Never` becomes `false`.
    pub fn as_formula(&self) -> Formula {
        match self {
            Deadline::Never => Formula::False,
            Deadline::At(f) => f.clone(),
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        match self {
            Deadline::Never => BTreeSet::new(),
            Deadline::At(f) => f.atoms(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Norm {
    pub id: String,
    pub cond: Formula,
    pub kind: NormKind,
    pub target: Formula,
    pub deadline: Deadline,
    pub sanction: Decimal,
}

impl Norm {
    pub fn prohibition(id: &str, cond: Formula, target: Formula, deadline: Deadline, sanction: Decimal) -> Self {
        Norm { id: id.to_string(), cond, kind: NormKind::Prohibition, target, deadline, sanction }
    }

    pub fn obligation(id: &str, cond: Formula, target: Formula, deadline: Deadline, sanction: Decimal) -> Self {
        Norm { id: id.to_string(), cond, kind: NormKind::Obligation, target, deadline, sanction }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut atoms = self.cond.atoms();
        atoms.extend(self.target.atoms());
        atoms.extend(self.deadline.atoms());
        atoms
    }

    pub fn is_template(&self) -> bool {
        self.cond.is_template()
            || self.target.is_template()
            || matches!(&self.deadline, Deadline::At(f) if f.is_template())
    }

    /// Instance of a template norm for one agent; the id is kept.
    pub fn ground(&self, agent: &str) -> Norm {
        Norm {
            id: self.id.clone(),
            cond: self.cond.ground(agent),
            kind: self.kind,
            target: self.target.ground(agent),
            deadline: match &self.deadline {
                Deadline::Never => Deadline::Never,
                Deadline::At(f) => Deadline::At(f.ground(agent)),
            },
            sanction: self.sanction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormSet {
    pub id: String,
    norms: Vec<Norm>,
}

impl NormSet {
    pub fn new(id: impl Into<String>, norms: Vec<Norm>) -> Result<Self, NormError> {
        let mut seen = BTreeSet::new();
        for n in &norms {
            if !crate::model::is_identifier(&n.id) {
                return Err(NormError::InvalidId(n.id.clone()));
            }
            if !seen.insert(n.id.as_str()) {
                return Err(NormError::DuplicateId(n.id.clone()));
            }
            if n.sanction.is_sign_negative() && !n.sanction.is_zero() {
                return Err(NormError::NegativeSanction { norm: n.id.clone(), sanction: n.sanction });
            }
        }
        Ok(NormSet { id: id.into(), norms })
    }

    pub fn single(id: impl Into<String>, norm: Norm) -> Self {
        Self::new(id, vec![norm]).expect("a single norm has a unique id")
    }

    pub fn norms(&self) -> &[Norm] {
        &self.norms
    }

    pub fn get(&self, id: &str) -> Option<&Norm> {
        self.norms.iter().find(|n| n.id == id)
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        self.norms.iter().flat_map(Norm::atoms).collect()
    }

    /// Same set with the norm of the same id replaced by `norm`.
    pub fn with_replaced(&self, id: impl Into<String>, norm: Norm) -> NormSet {
        let norms = self.norms.iter().map(|n| if n.id == norm.id { norm.clone() } else { n.clone() }).collect();
        NormSet { id: id.into(), norms }
    }

    /// Atoms used by the norms but missing from `vocabulary`, as `(norm, atom)`.
    pub fn unknown_atoms(&self, vocabulary: &BTreeSet<String>) -> Vec<(String, String)> {
        self.norms
            .iter()
            .flat_map(|n| n.atoms().into_iter().filter(|a| !vocabulary.contains(a)).map(move |a| (n.id.clone(), a)))
            .collect()
    }
}

/// Warnings that do not make a norm set invalid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "lint", rename_all = "snake_case")]
pub enum NormLint {
    /// An obligation whose deadline never arrives can never be violated.
    ObligationNeverViolated { norm: String },
}

impl fmt::Display for NormLint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormLint::ObligationNeverViolated { norm } => {
                write!(f, "norm {norm}: obligation with deadline `never` can never be violated")
            }
        }
    }
}

pub fn lint(set: &NormSet) -> Vec<NormLint> {
    set.norms
        .iter()
        .filter(|n| n.kind == NormKind::Obligation && n.deadline == Deadline::Never)
        .map(|n| NormLint::ObligationNeverViolated { norm: n.id.clone() })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Lifecycle {
    Idle,
    Active,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MonitorMode {
    /// Violation is absorbing.
    Path,
    /// Violation is reported and the monitor resets.
    Event,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreak {
    #[default]
    TargetFirst,
    DeadlineFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Semantics {
    pub tie_break: TieBreak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonitorState {
    pub lifecycle: Lifecycle,
    pub mode: MonitorMode,
}

impl MonitorState {
    pub fn idle(mode: MonitorMode) -> Self {
        MonitorState { lifecycle: Lifecycle::Idle, mode }
    }

    pub fn is_violated(&self) -> bool {
        self.lifecycle == Lifecycle::Violated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Detached,
    Complied,
    Withdrawn,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorEvent {
    pub step: usize,
    pub norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    pub kind: EventKind,
    pub sanction: Decimal,
}

/// Advances one monitor by one labelling.
pub fn monitor_step(
    state: MonitorState,
    norm: &Norm,
    labels: &Labels,
    semantics: Semantics,
) -> (MonitorState, Vec<EventKind>) {
    let mut events = Vec::new();
    let lifecycle = match state.lifecycle {
        Lifecycle::Violated if state.mode == MonitorMode::Path => Lifecycle::Violated,
        Lifecycle::Idle | Lifecycle::Violated => {
            if norm.cond.eval(labels) {
                events.push(EventKind::Detached);
                active_step(norm, labels, semantics, &mut events)
            } else {
                Lifecycle::Idle
            }
        }
        Lifecycle::Active => active_step(norm, labels, semantics, &mut events),
    };
    (MonitorState { lifecycle, mode: state.mode }, events)
}

/// Processes the initial labelling from the idle state.
pub fn monitor_init(
    norm: &Norm,
    mode: MonitorMode,
    labels: &Labels,
    semantics: Semantics,
) -> (MonitorState, Vec<EventKind>) {
    monitor_step(MonitorState::idle(mode), norm, labels, semantics)
}

fn active_step(norm: &Norm, labels: &Labels, semantics: Semantics, events: &mut Vec<EventKind>) -> Lifecycle {
    let target = norm.target.eval(labels);
    let deadline = norm.deadline.holds(labels);
    let (target, deadline) = match semantics.tie_break {
        TieBreak::TargetFirst => (target, deadline && !target),
        TieBreak::DeadlineFirst => (target && !deadline, deadline),
    };
    let (event, next) = match norm.kind {
        NormKind::Obligation if target => (EventKind::Complied, Lifecycle::Idle),
        NormKind::Obligation if deadline => (EventKind::Violated, Lifecycle::Violated),
        NormKind::Prohibition if target => (EventKind::Violated, Lifecycle::Violated),
        NormKind::Prohibition if deadline => (EventKind::Withdrawn, Lifecycle::Idle),
        _ => return Lifecycle::Active,
    };
    events.push(event);
    next
}

/// Per-violation sanction charges and their sum.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SanctionLedger {
    pub entries: Vec<MonitorEvent>,
    pub total: Decimal,
    /// Totals per agent; violations of ungrounded norms are charged to `"*"`.
    pub per_agent: BTreeMap<String, Decimal>,
}

pub const GLOBAL_ACCOUNT: &str = "*";

impl SanctionLedger {
    pub fn charge(&mut self, event: MonitorEvent) {
        debug_assert_eq!(event.kind, EventKind::Violated);
        self.total += event.sanction;
        let account = event.agent.clone().unwrap_or_else(|| GLOBAL_ACCOUNT.to_string());
        *self.per_agent.entry(account).or_default() += event.sanction;
        self.entries.push(event);
    }

    pub fn from_events<'a>(events: impl IntoIterator<Item = &'a MonitorEvent>) -> Self {
        let mut ledger = SanctionLedger::default();
        for e in events.into_iter().filter(|e| e.kind == EventKind::Violated) {
            ledger.charge(e.clone());
        }
        ledger
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceOutcome {
    /// Events in step order; within a step, in norm order.
    pub events: Vec<MonitorEvent>,
    pub finals: Vec<(String, MonitorState)>,
    pub ledger: SanctionLedger,
}

impl TraceOutcome {
    pub fn violations(&self) -> usize {
        self.events.iter().filter(|e| e.kind == EventKind::Violated).count()
    }
}

/// Monitors every norm of `set` independently over a labelling sequence.
pub fn run_trace(set: &NormSet, trace: &[Labels], mode: MonitorMode, semantics: Semantics) -> TraceOutcome {
    let mut states = vec![MonitorState::idle(mode); set.len()];
    let mut events = Vec::new();
    for (step, labels) in trace.iter().enumerate() {
        for (norm, state) in set.norms().iter().zip(states.iter_mut()) {
            let (next, kinds) = monitor_step(*state, norm, labels, semantics);
            *state = next;
            events.extend(kinds.into_iter().map(|kind| MonitorEvent {
                step,
                norm: norm.id.clone(),
                agent: None,
                kind,
                sanction: if kind == EventKind::Violated { norm.sanction } else { Decimal::ZERO },
            }));
        }
    }
    let ledger = SanctionLedger::from_events(&events);
    TraceOutcome { events, finals: set.norms().iter().map(|n| n.id.clone()).zip(states).collect(), ledger }
}

/// [`run_trace`] over a path of `model`; lassos are unrolled by `cycles`.
pub fn run_trace_on_path(
    model: &TransitionSystem,
    set: &NormSet,
    path: &Path,
    cycles: usize,
    mode: MonitorMode,
    semantics: Semantics,
) -> Result<TraceOutcome, ModelError> {
    Ok(run_trace(set, &model.path_labels(path, cycles)?, mode, semantics))
}

/// Number of cycle repetitions that decide violation on a lasso.
///
/// Over one traversal of the cycle the monitor state at the cycle entry is
/// mapped by a fixed function on {idle, active}; two traversals reach either
/// a fixed point, a two-cycle, or a violation.
pub const LASSO_UNROLL_CYCLES: usize = 2;

pub fn violates_labels(norm: &Norm, trace: &[Labels], semantics: Semantics) -> bool {
    let mut state = MonitorState::idle(MonitorMode::Path);
    for labels in trace {
        state = monitor_step(state, norm, labels, semantics).0;
        if state.is_violated() {
            return true;
        }
    }
    false
}

/// Whether `norm` is violated on `path`.
pub fn violates_path(
    model: &TransitionSystem,
    norm: &Norm,
    path: &Path,
    semantics: Semantics,
) -> Result<bool, ModelError> {
    let labels = model.path_labels(path, LASSO_UNROLL_CYCLES)?;
    Ok(violates_labels(norm, &labels, semantics))
}

/// Whether at least one norm of `set` is violated on `path`.
pub fn violates_set(
    model: &TransitionSystem,
    set: &NormSet,
    path: &Path,
    semantics: Semantics,
) -> Result<bool, ModelError> {
    let labels = model.path_labels(path, LASSO_UNROLL_CYCLES)?;
    Ok(set.norms().iter().any(|n| violates_labels(n, &labels, semantics)))
}
