use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::formula::{Formula, AGENT_PLACEHOLDER};
use crate::model::{is_identifier, TransitionSystem};
use crate::norms::NormSet;
use crate::revision::CandidatePool;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub id: String,
    /// Start state in the world template; the world's init when absent.
    pub start: Option<String>,
    /// Intrinsic utility of moving into a state; missing states are worth 0.
    pub utilities: BTreeMap<String, f64>,
    /// λ: weight of sanctions against utility.
    pub sanction_sensitivity: f64,
    /// ε: probability of a uniformly random move.
    pub exploration: f64,
}

impl AgentSpec {
    /// Out-of-range numeric fields as `(field, message)` pairs.
    pub(crate) fn range_defects(&self) -> Vec<(&'static str, &'static str)> {
        let mut out = Vec::new();
        if self.utilities.values().any(|u| !u.is_finite()) {
            out.push(("utilities", "utilities must be finite"));
        }
        if !(self.sanction_sensitivity.is_finite() && self.sanction_sensitivity >= 0.0) {
            out.push(("sanction_sensitivity", "must be a finite number >= 0"));
        }
        if !(0.0..=1.0).contains(&self.exploration) {
            out.push(("exploration", "must lie in [0, 1]"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Enforcement {
    Sanctioning,
    Regimentation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// No agent holds `atom` for more than `k` consecutive steps.
    MaxConsecutive {
        atom: String,
        k: usize,
        /// The bound as written in the scenario when given in minutes.
        max_minutes: Option<Decimal>,
    },
    /// Fewer than `t` agents hold `atom` at any step.
    AlwaysBelowCount { atom: String, t: usize },
    /// No agent ever holds `atom`.
    NeverAtom { atom: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub id: String,
    pub kind: ObjectiveKind,
}

impl Objective {
    pub fn atom(&self) -> &str {
        match &self.kind {
            ObjectiveKind::MaxConsecutive { atom, .. }
            | ObjectiveKind::AlwaysBelowCount { atom, .. }
            | ObjectiveKind::NeverAtom { atom } => atom,
        }
    }

    /// Per-agent objectives mention the `{a}` placeholder.
    pub fn is_per_agent(&self) -> bool {
        self.atom().contains(AGENT_PLACEHOLDER)
    }
}

/// Number of whole steps that fit in `minutes`.
pub fn steps_within(minutes: Decimal, minutes_per_step: Decimal) -> Option<usize> {
    if minutes_per_step <= Decimal::ZERO {
        return None;
    }
    (minutes / minutes_per_step).floor().to_usize()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Per-agent world; atoms may carry the `{a}` placeholder.
    pub world: TransitionSystem,
    pub agents: Vec<AgentSpec>,
    pub norms: NormSet,
    pub objectives: Vec<Objective>,
    pub pool: CandidatePool,
    pub enforcement: Enforcement,
    pub seed: u64,
    pub horizon: usize,
    pub window: usize,
    pub thresholds: Thresholds,
    pub minutes_per_step: Option<Decimal>,
}

impl Scenario {
    /// Agent ids in the order agents move.
    pub fn agent_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.agents.iter().map(|a| a.id.clone()).collect();
        ids.sort();
        ids
    }

    pub fn agent(&self, id: &str) -> Option<&AgentSpec> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn start_of(&self, agent: &AgentSpec) -> usize {
        agent.start.as_deref().and_then(|s| self.world.index_of(s)).unwrap_or(self.world.init())
    }

    /// Template atoms plus every agent's grounded atoms.
    pub fn vocabulary(&self) -> BTreeSet<String> {
        let mut v: BTreeSet<String> = self.world.atoms().clone();
        for a in &self.agents {
            v.extend(self.world.atoms().iter().map(|x| x.replace(AGENT_PLACEHOLDER, &a.id)));
        }
        v
    }

    /// Model on which revisions of this scenario's norms are classified: the
    /// template itself when every atom is a template atom, otherwise the
    /// synchronous product of the agents' grounded worlds.
    pub fn classification_model(&self, sets: &[&NormSet]) -> TransitionSystem {
        let template_only = sets.iter().all(|s| s.atoms().is_subset(self.world.atoms()));
        if template_only {
            return self.world.clone();
        }
        let ids = self.agent_ids();
        let starts: Vec<usize> = ids.iter().map(|id| self.start_of(self.agent(id).expect("listed"))).collect();
        self.world.synchronous_product(&ids, &starts)
    }

    /// Semantic defects as `(location, message)` pairs.
    pub fn validate(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut err = |loc: String, msg: String| out.push((loc, msg));
        if self.agents.is_empty() {
            err("/agents".into(), "at least one agent is required".into());
        }
        let mut seen = BTreeSet::new();
        for (i, a) in self.agents.iter().enumerate() {
            let at = format!("/agents/{i}");
            if !is_identifier(&a.id) {
                err(format!("{at}/id"), format!("invalid agent id `{}`", a.id));
            }
            if !seen.insert(a.id.as_str()) {
                err(format!("{at}/id"), format!("duplicate agent `{}`", a.id));
            }
            if let Some(s) = &a.start {
                if self.world.index_of(s).is_none() {
                    err(format!("{at}/start"), format!("unknown state `{s}`"));
                }
            }
            for s in a.utilities.keys() {
                if self.world.index_of(s).is_none() {
                    err(format!("{at}/utilities/{s}"), format!("unknown state `{s}`"));
                }
            }
            for (field, msg) in a.range_defects() {
                err(format!("{at}/{field}"), msg.into());
            }
        }

        let vocab = self.vocabulary();
        let known = |f: &Formula| -> Vec<String> { f.atoms().into_iter().filter(|a| !vocab.contains(a)).collect() };
        for n in self.norms.norms() {
            for atom in n.atoms() {
                if !vocab.contains(&atom) {
                    err("/norms".into(), format!("norm {} uses unknown atom `{atom}`", n.id));
                }
            }
        }
        for (i, o) in self.objectives.iter().enumerate() {
            let at = format!("/objectives/{i}");
            if !vocab.contains(o.atom()) {
                err(format!("{at}/atom"), format!("unknown atom `{}`", o.atom()));
            }
            if let ObjectiveKind::MaxConsecutive { k, .. } = o.kind {
                if k < 1 {
                    err(at.clone(), "consecutive-step bound must be at least 1".into());
                }
            }
        }
        for (i, f) in self.pool.formulas.iter().enumerate() {
            for atom in known(f) {
                err(format!("/pool/formulas/{i}"), format!("unknown atom `{atom}`"));
            }
        }
        if self.pool.sanctions.iter().any(|s| s.is_sign_negative()) {
            err("/pool/sanctions".into(), "sanctions must be non-negative".into());
        }
        if self.window == 0 {
            err("/window".into(), "window must be at least 1".into());
        }
        if self.horizon > 0 && self.window > self.horizon {
            err("/window".into(), format!("window {} exceeds horizon {}", self.window, self.horizon));
        }
        let t = self.thresholds;
        if !(0.0..=1.0).contains(&t.low) || !(0.0..=1.0).contains(&t.high) || t.low > t.high {
            err("/thresholds".into(), "thresholds must satisfy 0 <= low <= high <= 1".into());
        }
        if let Some(m) = self.minutes_per_step {
            if m <= Decimal::ZERO {
                err("/minutes_per_step".into(), "must be positive".into());
            }
        }
        let starts: Vec<usize> = self.agents.iter().map(|a| self.start_of(a)).collect();
        let mut frontier = starts.clone();
        let mut reach: BTreeSet<usize> = starts.into_iter().collect();
        while let Some(s) = frontier.pop() {
            for &t in self.world.successors(s) {
                if reach.insert(t) {
                    frontier.push(t);
                }
            }
        }
        for s in reach {
            if self.world.successors(s).is_empty() {
                err("/world".into(), format!("state `{}` has no outgoing transition", self.world.state_id(s)));
            }
        }
        out
    }
}
