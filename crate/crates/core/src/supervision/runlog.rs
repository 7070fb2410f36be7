use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::formula::Labels;
use crate::norms::{EventKind, MonitorEvent, SanctionLedger, Semantics};
use crate::revision::{Component, EditKind, RevisionDirection, RevisionVerdict, SyntacticVerdict};

use super::episode::{advance_instances, instantiate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: String,
    pub state: String,
    pub labels: Labels,
    /// Successor chosen on this step; absent on the initial record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default)]
    pub explored: bool,
    /// Regimentation left no compliant move and the full set was used.
    #[serde(default)]
    pub deadlock: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub agents: Vec<AgentRecord>,
    pub events: Vec<MonitorEvent>,
    /// Whether each objective holds at this step.
    pub objectives: BTreeMap<String, bool>,
    pub norm_set: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub revisions: Vec<RevisionRecord>,
}

impl StepRecord {
    pub fn joint_labels(&self) -> Labels {
        self.agents.iter().flat_map(|a| a.labels.iter().cloned()).collect()
    }

    pub fn has_violation(&self) -> bool {
        self.events.iter().any(|e| e.kind == EventKind::Violated)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowStatus {
    Failing,
    Marginal,
    Healthy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScore {
    pub window: usize,
    pub first_step: usize,
    pub last_step: usize,
    pub score: f64,
    pub status: WindowStatus,
}

/// A norm replacement adopted by the supervisor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionRecord {
    pub step: usize,
    pub window: usize,
    pub direction: RevisionDirection,
    pub norm: String,
    pub component: Component,
    pub edit: EditKind,
    pub before: String,
    pub after: String,
    pub from_set: String,
    pub to_set: String,
    pub observed_score: f64,
    pub candidate_score: f64,
    pub candidates_scored: usize,
    pub syntactic: SyntacticVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<RevisionVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub objective_rates: BTreeMap<String, f64>,
    pub window_scores: Vec<WindowScore>,
    pub ledger: SanctionLedger,
    pub revisions: Vec<RevisionRecord>,
    /// Every norm set used in the run, rendered one norm per entry.
    pub norm_sets: BTreeMap<String, Vec<String>>,
    pub initial_norm_set: String,
    pub final_norm_set: String,
    pub deadlocks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub(crate) enum LogLine {
    Header { format: u32 },
    Step(StepRecord),
    Summary(Box<Summary>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    pub records: Vec<StepRecord>,
    pub summary: Option<Summary>,
}

impl RunLog {
    pub fn events(&self) -> impl Iterator<Item = &MonitorEvent> {
        self.records.iter().flat_map(|r| r.events.iter())
    }

    pub fn violations(&self) -> usize {
        self.events().filter(|e| e.kind == EventKind::Violated).count()
    }

    pub fn deadlocks(&self) -> usize {
        self.records.iter().flat_map(|r| &r.agents).filter(|a| a.deadlock).count()
    }

    pub fn revisions(&self) -> Vec<&RevisionRecord> {
        self.records.iter().flat_map(|r| &r.revisions).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("run log has no summary record")]
    MissingSummary,
    #[error("step {step} refers to norm set `{set}` which the summary does not define")]
    UnknownNormSet { step: usize, set: String },
    #[error("norm set `{set}` does not parse: {message}")]
    BadNormSet { set: String, message: String },
}

/// Recomputes every step's monitor events from the recorded labels. Monitors
/// restart from idle whenever the active norm set changes.
pub fn replay_events(log: &RunLog, semantics: Semantics) -> Result<Vec<Vec<MonitorEvent>>, ReplayError> {
    let summary = log.summary.as_ref().ok_or(ReplayError::MissingSummary)?;
    let mut sets = BTreeMap::new();
    for (id, norms) in &summary.norm_sets {
        let text = norms.join("\n");
        let mut set = crate::dsl::parse_norms(&text).map_err(|e| ReplayError::BadNormSet {
            set: id.clone(),
            message: e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
        })?;
        set.id = id.clone();
        sets.insert(id.clone(), set);
    }
    let mut out = Vec::with_capacity(log.records.len());
    let mut current: Option<(String, Vec<super::episode::NormInstance>)> = None;
    for r in &log.records {
        if current.as_ref().map(|(id, _)| id != &r.norm_set).unwrap_or(true) {
            let set = sets
                .get(&r.norm_set)
                .ok_or_else(|| ReplayError::UnknownNormSet { step: r.step, set: r.norm_set.clone() })?;
            let agents: Vec<String> = r.agents.iter().map(|a| a.id.clone()).collect();
            current = Some((r.norm_set.clone(), instantiate(set, &agents)));
        }
        let (_, instances) = current.as_mut().expect("set above");
        out.push(advance_instances(instances, &r.joint_labels(), r.step, semantics));
    }
    Ok(out)
}

/// Whether replaying `log` reproduces its recorded events exactly.
pub fn replay_matches(log: &RunLog, semantics: Semantics) -> Result<bool, ReplayError> {
    let replayed = replay_events(log, semantics)?;
    Ok(replayed.iter().zip(&log.records).all(|(a, r)| *a == r.events))
}
