//! Brute-force cross-check for the product classifier.
//!
//! Enumerates runs of the system depth-first, carrying one path-mode monitor
//! per norm. A finite run is accepted as a witness for "violates A but not B"
//! when A is already violated at some position `j`, B is never violated, and
//! the combined (state, monitors) configuration at the end of the run equals
//! the one at `j`: repeating the segment from `j` gives an infinite run with
//! the same verdicts, because violation is absorbing and monitors are
//! deterministic.
//!
//! Runs that revisit a configuration before A is violated are not extended:
//! everything reachable from the repeat is already reachable from the first
//! visit along a shorter run.

use std::collections::HashMap;

use super::{check_inputs, compare_sanctions, Relation, RevisionError, RevisionVerdict};
use crate::model::{Path, TransitionSystem};
use crate::norms::{monitor_step, Lifecycle, MonitorMode, MonitorState, NormSet, Semantics};

/// Default number of node expansions before giving up.
pub const DEFAULT_ORACLE_BUDGET: u64 = 20_000_000;

/// Desk-scale limit on the product size bound used for the default horizon.
pub const ORACLE_NODE_LIMIT: u128 = 5000;

#[derive(Debug, Clone, Copy)]
pub struct Oracle<'m> {
    pub model: &'m TransitionSystem,
    pub semantics: Semantics,
    /// Maximum run length; defaults to twice the product size bound.
    pub horizon: Option<usize>,
    pub budget: u64,
}

type Config = (usize, Vec<Lifecycle>);

impl<'m> Oracle<'m> {
    pub fn new(model: &'m TransitionSystem) -> Self {
        Oracle { model, semantics: Semantics::default(), horizon: None, budget: DEFAULT_ORACLE_BUDGET }
    }

    /// `|reachable states| × 3^(number of norms)`.
    pub fn node_bound(&self, norms: usize) -> u128 {
        (self.model.reachable().len() as u128).saturating_mul(3u128.saturating_pow(norms as u32))
    }

    pub fn compare(&self, original: &NormSet, revised: &NormSet) -> Result<RevisionVerdict, RevisionError> {
        check_inputs(self.model, &[original, revised])?;
        let bound = self.node_bound(original.len() + revised.len());
        let horizon = self.horizon.unwrap_or_else(|| usize::try_from(bound.saturating_mul(2)).unwrap_or(usize::MAX));
        let in_revised = self.search(revised, original, horizon)?;
        let in_original = self.search(original, revised, horizon)?;
        Ok(RevisionVerdict {
            relation: Relation::from_containments(in_revised.is_none(), in_original.is_none()),
            witness_in_revised_not_original: in_revised,
            witness_in_original_not_revised: in_original,
            sanction_change: compare_sanctions(original, revised),
        })
    }

    fn step(&self, set: &NormSet, monitors: &[Lifecycle], state: usize) -> Vec<Lifecycle> {
        let labels = self.model.labels_at(state);
        set.norms()
            .iter()
            .zip(monitors)
            .map(|(n, &lifecycle)| {
                monitor_step(MonitorState { lifecycle, mode: MonitorMode::Path }, n, labels, self.semantics).0.lifecycle
            })
            .collect()
    }

    /// A lasso violating `violate` and not `avoid`, if one exists within the horizon.
    fn search(&self, violate: &NormSet, avoid: &NormSet, horizon: usize) -> Result<Option<Path>, RevisionError> {
        let k = violate.len();
        let all: NormSet =
            NormSet::new("all", violate.norms().iter().chain(avoid.norms()).cloned().collect::<Vec<_>>())
                .unwrap_or_else(|_| {
                    // ids may clash between the two sets; rename for monitoring only
                    let renamed = violate
                        .norms()
                        .iter()
                        .chain(avoid.norms())
                        .enumerate()
                        .map(|(i, n)| {
                            let mut n = n.clone();
                            n.id = format!("m{i}");
                            n
                        })
                        .collect();
                    NormSet::new("all", renamed).expect("fresh ids")
                });
        let violated_a = |m: &[Lifecycle]| m[..k].contains(&Lifecycle::Violated);
        let violated_b = |m: &[Lifecycle]| m[k..].contains(&Lifecycle::Violated);

        let init = self.model.init();
        let first: Config = (init, self.step(&all, &vec![Lifecycle::Idle; all.len()], init));
        // DFS frames: (configuration, index of next successor to try)
        let mut path: Vec<Config> = Vec::new();
        let mut next_child: Vec<usize> = Vec::new();
        let mut on_path: HashMap<Config, usize> = HashMap::new();
        let mut expansions: u64 = 0;

        let mut pending = Some(first);
        loop {
            if let Some(cfg) = pending.take() {
                expansions += 1;
                if expansions > self.budget {
                    return Err(RevisionError::BudgetExceeded { budget: self.budget });
                }
                if violated_b(&cfg.1) {
                    // prune
                } else if let Some(&j) = on_path.get(&cfg) {
                    if violated_a(&cfg.1) {
                        let ids: Vec<String> = path.iter().map(|(s, _)| self.model.state_id(*s).to_string()).collect();
                        return Ok(Some(Path::lasso(ids[..j].to_vec(), ids[j..].to_vec())));
                    }
                } else if path.len() < horizon {
                    on_path.insert(cfg.clone(), path.len());
                    path.push(cfg);
                    next_child.push(0);
                }
            }
            let Some((state, monitors)) = path.last().cloned() else {
                return Ok(None);
            };
            let i = next_child.last_mut().unwrap();
            let succ = self.model.successors(state);
            if *i < succ.len() {
                let t = succ[*i];
                *i += 1;
                pending = Some((t, self.step(&all, &monitors, t)));
            } else {
                let done = path.pop().unwrap();
                on_path.remove(&done);
                next_child.pop();
            }
        }
    }
}

/// Brute-force counterpart of [`super::classify_revision`].
pub fn oracle_compare(
    model: &TransitionSystem,
    original: &NormSet,
    revised: &NormSet,
    horizon: Option<usize>,
) -> Result<RevisionVerdict, RevisionError> {
    Oracle { horizon, ..Oracle::new(model) }.compare(original, revised)
}
