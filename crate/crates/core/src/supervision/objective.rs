use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use crate::formula::AGENT_PLACEHOLDER;

use super::runlog::{RunLog, StepRecord};
use super::scenario::{Objective, ObjectiveKind};

/// Whether `agent` (by position in the record) holds the objective's atom.
fn holds(obj: &Objective, record: &StepRecord, agent: usize) -> bool {
    let a = &record.agents[agent];
    let atom = obj.atom().replace(AGENT_PLACEHOLDER, &a.id);
    if obj.is_per_agent() {
        a.labels.contains(&atom)
    } else {
        record.agents.iter().any(|x| x.labels.contains(&atom))
    }
}

fn count_holding(obj: &Objective, record: &StepRecord) -> usize {
    if obj.is_per_agent() {
        (0..record.agents.len()).filter(|&i| holds(obj, record, i)).count()
    } else {
        usize::from(!record.agents.is_empty() && holds(obj, record, 0))
    }
}

/// Length of the run of consecutive steps, ending at `step`, in which
/// agent `agent` holds the atom.
fn running(obj: &Objective, records: &[StepRecord], step: usize, agent: usize) -> usize {
    records[..=step].iter().rev().take_while(|r| holds(obj, r, agent)).count()
}

/// Whether the objective holds at `step` (every agent within bounds).
pub fn objective_holds(obj: &Objective, records: &[StepRecord], step: usize) -> bool {
    let r = &records[step];
    match &obj.kind {
        ObjectiveKind::MaxConsecutive { k, .. } => (0..r.agents.len()).all(|i| running(obj, records, step, i) <= *k),
        ObjectiveKind::AlwaysBelowCount { t, .. } => count_holding(obj, r) < *t,
        ObjectiveKind::NeverAtom { .. } => count_holding(obj, r) == 0,
    }
}

/// Satisfaction rate over the steps in `range`, with runs allowed to start
/// before the range.
///
/// * max-consecutive: fraction of agents whose run never exceeds the bound
/// * always-below-count: fraction of steps where fewer than `t` agents hold the atom
/// * never-atom: fraction of steps where no agent holds the atom
pub fn rate_over(obj: &Objective, records: &[StepRecord], range: RangeInclusive<usize>) -> f64 {
    let steps: Vec<usize> = range.filter(|&s| s < records.len()).collect();
    if steps.is_empty() {
        return 1.0;
    }
    match &obj.kind {
        ObjectiveKind::MaxConsecutive { k, .. } => {
            let agents = records[steps[0]].agents.len();
            if agents == 0 {
                return 1.0;
            }
            let ok = (0..agents).filter(|&i| steps.iter().all(|&s| running(obj, records, s, i) <= *k)).count();
            ok as f64 / agents as f64
        }
        _ => {
            let ok = steps.iter().filter(|&&s| objective_holds(obj, records, s)).count();
            ok as f64 / steps.len() as f64
        }
    }
}

/// Rate of `obj` over the whole log.
pub fn evaluate_objective(obj: &Objective, log: &RunLog) -> f64 {
    if log.records.is_empty() {
        return 1.0;
    }
    rate_over(obj, &log.records, 0..=log.records.len() - 1)
}

/// Mean rate of all objectives over `range`; 1 when there are none.
pub fn window_score(objectives: &[Objective], records: &[StepRecord], range: RangeInclusive<usize>) -> f64 {
    if objectives.is_empty() {
        return 1.0;
    }
    objectives.iter().map(|o| rate_over(o, records, range.clone())).sum::<f64>() / objectives.len() as f64
}

/// Agents implicated in the objective failures inside `range`.
pub fn failing_agents(
    objectives: &[Objective],
    records: &[StepRecord],
    range: RangeInclusive<usize>,
) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in range.filter(|&s| s < records.len()) {
        let r = &records[s];
        for o in objectives {
            if objective_holds(o, records, s) {
                continue;
            }
            for (i, a) in r.agents.iter().enumerate() {
                let implicated = match &o.kind {
                    ObjectiveKind::MaxConsecutive { k, .. } => running(o, records, s, i) > *k,
                    _ => holds(o, r, i) && (o.is_per_agent() || a.labels.contains(o.atom())),
                };
                if implicated {
                    out.insert(a.id.clone());
                }
            }
        }
    }
    out
}
