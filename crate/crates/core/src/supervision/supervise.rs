use std::collections::BTreeSet;

use crate::dsl::render_norm;
use crate::norms::{EventKind, NormSet, SanctionLedger};
use crate::revision::{generate_candidates, syntactic_classify, Candidate, Classifier, RevisionDirection};

use super::episode::{rng_for, Engine, SimState};
use super::objective::{evaluate_objective, failing_agents, window_score};
use super::runlog::{RevisionRecord, RunLog, StepRecord, Summary, WindowScore, WindowStatus};
use super::scenario::Scenario;

/// Outcome of a supervised run.
#[derive(Debug, Clone, PartialEq)]
pub struct Supervision {
    pub final_set: NormSet,
    pub log: RunLog,
    pub revisions: Vec<RevisionRecord>,
}

/// Seed for the rollout of candidate `candidate` at review `window`.
pub fn derive_seed(seed: u64, window: usize, candidate: usize) -> u64 {
    // splitmix64 finaliser over a simple combination
    let mut z = seed
        .wrapping_add((window as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((candidate as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Steps covered by window `w` (1-based steps; step 0 is the start).
fn window_range(scenario: &Scenario, w: usize) -> (usize, usize) {
    let first = w * scenario.window + 1;
    let last = ((w + 1) * scenario.window).min(scenario.horizon);
    (first, last)
}

fn status(scenario: &Scenario, score: f64) -> WindowStatus {
    if score < scenario.thresholds.low {
        WindowStatus::Failing
    } else if score < scenario.thresholds.high {
        WindowStatus::Marginal
    } else {
        WindowStatus::Healthy
    }
}

pub(crate) fn summarize(
    scenario: &Scenario,
    records: &[StepRecord],
    revisions: &[RevisionRecord],
    sets: Vec<NormSet>,
    windows: Vec<WindowScore>,
) -> Summary {
    let log = RunLog { records: records.to_vec(), summary: None };
    let mut windows = windows;
    if windows.is_empty() && scenario.window > 0 {
        let mut w = 0;
        loop {
            let (first, last) = window_range(scenario, w);
            if first > scenario.horizon {
                break;
            }
            let score = window_score(&scenario.objectives, records, first..=last);
            windows.push(WindowScore {
                window: w,
                first_step: first,
                last_step: last,
                score,
                status: status(scenario, score),
            });
            w += 1;
        }
    }
    Summary {
        objective_rates: scenario.objectives.iter().map(|o| (o.id.clone(), evaluate_objective(o, &log))).collect(),
        window_scores: windows,
        ledger: SanctionLedger::from_events(log.events()),
        revisions: revisions.to_vec(),
        norm_sets: sets.iter().map(|s| (s.id.clone(), s.norms().iter().map(render_norm).collect())).collect(),
        initial_norm_set: sets.first().map(|s| s.id.clone()).unwrap_or_default(),
        final_norm_set: sets.last().map(|s| s.id.clone()).unwrap_or_default(),
        deadlocks: log.deadlocks(),
    }
}

/// Directions to search given who failed and who violated in the window.
fn directions(failing: &BTreeSet<String>, violators: &BTreeSet<String>) -> Vec<RevisionDirection> {
    if failing.is_disjoint(violators) {
        vec![RevisionDirection::Relax]
    } else if failing.is_subset(violators) {
        vec![RevisionDirection::Strengthen]
    } else {
        vec![RevisionDirection::Relax, RevisionDirection::Strengthen]
    }
}

struct Scored {
    direction: RevisionDirection,
    candidate: Candidate,
    score: f64,
}

/// Runs the episode with a norm-update review every `window` steps.
///
/// A review happens after steps `W, 2W, ...` strictly before the horizon.
/// When the window score is below the low threshold the supervisor picks a
/// direction: if no failing agent violated a norm in the window the norms
/// over-restrict (relax); if every failing agent did they are too weak
/// (strengthen); otherwise both directions are tried. Every candidate is
/// scored by a W-step rollout from the current positions with fresh
/// monitors, and the best one is adopted if it beats the observed window.
/// Ties keep the earlier candidate in (norm id, generation) order.
pub fn supervise(scenario: &Scenario) -> Supervision {
    let engine = Engine::new(scenario);
    let mut rng = rng_for(scenario.seed);
    let mut sim = engine.start(&scenario.norms);
    let mut sets = vec![scenario.norms.clone()];
    let mut records: Vec<StepRecord> = Vec::with_capacity(scenario.horizon + 1);
    let mut revisions: Vec<RevisionRecord> = Vec::new();
    let mut windows: Vec<WindowScore> = Vec::new();
    let first = engine.initial(&mut sim);
    engine.push(&mut records, first);

    for step in 1..=scenario.horizon {
        let r = engine.tick(step, &mut sim, &mut rng);
        engine.push(&mut records, r);
        let window_done = step % scenario.window == 0 || step == scenario.horizon;
        if !window_done {
            continue;
        }
        let w = (step - 1) / scenario.window;
        let (first, last) = window_range(scenario, w);
        let score = window_score(&scenario.objectives, &records, first..=last);
        let st = status(scenario, score);
        windows.push(WindowScore { window: w, first_step: first, last_step: last, score, status: st });
        if st != WindowStatus::Failing || step == scenario.horizon {
            continue;
        }
        if let Some((rec, next)) = review(&engine, scenario, &sim, &records, w, step, score, sets.len()) {
            engine.enforce(&mut sim, &next);
            sets.push(next);
            records[step].revisions.push(rec.clone());
            revisions.push(rec);
        }
    }

    let summary = summarize(scenario, &records, &revisions, sets.clone(), windows);
    Supervision {
        final_set: sets.pop().expect("initial set"),
        log: RunLog { records, summary: Some(summary) },
        revisions,
    }
}

#[allow(clippy::too_many_arguments)]
fn review(
    engine: &Engine<'_>,
    scenario: &Scenario,
    sim: &SimState,
    records: &[StepRecord],
    w: usize,
    step: usize,
    observed: f64,
    generation: usize,
) -> Option<(RevisionRecord, NormSet)> {
    let (first, last) = window_range(scenario, w);
    let failing = failing_agents(&scenario.objectives, records, first..=last);
    let mut violators = BTreeSet::new();
    for r in &records[first..=last] {
        for e in r.events.iter().filter(|e| e.kind == EventKind::Violated) {
            match &e.agent {
                Some(a) => {
                    violators.insert(a.clone());
                }
                None => violators.extend(engine.agent_ids()),
            }
        }
    }
    let current = &sim.set;
    let model = scenario.classification_model(&[current]);

    let mut order: Vec<&crate::norms::Norm> = current.norms().iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let mut pool: Vec<(RevisionDirection, Candidate)> = Vec::new();
    for n in order {
        for d in directions(&failing, &violators) {
            for c in generate_candidates(n, &scenario.pool, d, Some(&model)) {
                if !pool.iter().any(|(_, x)| x.norm == c.norm) {
                    pool.push((d, c));
                }
            }
        }
    }

    let mut best: Option<Scored> = None;
    for (idx, (direction, candidate)) in pool.iter().enumerate() {
        let set = current.with_replaced(current.id.clone(), candidate.norm.clone());
        let score = rollout(engine, scenario, sim, records, &set, derive_seed(scenario.seed, w, idx));
        if best.as_ref().is_none_or(|b| score > b.score) {
            best = Some(Scored { direction: *direction, candidate: candidate.clone(), score });
        }
    }
    let best = best.filter(|b| b.score > observed)?;
    let before = current.get(&best.candidate.norm.id).expect("candidate edits a member");
    let mut revised = current.with_replaced(before.id.clone(), best.candidate.norm.clone());
    revised.id = format!("{}-r{}", scenario.norms.id, generation);
    let after_model = scenario.classification_model(&[current, &revised]);
    let (verdict, verdict_error) = match Classifier::new(&after_model).classify(current, &revised) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let record = RevisionRecord {
        step,
        window: w,
        direction: best.direction,
        norm: before.id.clone(),
        component: best.candidate.component,
        edit: best.candidate.edit,
        before: render_norm(before),
        after: render_norm(&best.candidate.norm),
        from_set: current.id.clone(),
        to_set: revised.id.clone(),
        observed_score: observed,
        candidate_score: best.score,
        candidates_scored: pool.len(),
        syntactic: syntactic_classify(before, &best.candidate.norm, Some(&model)),
        verdict,
        verdict_error,
    };
    Some((record, revised))
}

/// Window score of `set` over a W-step continuation of the current run.
fn rollout(
    engine: &Engine<'_>,
    scenario: &Scenario,
    sim: &SimState,
    records: &[StepRecord],
    set: &NormSet,
    seed: u64,
) -> f64 {
    let mut sim = sim.clone();
    engine.enforce(&mut sim, set);
    let mut rng = rng_for(seed);
    let mut history = records.to_vec();
    let start = history.len();
    for k in 0..scenario.window {
        let r = engine.tick(start + k, &mut sim, &mut rng);
        engine.push(&mut history, r);
    }
    window_score(&scenario.objectives, &history, start..=start + scenario.window - 1)
}
