use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

use crate::formula::Labels;
use crate::model::TransitionSystem;
use crate::norms::{monitor_step, EventKind, MonitorEvent, MonitorMode, MonitorState, Norm, NormSet, Semantics};

use super::objective::objective_holds;
use super::runlog::{AgentRecord, RunLog, StepRecord};
use super::scenario::{AgentSpec, Enforcement, Scenario};

/// Above this many joint moves of the agents still to act, regimentation
/// only checks the move against their current labels.
pub const MAX_COMPLETIONS: usize = 4096;

/// One runtime monitor: a norm grounded for an agent, or a global norm.
#[derive(Debug, Clone, PartialEq)]
pub struct NormInstance {
    pub norm: Norm,
    pub agent: Option<String>,
    pub state: MonitorState,
}

impl NormInstance {
    fn charged_to(&self, agent: &str) -> bool {
        self.agent.as_deref().is_none_or(|a| a == agent)
    }

    /// Violation this instance would report on `labels`.
    fn would_violate(&self, labels: &Labels, semantics: Semantics) -> bool {
        monitor_step(self.state, &self.norm, labels, semantics).1.contains(&EventKind::Violated)
    }
}

/// Event-mode monitors for `set`: template norms once per agent (in agent
/// order), other norms once.
pub fn instantiate(set: &NormSet, agents: &[String]) -> Vec<NormInstance> {
    let mut out = Vec::new();
    for n in set.norms() {
        if n.is_template() {
            for a in agents {
                out.push(NormInstance {
                    norm: n.ground(a),
                    agent: Some(a.clone()),
                    state: MonitorState::idle(MonitorMode::Event),
                });
            }
        } else {
            out.push(NormInstance { norm: n.clone(), agent: None, state: MonitorState::idle(MonitorMode::Event) });
        }
    }
    out
}

pub(crate) fn advance_instances(
    instances: &mut [NormInstance],
    labels: &Labels,
    step: usize,
    semantics: Semantics,
) -> Vec<MonitorEvent> {
    let mut events = Vec::new();
    for inst in instances {
        let (next, kinds) = monitor_step(inst.state, &inst.norm, labels, semantics);
        inst.state = next;
        events.extend(kinds.into_iter().map(|kind| MonitorEvent {
            step,
            norm: inst.norm.id.clone(),
            agent: inst.agent.clone(),
            kind,
            sanction: if kind == EventKind::Violated { inst.norm.sanction } else { Decimal::ZERO },
        }));
    }
    events
}

/// What an agent sees when choosing its next state.
pub struct Lookahead<'a> {
    pub instances: &'a [NormInstance],
    /// Next-step labels of the other agents: chosen moves of agents that
    /// already acted, current labels of the rest.
    pub baseline: Labels,
    /// Possible next-step labels of the other agents, one entry per joint
    /// move of the agents still to act. Only used under regimentation.
    pub completions: Vec<Labels>,
    pub semantics: Semantics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub next: usize,
    pub explored: bool,
    pub deadlock: bool,
}

fn union(a: &Labels, b: &Labels) -> Labels {
    a.union(b).cloned().collect()
}

/// Sanction `agent` would be charged if the next joint labelling were `labels`.
pub fn lookahead_sanction(agent: &str, look: &Lookahead<'_>, labels: &Labels) -> Decimal {
    look.instances
        .iter()
        .filter(|i| i.charged_to(agent) && i.would_violate(labels, look.semantics))
        .map(|i| i.norm.sanction)
        .sum()
}

/// Score of moving to `next`: utility minus λ times the sanctions the move
/// would incur.
pub fn move_score(spec: &AgentSpec, model: &TransitionSystem, next: usize, look: &Lookahead<'_>) -> f64 {
    let utility = spec.utilities.get(model.state_id(next)).copied().unwrap_or(0.0);
    let labels = union(&look.baseline, model.labels_at(next));
    let sanction = f64::try_from(lookahead_sanction(&spec.id, look, &labels)).unwrap_or(f64::MAX);
    utility - spec.sanction_sensitivity * sanction
}

/// Picks the agent's next state.
///
/// Successors are scored by [`move_score`]; the highest score wins, ties
/// going to the smallest state id. With probability ε a uniformly random
/// successor is taken instead. Under regimentation, successors after which
/// no move of the remaining agents avoids a violation are dropped first; if
/// nothing is left the full set is used and the choice is flagged.
pub fn agent_choose(
    spec: &AgentSpec,
    model: &TransitionSystem,
    current: usize,
    look: &Lookahead<'_>,
    enforcement: Enforcement,
    rng: &mut ChaCha8Rng,
) -> Choice {
    let all = model.successors(current);
    let mut options: Vec<usize> = all.to_vec();
    let mut deadlock = false;
    if enforcement == Enforcement::Regimentation {
        let completions: &[Labels] =
            if look.completions.is_empty() { std::slice::from_ref(&look.baseline) } else { &look.completions };
        options.retain(|&s| {
            completions.iter().any(|c| {
                let labels = union(c, model.labels_at(s));
                !look.instances.iter().any(|i| i.would_violate(&labels, look.semantics))
            })
        });
        if options.is_empty() {
            options = all.to_vec();
            deadlock = true;
        }
    }
    let explore: f64 = rng.random();
    if explore < spec.exploration {
        let next = options[rng.random_range(0..options.len())];
        return Choice { next, explored: true, deadlock };
    }
    let mut best = options[0];
    let mut best_score = move_score(spec, model, best, look);
    for &s in &options[1..] {
        let score = move_score(spec, model, s, look);
        if score > best_score {
            best = s;
            best_score = score;
        }
    }
    Choice { next: best, explored: false, deadlock }
}

struct AgentRt {
    spec: AgentSpec,
    model: TransitionSystem,
}

/// Live state of a simulation: positions and monitors.
#[derive(Debug, Clone)]
pub(crate) struct SimState {
    pub states: Vec<usize>,
    pub instances: Vec<NormInstance>,
    pub set: NormSet,
}

/// Steps agents through their grounded worlds under an enforced norm set.
pub(crate) struct Engine<'s> {
    pub scenario: &'s Scenario,
    agents: Vec<AgentRt>,
    pub semantics: Semantics,
}

impl<'s> Engine<'s> {
    pub fn new(scenario: &'s Scenario) -> Self {
        let agents = scenario
            .agent_ids()
            .into_iter()
            .map(|id| {
                let spec = scenario.agent(&id).expect("listed").clone();
                AgentRt { model: scenario.world.ground(&id), spec }
            })
            .collect();
        Engine { scenario, agents, semantics: Semantics::default() }
    }

    pub fn agent_ids(&self) -> Vec<String> {
        self.agents.iter().map(|a| a.spec.id.clone()).collect()
    }

    fn labels(&self, i: usize, state: usize) -> &Labels {
        self.agents[i].model.labels_at(state)
    }

    fn joint(&self, states: &[usize]) -> Labels {
        states.iter().enumerate().flat_map(|(i, &s)| self.labels(i, s).iter().cloned()).collect()
    }

    pub fn start(&self, set: &NormSet) -> SimState {
        SimState {
            states: self.agents.iter().map(|a| self.scenario.start_of(&a.spec)).collect(),
            instances: instantiate(set, &self.agent_ids()),
            set: set.clone(),
        }
    }

    /// Rebinds the monitors to `set`, all idle.
    pub fn enforce(&self, sim: &mut SimState, set: &NormSet) {
        sim.instances = instantiate(set, &self.agent_ids());
        sim.set = set.clone();
    }

    fn record(&self, step: usize, sim: &SimState, choices: Option<&[Choice]>, events: Vec<MonitorEvent>) -> StepRecord {
        let agents = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let s = sim.states[i];
                let c = choices.map(|c| c[i]);
                AgentRecord {
                    id: a.spec.id.clone(),
                    state: a.model.state_id(s).to_string(),
                    labels: a.model.labels_at(s).clone(),
                    action: c.map(|_| a.model.state_id(s).to_string()),
                    explored: c.is_some_and(|c| c.explored),
                    deadlock: c.is_some_and(|c| c.deadlock),
                }
            })
            .collect();
        StepRecord {
            step,
            agents,
            events,
            objectives: BTreeMap::new(),
            norm_set: sim.set.id.clone(),
            revisions: vec![],
        }
    }

    /// Record for step 0: monitors see the start labels. Under regimentation
    /// an agent charged with a violation here had no compliant option, so it
    /// is flagged as deadlocked.
    pub fn initial(&self, sim: &mut SimState) -> StepRecord {
        let labels = self.joint(&sim.states);
        let events = advance_instances(&mut sim.instances, &labels, 0, self.semantics);
        let mut record = self.record(0, sim, None, events);
        if self.scenario.enforcement == Enforcement::Regimentation {
            for e in record.events.iter().filter(|e| e.kind == EventKind::Violated) {
                for a in &mut record.agents {
                    if e.agent.as_deref().is_none_or(|x| x == a.id) {
                        a.deadlock = true;
                    }
                }
            }
        }
        record
    }

    /// Joint next-step labels of agents `from..` over all their move combinations.
    fn completions(&self, states: &[usize], from: usize, chosen: &Labels) -> Vec<Labels> {
        let total: usize = (from..self.agents.len())
            .map(|j| self.agents[j].model.successors(states[j]).len())
            .fold(1usize, |acc, n| acc.saturating_mul(n));
        if total > MAX_COMPLETIONS {
            return Vec::new();
        }
        let mut combos = vec![chosen.clone()];
        for (agent, &state) in self.agents.iter().zip(states).skip(from) {
            let model = &agent.model;
            combos = combos
                .iter()
                .flat_map(|c| model.successors(state).iter().map(move |&t| union(c, model.labels_at(t))))
                .collect();
        }
        combos
    }

    pub fn tick(&self, step: usize, sim: &mut SimState, rng: &mut ChaCha8Rng) -> StepRecord {
        let n = self.agents.len();
        let mut next = sim.states.clone();
        let mut choices = Vec::with_capacity(n);
        let regiment = self.scenario.enforcement == Enforcement::Regimentation;
        for i in 0..n {
            let chosen: Labels = (0..i).flat_map(|j| self.labels(j, next[j]).iter().cloned()).collect();
            let mut baseline = chosen.clone();
            for j in i + 1..n {
                baseline.extend(self.labels(j, sim.states[j]).iter().cloned());
            }
            let completions = if regiment { self.completions(&sim.states, i + 1, &chosen) } else { Vec::new() };
            let look = Lookahead { instances: &sim.instances, baseline, completions, semantics: self.semantics };
            let a = &self.agents[i];
            let c = agent_choose(&a.spec, &a.model, sim.states[i], &look, self.scenario.enforcement, rng);
            next[i] = c.next;
            choices.push(c);
        }
        sim.states = next;
        let labels = self.joint(&sim.states);
        let events = advance_instances(&mut sim.instances, &labels, step, self.semantics);
        self.record(step, sim, Some(&choices), events)
    }

    /// Appends `record` to `records` after filling in its objective flags.
    pub fn push(&self, records: &mut Vec<StepRecord>, record: StepRecord) {
        records.push(record);
        let step = records.len() - 1;
        let flags =
            self.scenario.objectives.iter().map(|o| (o.id.clone(), objective_holds(o, records, step))).collect();
        records[step].objectives = flags;
    }
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs one episode of `scenario.horizon` steps under `enforced`.
pub fn run_episode(scenario: &Scenario, enforced: &NormSet) -> RunLog {
    let engine = Engine::new(scenario);
    let mut rng = rng_for(scenario.seed);
    let mut sim = engine.start(enforced);
    let mut records = Vec::with_capacity(scenario.horizon + 1);
    let first = engine.initial(&mut sim);
    engine.push(&mut records, first);
    for step in 1..=scenario.horizon {
        let r = engine.tick(step, &mut sim, &mut rng);
        engine.push(&mut records, r);
    }
    let summary = super::supervise::summarize(scenario, &records, &[], vec![enforced.clone()], vec![]);
    RunLog { records, summary: Some(summary) }
}
