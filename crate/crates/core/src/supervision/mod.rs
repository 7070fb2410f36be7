//! Simulated multi-agent runs under enforced norms, and the supervisor that
//! revises those norms while the run is in progress.
//!
//! Every agent moves through its own copy of the world template, grounded
//! by substituting its id for `{a}`. All agents move on every step, in id
//! order; each step's joint labelling is the union of the agents' labels and
//! drives one event-mode monitor per norm instance.

mod episode;
mod objective;
mod runlog;
mod scenario;
mod supervise;

pub use episode::{
    agent_choose, instantiate, lookahead_sanction, move_score, run_episode, Choice, Lookahead, NormInstance,
    MAX_COMPLETIONS,
};
pub use objective::{evaluate_objective, failing_agents, objective_holds, rate_over, window_score};
pub(crate) use runlog::LogLine;
pub use runlog::{
    replay_events, replay_matches, AgentRecord, ReplayError, RevisionRecord, RunLog, StepRecord, Summary, WindowScore,
    WindowStatus,
};
pub use scenario::{steps_within, AgentSpec, Enforcement, Objective, ObjectiveKind, Scenario, Thresholds};
pub use supervise::{derive_seed, supervise, Supervision};
