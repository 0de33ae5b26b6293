use std::sync::Arc;

use super::{EventLog, SimConfig, SimError, SimState};
use crate::graph::NodeId;
use crate::instance::Instance;
use crate::policy::GraphObservation;

/// What a scheduler returns at a decision point.
#[derive(Debug, Clone)]
pub struct Decision {
    pub action: NodeId,
    pub log_prob: Option<f64>,
    pub value: Option<f64>,
    /// Snapshot the decision was computed from, kept for learning schedulers.
    pub observation: Option<GraphObservation>,
}

impl Decision {
    pub fn plain(action: NodeId) -> Self {
        Self { action, log_prob: None, value: None, observation: None }
    }
}

/// Picks one of the available operations at each decision point.
pub trait Scheduler {
    fn decide(&mut self, state: &SimState, actions: &[NodeId]) -> Result<Decision, SimError>;
}

impl<S: Scheduler + ?Sized> Scheduler for &mut S {
    fn decide(&mut self, state: &SimState, actions: &[NodeId]) -> Result<Decision, SimError> {
        (**self).decide(state, actions)
    }
}

impl<S: Scheduler + ?Sized> Scheduler for Box<S> {
    fn decide(&mut self, state: &SimState, actions: &[NodeId]) -> Result<Decision, SimError> {
        (**self).decide(state, actions)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Load(NodeId),
    /// A step in which nothing could be assigned.
    TimeAdvance,
}

#[derive(Debug, Clone)]
pub struct TransitionSample {
    pub time: u64,
    /// Available action set at the decision point (empty for time advances).
    pub available: Vec<NodeId>,
    pub observation: Option<GraphObservation>,
    pub action: Action,
    pub reward: f64,
    pub old_log_prob: Option<f64>,
    pub value_estimate: Option<f64>,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub transitions: Vec<TransitionSample>,
    pub makespan: u64,
    pub log: EventLog,
}

impl Episode {
    pub fn total_reward(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }

    pub fn decisions(&self) -> impl Iterator<Item = &TransitionSample> {
        self.transitions.iter().filter(|t| matches!(t.action, Action::Load(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeConfig {
    pub sim: SimConfig,
    pub seed: u64,
    pub step_cap: u64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self { sim: SimConfig::default(), seed: 0, step_cap: super::DEFAULT_STEP_CAP }
    }
}

/// Simulates `inst` from an empty schedule until every operation is done.
pub fn run_episode<S: Scheduler + ?Sized>(
    inst: Arc<Instance>,
    scheduler: &mut S,
    config: &EpisodeConfig,
) -> Result<Episode, SimError> {
    config.sim.validate()?;
    let mut state = SimState::new(inst, config.sim, config.seed);
    run_episode_from(&mut state, scheduler, config.step_cap)
}

/// Runs the step loop on an existing state, leaving the final state in place.
pub fn run_episode_from<S: Scheduler + ?Sized>(
    state: &mut SimState,
    scheduler: &mut S,
    step_cap: u64,
) -> Result<Episode, SimError> {
    if step_cap == 0 {
        return Err(SimError::InvalidConfig("step_cap must be positive".into()));
    }
    let mut transitions = Vec::new();
    while !state.is_done() {
        if state.now() >= step_cap {
            return Err(SimError::StepCapExceeded(step_cap));
        }
        state.prepare_step();
        let step_start = transitions.len();
        loop {
            let available = state.ready_operations();
            if available.is_empty() {
                break;
            }
            let decision = scheduler.decide(state, &available)?;
            if !available.contains(&decision.action) {
                return Err(SimError::IllegalChoice(decision.action));
            }
            state.apply_action(decision.action)?;
            transitions.push(TransitionSample {
                time: state.now(),
                available,
                observation: decision.observation,
                action: Action::Load(decision.action),
                reward: 0.0,
                old_log_prob: decision.log_prob,
                value_estimate: decision.value,
                done: false,
            });
        }
        let time = state.now();
        let reward = state.advance_time()?;
        if transitions.len() > step_start {
            transitions.last_mut().expect("sample recorded this step").reward = reward;
        } else {
            transitions.push(TransitionSample {
                time,
                available: Vec::new(),
                observation: None,
                action: Action::TimeAdvance,
                reward,
                old_log_prob: None,
                value_estimate: None,
                done: false,
            });
        }
    }
    if let Some(last) = transitions.last_mut() {
        last.done = true;
    }
    Ok(Episode { transitions, makespan: state.now(), log: state.event_log().clone() })
}
