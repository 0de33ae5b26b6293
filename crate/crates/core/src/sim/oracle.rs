//! Exhaustive search over every decision sequence the simulator allows.
//! Only for tiny, interruption-free instances; used as a test oracle.

use std::sync::Arc;

use super::{Decision, Scheduler, SimConfig, SimError, SimState};
use crate::graph::NodeId;
use crate::instance::Instance;

/// Largest `n * m` accepted by [`brute_force_optimal`].
pub const MAX_ORACLE_OPERATIONS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalSchedule {
    pub makespan: u64,
    /// Action sequence attaining `makespan`, in decision order.
    pub actions: Vec<NodeId>,
}

/// Minimal makespan over all action choices at every decision point of the
/// interruption-free simulator.
pub fn brute_force_optimal(inst: Arc<Instance>, step_cap: u64) -> Result<OptimalSchedule, SimError> {
    if inst.num_operations() > MAX_ORACLE_OPERATIONS {
        return Err(SimError::TooLarge(inst.num_operations()));
    }
    let mut state = SimState::new(inst, SimConfig { p_interrupt: 0.0, ..SimConfig::default() }, 0);
    state.prepare_step();
    let mut search = Search { best: None, path: Vec::new(), step_cap };
    search.explore(state)?;
    Ok(search.best.expect("at least one complete schedule"))
}

struct Search {
    best: Option<OptimalSchedule>,
    path: Vec<NodeId>,
    step_cap: u64,
}

impl Search {
    /// `state` has had its step prepared.
    fn explore(&mut self, mut state: SimState) -> Result<(), SimError> {
        loop {
            if let Some(best) = &self.best {
                if state.makespan_lower_bound() >= best.makespan {
                    return Ok(());
                }
            }
            let ready = state.ready_operations();
            if !ready.is_empty() {
                for v in ready {
                    let mut child = state.clone();
                    child.apply_action(v)?;
                    self.path.push(v);
                    self.explore(child)?;
                    self.path.pop();
                }
                return Ok(());
            }
            state.advance_time()?;
            if state.is_done() {
                let makespan = state.now();
                if self.best.as_ref().is_none_or(|b| makespan < b.makespan) {
                    self.best = Some(OptimalSchedule { makespan, actions: self.path.clone() });
                }
                return Ok(());
            }
            if state.now() >= self.step_cap {
                return Err(SimError::StepCapExceeded(self.step_cap));
            }
            state.prepare_step();
        }
    }
}

/// Plays back a fixed action sequence.
#[derive(Debug, Clone)]
pub struct ReplayScheduler {
    actions: std::vec::IntoIter<NodeId>,
}

impl ReplayScheduler {
    pub fn new(actions: Vec<NodeId>) -> Self {
        Self { actions: actions.into_iter() }
    }
}

impl Scheduler for ReplayScheduler {
    fn decide(&mut self, _state: &SimState, actions: &[NodeId]) -> Result<Decision, SimError> {
        let next = self.actions.next().ok_or(SimError::EmptyActionSet)?;
        if !actions.contains(&next) {
            return Err(SimError::IllegalChoice(next));
        }
        Ok(Decision::plain(next))
    }
}
