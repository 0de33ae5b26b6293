//! Discrete-time ISBJSSP engine.
//!
//! Each time step runs in a fixed order: recover machines whose downtime has
//! elapsed, sample new failures among idle machines, resolve swap cycles,
//! let the scheduler load every assignable operation, then advance the clock
//! by one step.

mod episode;
mod events;
mod oracle;
mod validate;

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DisjunctiveGraph, GraphError, NodeId};
use crate::instance::Instance;
use crate::policy::PolicyError;

pub use episode::{
    run_episode, run_episode_from, Action, Decision, Episode, EpisodeConfig, Scheduler, TransitionSample,
};
pub use events::{Event, EventKind, EventLog, EventLogError};
pub use oracle::{brute_force_optimal, OptimalSchedule, ReplayScheduler, MAX_ORACLE_OPERATIONS};
pub use validate::{total_waiting_time, validate_schedule, Violation};

/// Default livelock guard for episodes.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("operation {0} is not ready")]
    NotReady(NodeId),
    #[error("cannot advance time while operations are schedulable")]
    SchedulableActionsPending,
    #[error("episode exceeded the step cap of {0}")]
    StepCapExceeded(u64),
    #[error("instance with {0} operations is too large for exhaustive search")]
    TooLarge(usize),
    #[error("scheduler was offered no actions")]
    EmptyActionSet,
    #[error("scheduler chose {0}, which is not an available action")]
    IllegalChoice(NodeId),
    #[error("invalid simulator configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Per-step failure probability of each idle machine.
    pub p_interrupt: f64,
    /// Downtime of a failed machine, in time steps.
    pub t_interrupt: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { p_interrupt: 0.0, t_interrupt: 50 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&self.p_interrupt) {
            return Err(SimError::InvalidConfig(format!("p_interrupt {} outside [0, 1]", self.p_interrupt)));
        }
        if self.t_interrupt == 0 {
            return Err(SimError::InvalidConfig("t_interrupt must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    NotStarted,
    Processing,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MachineStatus {
    Idle,
    Busy {
        op: NodeId,
        remaining: u32,
    },
    /// Finished `op`; its job stays on the machine until the successor starts.
    Holding {
        op: NodeId,
    },
    Failed,
}

/// The four availability cases of a machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Availability {
    Failed,
    BusyOrSwapReserved,
    Available,
    Blocked,
}

#[derive(Debug, Clone)]
pub struct SimState {
    instance: Arc<Instance>,
    config: SimConfig,
    now: u64,
    graph: DisjunctiveGraph,
    machines: Vec<MachineStatus>,
    node_status: Vec<NodeStatus>,
    ready_time: Vec<Option<u64>>,
    /// Processing time of completed operations, per job.
    completed_work: Vec<u64>,
    ops_done: usize,
    /// Q: node sets of failed machines, oldest first.
    interruption_queue: VecDeque<(Vec<NodeId>, usize)>,
    /// Q': elapsed downtime of each entry of Q.
    counter_queue: VecDeque<u32>,
    rng: ChaCha8Rng,
    log: EventLog,
}

impl SimState {
    pub fn new(instance: Arc<Instance>, config: SimConfig, seed: u64) -> Self {
        let graph = DisjunctiveGraph::build(&instance);
        let nodes = instance.num_operations();
        let m = instance.num_machines();
        let mut ready_time = vec![None; nodes];
        for job in 0..instance.num_jobs() {
            ready_time[job * m] = Some(0);
        }
        Self {
            config,
            now: 0,
            machines: vec![MachineStatus::Idle; m],
            node_status: vec![NodeStatus::NotStarted; nodes],
            ready_time,
            completed_work: vec![0; instance.num_jobs()],
            ops_done: 0,
            interruption_queue: VecDeque::new(),
            counter_queue: VecDeque::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            log: EventLog::default(),
            graph,
            instance,
        }
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn instance_arc(&self) -> &Arc<Instance> {
        &self.instance
    }

    pub fn config(&self) -> SimConfig {
        self.config
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn graph(&self) -> &DisjunctiveGraph {
        &self.graph
    }

    pub fn machine_status(&self, machine: usize) -> MachineStatus {
        self.machines[machine]
    }

    pub fn node_status(&self, v: NodeId) -> NodeStatus {
        self.node_status[self.graph.index(v)]
    }

    /// Time at which `v`'s predecessor completed (0 for first operations);
    /// `None` while the predecessor is unfinished.
    pub fn ready_time(&self, v: NodeId) -> Option<u64> {
        self.ready_time[self.graph.index(v)]
    }

    /// Steps left on `v` if it is processing, else 0.
    pub fn remaining_time(&self, v: NodeId) -> u32 {
        match self.machines[self.graph.machine_of(v)] {
            MachineStatus::Busy { op, remaining } if op == v => remaining,
            _ => 0,
        }
    }

    /// Completed processing time of `job`, counting elapsed steps of an in-flight operation.
    pub fn job_completed_work(&self, job: usize) -> u64 {
        let mut work = self.completed_work[job];
        if let Some(v) = self.next_operation(job) {
            if self.node_status(v) == NodeStatus::Processing {
                let proc_time = self.instance.op(v.job, v.rank).proc_time;
                work += u64::from(proc_time - self.remaining_time(v));
            }
        }
        work
    }

    /// First operation of `job` that is not done, if any.
    pub fn next_operation(&self, job: usize) -> Option<NodeId> {
        let m = self.instance.num_machines();
        (0..m).map(|rank| NodeId::new(job, rank)).find(|&v| self.node_status(v) != NodeStatus::Done)
    }

    /// Next unstarted operation of `job` whose predecessor is done.
    pub fn waiting_operation(&self, job: usize) -> Option<NodeId> {
        self.next_operation(job).filter(|&v| self.node_status(v) == NodeStatus::NotStarted)
    }

    pub fn is_done(&self) -> bool {
        self.ops_done == self.node_status.len()
    }

    pub fn event_log(&self) -> &EventLog {
        &self.log
    }

    pub fn into_event_log(self) -> EventLog {
        self.log
    }

    pub fn interruption_queue(&self) -> impl Iterator<Item = (&[NodeId], usize)> {
        self.interruption_queue.iter().map(|(nodes, m)| (nodes.as_slice(), *m))
    }

    pub fn counter_queue(&self) -> impl Iterator<Item = u32> + '_ {
        self.counter_queue.iter().copied()
    }

    /// Successor of the operation a holding machine keeps, with the machine it needs.
    fn held_successor(&self, machine: usize) -> Option<(NodeId, usize)> {
        match self.machines[machine] {
            MachineStatus::Holding { op } => {
                let succ = self.graph.conj_succ(op)?;
                Some((succ, self.graph.machine_of(succ)))
            }
            _ => None,
        }
    }

    pub fn machine_availability(&self, machine: usize) -> Availability {
        match self.machines[machine] {
            MachineStatus::Failed => Availability::Failed,
            MachineStatus::Busy { .. } => Availability::BusyOrSwapReserved,
            MachineStatus::Idle => Availability::Available,
            MachineStatus::Holding { .. } => {
                if self.detect_swap_cycles().iter().flatten().any(|&m| m == machine) {
                    Availability::BusyOrSwapReserved
                } else {
                    Availability::Blocked
                }
            }
        }
    }

    /// Operations that can be loaded now, ascending by (job, rank).
    pub fn ready_operations(&self) -> Vec<NodeId> {
        (0..self.instance.num_jobs())
            .filter_map(|job| self.waiting_operation(job))
            .filter(|&v| {
                let machine = self.graph.machine_of(v);
                self.graph.is_present(v) && self.machines[machine] == MachineStatus::Idle
            })
            .collect()
    }

    /// Jobs whose next operation could start as far as precedence goes but has not.
    pub fn waiting_jobs(&self) -> usize {
        (0..self.instance.num_jobs()).filter(|&job| self.waiting_operation(job).is_some()).count()
    }

    /// Cycles of holding machines, each waiting for the next. Every cycle is
    /// reported once, rotated to start at its smallest machine.
    pub fn detect_swap_cycles(&self) -> Vec<Vec<usize>> {
        let m = self.machines.len();
        let target = |a: usize| -> Option<usize> {
            let (_, b) = self.held_successor(a)?;
            matches!(self.machines[b], MachineStatus::Holding { .. }).then_some(b)
        };
        // 0 = unvisited, 1 = on current path, 2 = finished
        let mut mark = vec![0u8; m];
        let mut cycles = Vec::new();
        for start in 0..m {
            if mark[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut cur = Some(start);
            while let Some(a) = cur {
                match mark[a] {
                    0 => {
                        mark[a] = 1;
                        path.push(a);
                        cur = target(a);
                    }
                    1 => {
                        let pos = path.iter().position(|&x| x == a).expect("machine on path");
                        let mut cycle = path[pos..].to_vec();
                        if cycle.len() >= 2 {
                            let min_pos = cycle.iter().enumerate().min_by_key(|(_, &x)| x).map(|(i, _)| i).unwrap();
                            cycle.rotate_left(min_pos);
                            cycles.push(cycle);
                        }
                        break;
                    }
                    _ => break,
                }
            }
            for a in path {
                mark[a] = 2;
            }
        }
        cycles.sort();
        cycles
    }

    /// Rotates the jobs of every swap cycle at once. Returns the number of
    /// operations started.
    pub fn execute_swaps(&mut self) -> usize {
        let cycles = self.detect_swap_cycles();
        let mut started = 0;
        for cycle in cycles {
            let moves: Vec<(NodeId, usize)> =
                cycle.iter().map(|&a| self.held_successor(a).expect("holding machine in cycle")).collect();
            for (succ, target) in moves {
                self.start_operation(succ, target, EventKind::SwapStart);
                started += 1;
            }
        }
        started
    }

    /// Each idle machine fails independently with probability `p_interrupt`.
    pub fn sample_interruptions(&mut self) -> Vec<usize> {
        if self.config.p_interrupt <= 0.0 {
            return Vec::new();
        }
        let mut failed = Vec::new();
        for machine in 0..self.machines.len() {
            if self.machines[machine] == MachineStatus::Idle && self.rng.random_bool(self.config.p_interrupt) {
                self.fail_machine(machine);
                failed.push(machine);
            }
        }
        failed
    }

    /// Takes `machine` down now. It must be idle.
    pub fn fail_machine(&mut self, machine: usize) {
        assert_eq!(self.machines[machine], MachineStatus::Idle, "only idle machines fail");
        let nodes = self.graph.remove_machine_nodes(machine).expect("idle machine is not removed");
        self.machines[machine] = MachineStatus::Failed;
        self.interruption_queue.push_back((nodes, machine));
        self.counter_queue.push_back(0);
        self.log.push(Event { time: self.now, kind: EventKind::Fail, op: None, machine });
    }

    /// Ages all downtime counters by one step and recovers machines whose
    /// downtime reached `t_interrupt`.
    pub fn tick_interruptions(&mut self) -> Vec<usize> {
        for counter in self.counter_queue.iter_mut() {
            *counter += 1;
        }
        let mut recovered = Vec::new();
        while self.counter_queue.front() == Some(&self.config.t_interrupt) {
            self.counter_queue.pop_front();
            let (nodes, machine) = self.interruption_queue.pop_front().expect("queues have equal length");
            self.graph.reinstate_nodes(&nodes).expect("failed machine nodes are absent");
            self.machines[machine] = MachineStatus::Idle;
            self.log.push(Event { time: self.now, kind: EventKind::Recover, op: None, machine });
            recovered.push(machine);
        }
        recovered
    }

    /// Recovery, failure sampling and swap resolution for the current step.
    pub fn prepare_step(&mut self) {
        self.tick_interruptions();
        self.sample_interruptions();
        while self.execute_swaps() > 0 {}
    }

    pub fn apply_action(&mut self, v: NodeId) -> Result<(), SimError> {
        let ready = v.job < self.instance.num_jobs()
            && v.rank < self.instance.num_machines()
            && self.waiting_operation(v.job) == Some(v)
            && self.graph.is_present(v)
            && self.machines[self.graph.machine_of(v)] == MachineStatus::Idle;
        if !ready {
            return Err(SimError::NotReady(v));
        }
        let machine = self.graph.machine_of(v);
        self.start_operation(v, machine, EventKind::Start);
        Ok(())
    }

    fn start_operation(&mut self, v: NodeId, machine: usize, kind: EventKind) {
        if let Some(pred) = self.graph.conj_pred(v) {
            let pred_machine = self.graph.machine_of(pred);
            if self.machines[pred_machine] == (MachineStatus::Holding { op: pred }) {
                self.machines[pred_machine] = MachineStatus::Idle;
            }
        }
        let proc_time = self.instance.op(v.job, v.rank).proc_time;
        self.machines[machine] = MachineStatus::Busy { op: v, remaining: proc_time };
        let i = self.graph.index(v);
        self.node_status[i] = NodeStatus::Processing;
        self.log.push(Event { time: self.now, kind, op: Some(v), machine });
    }

    /// Moves the clock forward one step and returns `-n_w`, the number of
    /// waiting jobs during the step just elapsed.
    pub fn advance_time(&mut self) -> Result<f64, SimError> {
        if !self.ready_operations().is_empty() {
            return Err(SimError::SchedulableActionsPending);
        }
        let waiting = self.waiting_jobs();
        self.now += 1;
        for machine in 0..self.machines.len() {
            let MachineStatus::Busy { op, remaining } = self.machines[machine] else { continue };
            if remaining > 1 {
                self.machines[machine] = MachineStatus::Busy { op, remaining: remaining - 1 };
                continue;
            }
            let i = self.graph.index(op);
            self.node_status[i] = NodeStatus::Done;
            self.ops_done += 1;
            self.completed_work[op.job] += u64::from(self.instance.op(op.job, op.rank).proc_time);
            self.log.push(Event { time: self.now, kind: EventKind::Complete, op: Some(op), machine });
            self.machines[machine] = match self.graph.conj_succ(op) {
                Some(succ) => {
                    let j = self.graph.index(succ);
                    self.ready_time[j] = Some(self.now);
                    MachineStatus::Holding { op }
                }
                None => MachineStatus::Idle,
            };
        }
        Ok(-(waiting as f64))
    }

    /// Lower bound on the makespan reachable from this state.
    pub fn makespan_lower_bound(&self) -> u64 {
        let m = self.instance.num_machines();
        let mut machine_load = vec![0u64; m];
        let mut bound = self.now;
        for job in 0..self.instance.num_jobs() {
            let mut job_work = 0u64;
            for rank in 0..m {
                let v = NodeId::new(job, rank);
                let op = self.instance.op(job, rank);
                let left = match self.node_status(v) {
                    NodeStatus::Done => 0,
                    NodeStatus::Processing => u64::from(self.remaining_time(v)),
                    NodeStatus::NotStarted => u64::from(op.proc_time),
                };
                job_work += left;
                machine_load[op.machine] += left;
            }
            bound = bound.max(self.now + job_work);
        }
        machine_load.into_iter().map(|l| self.now + l).fold(bound, u64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Operation;

    fn arc(text: &str) -> Arc<Instance> {
        Arc::new(Instance::parse(text).unwrap())
    }

    fn job(spec: &[(usize, u32)]) -> Vec<Operation> {
        spec.iter().map(|&(machine, proc_time)| Operation { machine, proc_time }).collect()
    }

    fn run_until_idle(state: &mut SimState) {
        while !state.ready_operations().is_empty() {
            let v = state.ready_operations()[0];
            state.apply_action(v).unwrap();
        }
    }

    #[test]
    fn fresh_machine_is_available() {
        let state = SimState::new(arc("1 2\n0 3 1 4\n"), SimConfig::default(), 0);
        assert_eq!(state.machine_availability(0), Availability::Available);
        assert_eq!(state.machine_availability(1), Availability::Available);
    }

    #[test]
    fn busy_machine_reports_busy() {
        let mut state = SimState::new(arc("1 1\n0 5\n"), SimConfig::default(), 0);
        state.apply_action(NodeId::new(0, 0)).unwrap();
        state.advance_time().unwrap();
        state.advance_time().unwrap();
        assert_eq!(state.machine_status(0), MachineStatus::Busy { op: NodeId::new(0, 0), remaining: 3 });
        assert_eq!(state.machine_availability(0), Availability::BusyOrSwapReserved);
    }

    #[test]
    fn holding_machine_blocked_by_failed_successor_machine() {
        let inst = Arc::new(Instance::new(2, vec![job(&[(0, 2), (1, 3)])]).unwrap());
        let mut state = SimState::new(inst, SimConfig { p_interrupt: 0.0, t_interrupt: 5 }, 0);
        state.apply_action(NodeId::new(0, 0)).unwrap();
        state.fail_machine(1);
        state.advance_time().unwrap();
        state.prepare_step();
        state.advance_time().unwrap();
        state.prepare_step();
        assert_eq!(state.machine_status(0), MachineStatus::Holding { op: NodeId::new(0, 0) });
        assert_eq!(state.machine_availability(0), Availability::Blocked);
        assert_eq!(state.machine_availability(1), Availability::Failed);
        assert!(state.ready_operations().is_empty());
        // Downtime of 5 steps: failed at t=0, back at t=5.
        for _ in 0..3 {
            assert_eq!(state.advance_time().unwrap(), -1.0);
            state.prepare_step();
        }
        assert_eq!(state.now(), 5);
        assert_eq!(state.machine_availability(1), Availability::Available);
        assert_eq!(state.ready_operations(), vec![NodeId::new(0, 1)]);
        state.apply_action(NodeId::new(0, 1)).unwrap();
        assert_eq!(state.machine_status(0), MachineStatus::Idle);
    }

    #[test]
    fn figure_instance_initial_ready_set() {
        let inst = Arc::new(crate::graph::tests::figure_instance());
        let state = SimState::new(inst, SimConfig::default(), 0);
        let ready = state.ready_operations();
        assert_eq!(ready, vec![NodeId::new(0, 0), NodeId::new(1, 0), NodeId::new(2, 0)]);
    }

    #[test]
    fn no_ready_ops_when_done() {
        let mut state = SimState::new(arc("1 1\n0 2\n"), SimConfig::default(), 0);
        state.apply_action(NodeId::new(0, 0)).unwrap();
        state.advance_time().unwrap();
        state.advance_time().unwrap();
        assert!(state.is_done());
        assert!(state.ready_operations().is_empty());
    }

    #[test]
    fn ready_op_on_failed_machine_is_excluded() {
        let mut state = SimState::new(arc("2 2\n0 3 1 4\n1 2 0 2\n"), SimConfig::default(), 0);
        state.fail_machine(1);
        assert_eq!(state.ready_operations(), vec![NodeId::new(0, 0)]);
    }

    /// Two jobs crossing machines 0 and 1 end up holding each other's target.
    fn two_cycle_state() -> SimState {
        let inst = Arc::new(Instance::new(2, vec![job(&[(0, 2), (1, 3)]), job(&[(1, 2), (0, 4)])]).unwrap());
        let mut state = SimState::new(inst, SimConfig::default(), 0);
        state.apply_action(NodeId::new(0, 0)).unwrap();
        state.apply_action(NodeId::new(1, 0)).unwrap();
        state.advance_time().unwrap();
        state.advance_time().unwrap();
        state
    }

    #[test]
    fn detects_and_executes_two_cycle() {
        let mut state = two_cycle_state();
        assert_eq!(state.detect_swap_cycles(), vec![vec![0, 1]]);
        assert_eq!(state.machine_availability(0), Availability::BusyOrSwapReserved);
        assert_eq!(state.execute_swaps(), 2);
        assert_eq!(state.machine_status(1), MachineStatus::Busy { op: NodeId::new(0, 1), remaining: 3 });
        assert_eq!(state.machine_status(0), MachineStatus::Busy { op: NodeId::new(1, 1), remaining: 4 });
        let swaps: Vec<_> = state.event_log().iter().filter(|e| e.kind == EventKind::SwapStart).collect();
        assert_eq!(swaps.len(), 2);
        assert!(swaps.iter().all(|e| e.time == 2));
        assert_eq!(state.execute_swaps(), 0);
    }

    #[test]
    fn no_cycles_without_holding_machines() {
        let state = SimState::new(arc("2 2\n0 3 1 4\n1 2 0 2\n"), SimConfig::default(), 0);
        assert!(state.detect_swap_cycles().is_empty());
        let mut copy = state.clone();
        assert_eq!(copy.execute_swaps(), 0);
        assert_eq!(copy.event_log().len(), state.event_log().len());
    }

    #[test]
    fn three_machine_rotation() {
        // Job j starts on machine j and then needs machine j+1 (mod 3).
        let inst = Arc::new(
            Instance::new(
                3,
                vec![job(&[(0, 1), (1, 2), (2, 3)]), job(&[(1, 1), (2, 2), (0, 3)]), job(&[(2, 1), (0, 2), (1, 3)])],
            )
            .unwrap(),
        );
        let mut state = SimState::new(inst, SimConfig::default(), 0);
        run_until_idle(&mut state);
        state.advance_time().unwrap();
        assert_eq!(state.detect_swap_cycles(), vec![vec![0, 1, 2]]);
        assert_eq!(state.execute_swaps(), 3);
        for machine in 0..3 {
            assert!(matches!(state.machine_status(machine), MachineStatus::Busy { remaining: 2, .. }));
        }
    }

    #[test]
    fn interruption_sampling_extremes() {
        let inst = arc("2 2\n0 3 1 4\n1 2 0 2\n");
        let mut state = SimState::new(inst.clone(), SimConfig { p_interrupt: 0.0, t_interrupt: 5 }, 1);
        for _ in 0..100 {
            assert!(state.sample_interruptions().is_empty());
        }
        let mut state = SimState::new(inst, SimConfig { p_interrupt: 1.0, t_interrupt: 5 }, 1);
        state.apply_action(NodeId::new(0, 0)).unwrap();
        assert_eq!(state.sample_interruptions(), vec![1]);
        assert_eq!(state.machine_status(1), MachineStatus::Failed);
        assert!(!state.graph().is_present(NodeId::new(1, 0)));
        assert_eq!(state.counter_queue().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn failure_frequency_matches_probability() {
        // Ten single-op jobs that never run: every machine alternates between
        // idle and failed, so we can count idle-machine trials directly.
        let inst = Arc::new(Instance::generate(10, 1, &mut <ChaCha8Rng as SeedableRng>::seed_from_u64(0)));
        let p = 0.05;
        let mut state = SimState::new(inst, SimConfig { p_interrupt: p, t_interrupt: 50 }, 42);
        let (mut trials, mut failures) = (0u64, 0u64);
        for _ in 0..100_000 {
            state.tick_interruptions();
            let idle = (0..10).filter(|&m| state.machine_status(m) == MachineStatus::Idle).count() as u64;
            let failed = state.sample_interruptions().len() as u64;
            trials += idle;
            failures += failed;
            state.now += 1;
        }
        let freq = failures as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() < 3.0 * sigma, "freq {freq}");
    }

    #[test]
    fn recovery_after_exact_downtime_fifo() {
        let inst = Arc::new(Instance::generate(3, 1, &mut <ChaCha8Rng as SeedableRng>::seed_from_u64(0)));
        let mut state = SimState::new(inst, SimConfig { p_interrupt: 0.0, t_interrupt: 50 }, 0);
        let mut recoveries = Vec::new();
        for t in 0..100u64 {
            state.now = t;
            for machine in state.tick_interruptions() {
                recoveries.push((t, machine));
            }
            if t == 10 {
                state.fail_machine(0);
            }
            if t == 12 {
                state.fail_machine(2);
            }
            if (10..60).contains(&t) {
                assert_eq!(state.machine_status(0), MachineStatus::Failed, "t={t}");
            }
            assert!(state.counter_queue().all(|c| c < 50));
            assert_eq!(state.counter_queue().count(), state.interruption_queue().count());
        }
        assert_eq!(recoveries, vec![(60, 0), (62, 2)]);
        let mut empty = SimState::new(Arc::new(Instance::parse("1 1\n0 1").unwrap()), SimConfig::default(), 0);
        assert!(empty.tick_interruptions().is_empty());
    }

    #[test]
    fn apply_releases_holding_predecessor() {
        let mut state = SimState::new(arc("1 2\n0 2 1 3\n"), SimConfig::default(), 0);
        state.apply_action(NodeId::new(0, 0)).unwrap();
        state.advance_time().unwrap();
        state.advance_time().unwrap();
        assert_eq!(state.machine_status(0), MachineStatus::Holding { op: NodeId::new(0, 0) });
        state.apply_action(NodeId::new(0, 1)).unwrap();
        assert_eq!(state.machine_status(0), MachineStatus::Idle);
        assert_eq!(state.machine_status(1), MachineStatus::Busy { op: NodeId::new(0, 1), remaining: 3 });
    }

    #[test]
    fn applying_onto_blocked_machine_fails() {
        // Job 0 holds machine 0 (its successor needs failed machine 1); job 1 wants machine 0.
        let mut state = SimState::new(arc("2 2\n0 1 1 1\n0 1 1 1\n"), SimConfig::default(), 0);
        state.apply_action(NodeId::new(0, 0)).unwrap();
        state.fail_machine(1);
        state.advance_time().unwrap();
        assert_eq!(state.machine_availability(0), Availability::Blocked);
        assert!(matches!(state.apply_action(NodeId::new(1, 0)), Err(SimError::NotReady(_))));
        assert!(matches!(state.apply_action(NodeId::new(0, 1)), Err(SimError::NotReady(_))));
    }

    #[test]
    fn advance_rejects_pending_actions_and_counts_waiting_jobs() {
        let mut state = SimState::new(arc("3 1\n0 2\n0 2\n0 2\n"), SimConfig::default(), 0);
        assert!(matches!(state.advance_time(), Err(SimError::SchedulableActionsPending)));
        state.apply_action(NodeId::new(0, 0)).unwrap();
        assert_eq!(state.advance_time().unwrap(), -2.0);
    }

    #[test]
    fn reward_counts_jobs_stalled_by_failures_and_blocking() {
        let mut state = SimState::new(arc("3 1\n0 2\n0 2\n0 2\n"), SimConfig::default(), 0);
        state.fail_machine(0);
        assert_eq!(state.advance_time().unwrap(), -3.0);

        // Job 3 holds machine 0 while its successor's machine is down; all four jobs wait.
        let mut state = SimState::new(
            arc("4 2\n0 1 1 1\n0 1 1 1\n0 1 1 1\n0 1 1 1\n"),
            SimConfig { p_interrupt: 0.0, t_interrupt: 10 },
            0,
        );
        state.apply_action(NodeId::new(3, 0)).unwrap();
        state.fail_machine(1);
        state.advance_time().unwrap();
        assert_eq!(state.advance_time().unwrap(), -4.0);
    }
}
