//! Dynamic disjunctive graph.
//!
//! Conjunctive edges follow each job's operation order. Disjunctive cliques
//! are implicit: every present node sharing a machine is connected. Failing a
//! machine flips the presence flag of all its nodes, so reinstating them
//! restores the original topology exactly.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::instance::Instance;
use crate::sim::{NodeStatus, SimState};

/// Number of components in a node feature vector.
pub const FEATURE_DIM: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("machine {0} is already removed")]
    AlreadyRemoved(usize),
    #[error("node {0} is not removed")]
    NotRemoved(NodeId),
    #[error("nodes to reinstate span several machines")]
    MixedMachines,
    #[error("node {0} is not present in the graph")]
    AbsentNode(NodeId),
}

/// Operation `rank` (0-based position) of job `job`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub job: usize,
    pub rank: usize,
}

impl NodeId {
    pub const fn new(job: usize, rank: usize) -> Self {
        Self { job, rank }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o({},{})", self.job, self.rank)
    }
}

/// Neighbourhoods of a node among present nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Neighborhoods {
    pub preceding: Option<NodeId>,
    pub succeeding: Option<NodeId>,
    pub disjunctive: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeKind {
    Conjunctive,
    Disjunctive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjunctiveGraph {
    num_jobs: usize,
    num_machines: usize,
    machine_of: Vec<usize>,
    present: Vec<bool>,
    removed_machines: Vec<bool>,
    /// Nodes of each machine, ascending by (job, rank).
    machine_nodes: Vec<Vec<NodeId>>,
}

impl DisjunctiveGraph {
    pub fn build(inst: &Instance) -> Self {
        let (n, m) = (inst.num_jobs(), inst.num_machines());
        let mut machine_of = Vec::with_capacity(n * m);
        let mut machine_nodes = vec![Vec::with_capacity(n); m];
        for (job, ops) in inst.jobs().iter().enumerate() {
            for (rank, op) in ops.iter().enumerate() {
                machine_of.push(op.machine);
                machine_nodes[op.machine].push(NodeId::new(job, rank));
            }
        }
        Self {
            num_jobs: n,
            num_machines: m,
            machine_of,
            present: vec![true; n * m],
            removed_machines: vec![false; m],
            machine_nodes,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.present.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.num_jobs
    }

    pub fn num_machines(&self) -> usize {
        self.num_machines
    }

    /// Dense index `job * m + rank`, the node numbering used in dumps.
    pub fn index(&self, v: NodeId) -> usize {
        v.job * self.num_machines + v.rank
    }

    pub fn node_at(&self, index: usize) -> NodeId {
        NodeId::new(index / self.num_machines, index % self.num_machines)
    }

    pub fn machine_of(&self, v: NodeId) -> usize {
        self.machine_of[self.index(v)]
    }

    pub fn is_present(&self, v: NodeId) -> bool {
        self.present[self.index(v)]
    }

    pub fn is_machine_removed(&self, machine: usize) -> bool {
        self.removed_machines[machine]
    }

    pub fn removed_machines(&self) -> impl Iterator<Item = usize> + '_ {
        self.removed_machines.iter().enumerate().filter(|(_, &r)| r).map(|(m, _)| m)
    }

    /// Present nodes in ascending (job, rank) order.
    pub fn present_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.num_nodes()).filter(|&i| self.present[i]).map(|i| self.node_at(i))
    }

    /// Static conjunctive successor, ignoring presence.
    pub fn conj_succ(&self, v: NodeId) -> Option<NodeId> {
        (v.rank + 1 < self.num_machines).then(|| NodeId::new(v.job, v.rank + 1))
    }

    /// Static conjunctive predecessor, ignoring presence.
    pub fn conj_pred(&self, v: NodeId) -> Option<NodeId> {
        (v.rank > 0).then(|| NodeId::new(v.job, v.rank - 1))
    }

    pub fn machine_nodes(&self, machine: usize) -> &[NodeId] {
        &self.machine_nodes[machine]
    }

    pub fn remove_machine_nodes(&mut self, machine: usize) -> Result<Vec<NodeId>, GraphError> {
        if self.removed_machines[machine] {
            return Err(GraphError::AlreadyRemoved(machine));
        }
        self.removed_machines[machine] = true;
        let nodes = self.machine_nodes[machine].clone();
        for &v in &nodes {
            let i = self.index(v);
            self.present[i] = false;
        }
        Ok(nodes)
    }

    pub fn reinstate_nodes(&mut self, nodes: &[NodeId]) -> Result<(), GraphError> {
        let Some(&first) = nodes.first() else { return Ok(()) };
        let machine = self.machine_of(first);
        for &v in nodes {
            if self.machine_of(v) != machine {
                return Err(GraphError::MixedMachines);
            }
            if self.is_present(v) || !self.removed_machines[machine] {
                return Err(GraphError::NotRemoved(v));
            }
        }
        for &v in nodes {
            let i = self.index(v);
            self.present[i] = true;
        }
        // The machine stays failed while any of its nodes is still absent.
        if self.machine_nodes[machine].iter().all(|&v| self.is_present(v)) {
            self.removed_machines[machine] = false;
        }
        Ok(())
    }

    pub fn neighborhoods(&self, v: NodeId) -> Result<Neighborhoods, GraphError> {
        if !self.is_present(v) {
            return Err(GraphError::AbsentNode(v));
        }
        let present = |w: &NodeId| self.is_present(*w);
        Ok(Neighborhoods {
            preceding: self.conj_pred(v).filter(present),
            succeeding: self.conj_succ(v).filter(present),
            disjunctive: self.machine_nodes[self.machine_of(v)]
                .iter()
                .copied()
                .filter(|w| *w != v && present(w))
                .collect(),
        })
    }

    /// Every edge among present nodes. Conjunctive edges point along the job;
    /// each disjunctive pair is listed once with the smaller node first.
    pub fn edges(&self) -> Vec<(NodeId, NodeId, EdgeKind)> {
        let mut edges = Vec::new();
        for v in self.present_nodes() {
            if let Some(w) = self.conj_succ(v).filter(|w| self.is_present(*w)) {
                edges.push((v, w, EdgeKind::Conjunctive));
            }
        }
        for nodes in &self.machine_nodes {
            for (i, &a) in nodes.iter().enumerate() {
                for &b in &nodes[i + 1..] {
                    if self.is_present(a) && self.is_present(b) {
                        edges.push((a, b, EdgeKind::Disjunctive));
                    }
                }
            }
        }
        edges
    }

    /// Plain-text edge list, one `v -> w [conj|disj]` line per edge, nodes by dense index.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (a, b, kind) in self.edges() {
            let tag = match kind {
                EdgeKind::Conjunctive => "conj",
                EdgeKind::Disjunctive => "disj",
            };
            let _ = writeln!(out, "{} -> {} [{tag}]", self.index(a), self.index(b));
        }
        out
    }
}

/// The 8-component feature vector of a node.
///
/// Layout: status one-hot (not started, processing, done), processing time,
/// degree of completion of the job, succeeding operations, waiting time,
/// remaining time. Time values are divided by the instance's longest
/// operation; the succeeding count `m - rank` is divided by `m`.
pub fn node_features(state: &SimState, v: NodeId) -> Result<[f64; FEATURE_DIM], GraphError> {
    let graph = state.graph();
    if !graph.is_present(v) {
        return Err(GraphError::AbsentNode(v));
    }
    let inst = state.instance();
    let scale = f64::from(inst.max_proc_time());
    let m = inst.num_machines() as f64;
    let proc_time = f64::from(inst.op(v.job, v.rank).proc_time);
    let status = state.node_status(v);

    let mut x = [0.0; FEATURE_DIM];
    x[match status {
        NodeStatus::NotStarted => 0,
        NodeStatus::Processing => 1,
        NodeStatus::Done => 2,
    }] = 1.0;
    x[3] = proc_time / scale;
    x[4] = state.job_completed_work(v.job) as f64 / inst.total_processing_time(v.job) as f64;
    x[5] = (m - v.rank as f64) / m;
    if status == NodeStatus::NotStarted {
        if let Some(ready) = state.ready_time(v) {
            x[6] = state.now().saturating_sub(ready) as f64 / scale;
        }
    }
    if status == NodeStatus::Processing {
        x[7] = f64::from(state.remaining_time(v)) / scale;
    }
    Ok(x)
}
