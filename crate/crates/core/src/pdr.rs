//! Priority dispatching rules.
//!
//! Every rule scores the candidate operations and loads the highest score;
//! ties go to the smallest (job, rank). "Work remaining" counts operations,
//! and a candidate's arrival is the time it became ready.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::NodeId;
use crate::sim::{Decision, Scheduler, SimError, SimState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Mtwr,
    Ltwr,
    Spt,
    Lpt,
    Fifo,
    Lifo,
    Sqno,
    Lqno,
    Stpt,
    Ltpt,
    Random,
}

impl Rule {
    pub const ALL: [Rule; 11] = [
        Rule::Mtwr,
        Rule::Ltwr,
        Rule::Spt,
        Rule::Lpt,
        Rule::Fifo,
        Rule::Lifo,
        Rule::Sqno,
        Rule::Lqno,
        Rule::Stpt,
        Rule::Ltpt,
        Rule::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Mtwr => "MTWR",
            Rule::Ltwr => "LTWR",
            Rule::Spt => "SPT",
            Rule::Lpt => "LPT",
            Rule::Fifo => "FIFO",
            Rule::Lifo => "LIFO",
            Rule::Sqno => "SQNO",
            Rule::Lqno => "LQNO",
            Rule::Stpt => "STPT",
            Rule::Ltpt => "LTPT",
            Rule::Random => "RANDOM",
        }
    }

    /// The rule ranking candidates in the opposite order, if any.
    pub fn dual(self) -> Option<Rule> {
        Some(match self {
            Rule::Mtwr => Rule::Ltwr,
            Rule::Ltwr => Rule::Mtwr,
            Rule::Spt => Rule::Lpt,
            Rule::Lpt => Rule::Spt,
            Rule::Fifo => Rule::Lifo,
            Rule::Lifo => Rule::Fifo,
            Rule::Sqno => Rule::Lqno,
            Rule::Lqno => Rule::Sqno,
            Rule::Stpt => Rule::Ltpt,
            Rule::Ltpt => Rule::Stpt,
            Rule::Random => return None,
        })
    }

    /// Score of candidate `v`; higher is preferred. Not defined for `Random`.
    pub fn priority(self, state: &SimState, v: NodeId) -> f64 {
        let inst = state.instance();
        let m = inst.num_machines();
        match self {
            Rule::Mtwr => (m - v.rank) as f64,
            Rule::Ltwr => -((m - v.rank) as f64),
            Rule::Spt => -f64::from(inst.op(v.job, v.rank).proc_time),
            Rule::Lpt => f64::from(inst.op(v.job, v.rank).proc_time),
            Rule::Fifo => -(state.ready_time(v).unwrap_or(0) as f64),
            Rule::Lifo => state.ready_time(v).unwrap_or(0) as f64,
            Rule::Sqno => -(next_machine_queue(state, v) as f64),
            Rule::Lqno => next_machine_queue(state, v) as f64,
            Rule::Stpt => -(inst.total_processing_time(v.job) as f64),
            Rule::Ltpt => inst.total_processing_time(v.job) as f64,
            Rule::Random => panic!("RANDOM has no priority score"),
        }
    }

    /// Chooses among `actions` (ascending by (job, rank)).
    pub fn select<R: Rng + ?Sized>(
        self,
        state: &SimState,
        actions: &[NodeId],
        rng: &mut R,
    ) -> Result<NodeId, SimError> {
        if actions.is_empty() {
            return Err(SimError::EmptyActionSet);
        }
        if self == Rule::Random {
            return Ok(actions[rng.random_range(0..actions.len())]);
        }
        let mut best = actions[0];
        let mut best_score = self.priority(state, best);
        for &v in &actions[1..] {
            let score = self.priority(state, v);
            if score > best_score || (score == best_score && v < best) {
                best = v;
                best_score = score;
            }
        }
        Ok(best)
    }

    /// A scheduler applying this rule; `seed` only matters for `Random`.
    pub fn scheduler(self, seed: u64) -> RuleScheduler {
        RuleScheduler { rule: self, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

/// Waiting operations that need the machine of the operation after `v`.
/// Zero when `v` is its job's last operation.
fn next_machine_queue(state: &SimState, v: NodeId) -> usize {
    let graph = state.graph();
    let Some(next) = graph.conj_succ(v) else { return 0 };
    let machine = graph.machine_of(next);
    (0..state.instance().num_jobs())
        .filter_map(|job| state.waiting_operation(job))
        .filter(|&w| graph.machine_of(w) == machine)
        .count()
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownRule(pub String);

impl fmt::Display for UnknownRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown dispatching rule `{}`", self.0)
    }
}

impl std::error::Error for UnknownRule {}

impl FromStr for Rule {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct RuleScheduler {
    rule: Rule,
    rng: ChaCha8Rng,
}

impl RuleScheduler {
    pub fn rule(&self) -> Rule {
        self.rule
    }
}

impl Scheduler for RuleScheduler {
    fn decide(&mut self, state: &SimState, actions: &[NodeId]) -> Result<Decision, SimError> {
        self.rule.select(state, actions, &mut self.rng).map(Decision::plain)
    }
}
