//! Independent feasibility check of a finished schedule, working only from
//! the instance and the event log.

use std::collections::HashMap;
use std::fmt;

use super::{EventKind, EventLog};
use crate::graph::NodeId;
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Operation never started, started twice, or never completed.
    Incomplete {
        op: NodeId,
    },
    WrongMachine {
        op: NodeId,
        machine: usize,
    },
    WrongDuration {
        op: NodeId,
        start: u64,
        end: u64,
    },
    Precedence {
        op: NodeId,
        start: u64,
        pred_end: u64,
    },
    /// Two processing intervals overlap on one machine.
    Exclusivity {
        machine: usize,
        a: NodeId,
        b: NodeId,
    },
    /// A job occupied a machine still held by another job.
    Blocking {
        machine: usize,
        a: NodeId,
        b: NodeId,
    },
    /// A machine was occupied during one of its failure windows.
    Failure {
        machine: usize,
        op: NodeId,
        fail_at: u64,
    },
    /// Failure or recovery without its counterpart.
    UnpairedFailure {
        machine: usize,
        time: u64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Default, Clone, Copy)]
struct OpTimes {
    start: Option<u64>,
    end: Option<u64>,
    starts: u32,
    ends: u32,
}

/// Returns every constraint violation found; an empty list means feasible.
pub fn validate_schedule(inst: &Instance, log: &EventLog) -> Vec<Violation> {
    let (n, m) = (inst.num_jobs(), inst.num_machines());
    let mut violations = Vec::new();
    let mut times = vec![vec![OpTimes::default(); m]; n];
    let mut open_failures: HashMap<usize, u64> = HashMap::new();
    let mut failure_windows: Vec<(usize, u64, u64)> = Vec::new();

    for e in log {
        match (e.kind, e.op) {
            (EventKind::Start | EventKind::SwapStart, Some(v)) if v.job < n && v.rank < m => {
                let t = &mut times[v.job][v.rank];
                t.start = Some(e.time);
                t.starts += 1;
                if inst.op(v.job, v.rank).machine != e.machine {
                    violations.push(Violation::WrongMachine { op: v, machine: e.machine });
                }
            }
            (EventKind::Complete, Some(v)) if v.job < n && v.rank < m => {
                let t = &mut times[v.job][v.rank];
                t.end = Some(e.time);
                t.ends += 1;
            }
            (EventKind::Fail, None) => {
                if open_failures.insert(e.machine, e.time).is_some() {
                    violations.push(Violation::UnpairedFailure { machine: e.machine, time: e.time });
                }
            }
            (EventKind::Recover, None) => match open_failures.remove(&e.machine) {
                Some(from) => failure_windows.push((e.machine, from, e.time)),
                None => violations.push(Violation::UnpairedFailure { machine: e.machine, time: e.time }),
            },
            (_, op) => violations.push(Violation::Incomplete { op: op.unwrap_or(NodeId::new(n, m)) }),
        }
    }
    // Failures still open when the log ends last forever.
    for (&machine, &from) in &open_failures {
        failure_windows.push((machine, from, u64::MAX));
    }

    // Per machine: (start, end, op) for processing, and occupancy including blocking.
    let mut processing: Vec<Vec<(u64, u64, NodeId)>> = vec![Vec::new(); m];
    let mut occupancy: Vec<Vec<(u64, u64, NodeId)>> = vec![Vec::new(); m];
    for (job, job_times) in times.iter().enumerate() {
        for (rank, &t) in job_times.iter().enumerate() {
            let v = NodeId::new(job, rank);
            let (Some(start), Some(end)) = (t.start, t.end) else {
                violations.push(Violation::Incomplete { op: v });
                continue;
            };
            if t.starts != 1 || t.ends != 1 {
                violations.push(Violation::Incomplete { op: v });
            }
            let op = inst.op(job, rank);
            if end != start + u64::from(op.proc_time) {
                violations.push(Violation::WrongDuration { op: v, start, end });
            }
            if rank > 0 {
                if let Some(pred_end) = times[job][rank - 1].end {
                    if start < pred_end {
                        violations.push(Violation::Precedence { op: v, start, pred_end });
                    }
                }
            }
            let release = if rank + 1 < m { times[job][rank + 1].start.unwrap_or(end) } else { end };
            processing[op.machine].push((start, end, v));
            occupancy[op.machine].push((start, release.max(end), v));
        }
    }

    for machine in 0..m {
        for (a, b) in overlaps(&mut processing[machine]) {
            violations.push(Violation::Exclusivity { machine, a, b });
        }
        for (a, b) in overlaps(&mut occupancy[machine]) {
            if !violations.contains(&Violation::Exclusivity { machine, a, b }) {
                violations.push(Violation::Blocking { machine, a, b });
            }
        }
    }
    for &(machine, from, to) in &failure_windows {
        for &(start, end, v) in &occupancy[machine] {
            if start < to && from < end {
                violations.push(Violation::Failure { machine, op: v, fail_at: from });
            }
        }
    }
    violations
}

/// Half-open interval overlaps between neighbours after sorting by start.
fn overlaps(intervals: &mut [(u64, u64, NodeId)]) -> Vec<(NodeId, NodeId)> {
    intervals.sort();
    let mut found = Vec::new();
    let mut reach: Option<(u64, NodeId)> = None;
    for &(start, end, v) in intervals.iter() {
        if let Some((until, w)) = reach {
            if start < until {
                found.push((w, v));
            }
        }
        if reach.is_none_or(|(until, _)| end > until) {
            reach = Some((end, v));
        }
    }
    found
}

/// Sum over operations of the time between becoming ready (predecessor
/// complete, or time 0) and starting. Equals the undiscounted episode return
/// with the sign flipped.
pub fn total_waiting_time(inst: &Instance, log: &EventLog) -> u64 {
    let m = inst.num_machines();
    let mut start = vec![0u64; inst.num_operations()];
    let mut end = vec![0u64; inst.num_operations()];
    for e in log {
        if let Some(v) = e.op {
            match e.kind {
                EventKind::Start | EventKind::SwapStart => start[v.job * m + v.rank] = e.time,
                EventKind::Complete => end[v.job * m + v.rank] = e.time,
                _ => {}
            }
        }
    }
    (0..inst.num_operations())
        .map(|i| {
            let ready = if i % m == 0 { 0 } else { end[i - 1] };
            start[i] - ready
        })
        .sum()
}
