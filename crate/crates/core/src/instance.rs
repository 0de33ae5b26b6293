//! Problem instances: parsing, generation and serialization.
//!
//! Files use the classic OR-Library job-shop layout: a `<jobs> <machines>`
//! header followed by one line per job listing `<machine> <proc_time>` pairs
//! in operation order. Machine indices are 0-based.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

/// Longest processing time drawn by [`Instance::generate`].
pub const MAX_GENERATED_PROC_TIME: u32 = 99;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: malformed header, expected `<jobs> <machines>`")]
    MalformedHeader { line: usize },
    #[error("line {line} (job {job}): unparsable token `{token}`")]
    MalformedToken { line: usize, job: usize, token: String },
    #[error("line {line} (job {job}): expected {expected} operations, found {found}")]
    WrongOperationCount { line: usize, job: usize, expected: usize, found: usize },
    #[error("line {line} (job {job}): machine {machine} out of range 0..{machines}")]
    MachineIndexOutOfRange { line: usize, job: usize, machine: usize, machines: usize },
    #[error("line {line} (job {job}): machine {machine} used twice")]
    DuplicateMachineInJob { line: usize, job: usize, machine: usize },
    #[error("line {line} (job {job}): processing time must be at least 1")]
    NonPositiveProcTime { line: usize, job: usize },
    #[error("expected {expected} job lines, found {found}")]
    WrongJobCount { expected: usize, found: usize },
    #[error("i/o error reading {path}: {message}")]
    Io { path: String, message: String },
}

/// One operation: the machine it needs and how many time steps it takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Operation {
    pub machine: usize,
    pub proc_time: u32,
}

/// An immutable ISBJSSP problem: `n` jobs, each visiting all `m` machines once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    name: String,
    num_machines: usize,
    jobs: Vec<Vec<Operation>>,
}

impl Instance {
    /// Builds an instance from per-job operation lists, checking every invariant.
    pub fn new(num_machines: usize, jobs: Vec<Vec<Operation>>) -> Result<Self, InstanceError> {
        for (j, ops) in jobs.iter().enumerate() {
            check_job(j, j + 2, ops, num_machines)?;
        }
        Ok(Self { name: String::new(), num_machines, jobs })
    }

    /// Parses the OR-Library text layout. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (header_line, header) = lines.next().ok_or(InstanceError::MalformedHeader { line: 1 })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| InstanceError::MalformedHeader { line: header_line })?;
        let [num_jobs, num_machines] = dims[..] else {
            return Err(InstanceError::MalformedHeader { line: header_line });
        };
        if num_jobs == 0 || num_machines == 0 {
            return Err(InstanceError::MalformedHeader { line: header_line });
        }

        let mut jobs = Vec::with_capacity(num_jobs);
        for (line, body) in lines {
            let job = jobs.len();
            if job == num_jobs {
                return Err(InstanceError::WrongJobCount { expected: num_jobs, found: job + 1 });
            }
            let values: Vec<i64> = body
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<i64>().map_err(|_| InstanceError::MalformedToken { line, job, token: tok.to_string() })
                })
                .collect::<Result<_, _>>()?;
            if values.len() != 2 * num_machines {
                return Err(InstanceError::WrongOperationCount {
                    line,
                    job,
                    expected: num_machines,
                    found: values.len() / 2,
                });
            }
            let mut ops = Vec::with_capacity(num_machines);
            for pair in values.chunks_exact(2) {
                let machine = usize::try_from(pair[0]).map_err(|_| InstanceError::MachineIndexOutOfRange {
                    line,
                    job,
                    machine: usize::MAX,
                    machines: num_machines,
                })?;
                if pair[1] < 1 {
                    return Err(InstanceError::NonPositiveProcTime { line, job });
                }
                let proc_time = u32::try_from(pair[1]).map_err(|_| InstanceError::MalformedToken {
                    line,
                    job,
                    token: pair[1].to_string(),
                })?;
                ops.push(Operation { machine, proc_time });
            }
            check_job(job, line, &ops, num_machines)?;
            jobs.push(ops);
        }
        if jobs.len() != num_jobs {
            return Err(InstanceError::WrongJobCount { expected: num_jobs, found: jobs.len() });
        }
        Ok(Self { name: String::new(), num_machines, jobs })
    }

    /// Reads and parses a file, naming the instance after the file stem.
    pub fn load(path: &Path) -> Result<Self, InstanceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InstanceError::Io { path: path.display().to_string(), message: e.to_string() })?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(Self::parse(&text)?.with_name(name))
    }

    /// Random instance: each job visits the machines in an independent uniform
    /// permutation, processing times uniform on `1..=99`.
    pub fn generate<R: Rng + ?Sized>(num_machines: usize, num_jobs: usize, rng: &mut R) -> Self {
        assert!(num_machines >= 1 && num_jobs >= 1, "instance needs at least one job and machine");
        let jobs = (0..num_jobs)
            .map(|_| {
                let mut order: Vec<usize> = (0..num_machines).collect();
                order.shuffle(rng);
                order
                    .into_iter()
                    .map(|machine| Operation { machine, proc_time: rng.random_range(1..=MAX_GENERATED_PROC_TIME) })
                    .collect()
            })
            .collect();
        Self { name: String::new(), num_machines, jobs }
    }

    /// Serializes to the file layout; `Instance::parse` inverts this exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.num_jobs(), self.num_machines);
        for ops in &self.jobs {
            let line: Vec<String> = ops.iter().map(|op| format!("{} {}", op.machine, op.proc_time)).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn num_machines(&self) -> usize {
        self.num_machines
    }

    pub fn num_operations(&self) -> usize {
        self.jobs.len() * self.num_machines
    }

    pub fn jobs(&self) -> &[Vec<Operation>] {
        &self.jobs
    }

    pub fn op(&self, job: usize, rank: usize) -> Operation {
        self.jobs[job][rank]
    }

    /// Sum of processing times over all operations of `job`.
    pub fn total_processing_time(&self, job: usize) -> u64 {
        self.jobs[job].iter().map(|op| u64::from(op.proc_time)).sum()
    }

    pub fn max_proc_time(&self) -> u32 {
        self.jobs.iter().flatten().map(|op| op.proc_time).max().unwrap_or(1)
    }
}

fn check_job(job: usize, line: usize, ops: &[Operation], num_machines: usize) -> Result<(), InstanceError> {
    if ops.len() != num_machines {
        return Err(InstanceError::WrongOperationCount { line, job, expected: num_machines, found: ops.len() });
    }
    let mut seen = vec![false; num_machines];
    for op in ops {
        if op.machine >= num_machines {
            return Err(InstanceError::MachineIndexOutOfRange {
                line,
                job,
                machine: op.machine,
                machines: num_machines,
            });
        }
        if op.proc_time == 0 {
            return Err(InstanceError::NonPositiveProcTime { line, job });
        }
        if std::mem::replace(&mut seen[op.machine], true) {
            return Err(InstanceError::DuplicateMachineInJob { line, job, machine: op.machine });
        }
    }
    Ok(())
}

/// Training-size distribution: `m ~ U{5..9}`, then `n ~ U{m..9}`.
pub fn sample_training_size<R: Rng + ?Sized>(rng: &mut R) -> (usize, usize) {
    let m = rng.random_range(5..=9);
    let n = rng.random_range(m..=9);
    (m, n)
}
