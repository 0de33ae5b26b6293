//! Evaluation sweeps over instance × scheduler × p_interrupt × replicate.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use isbjssp_core::seeding::derive_seed;
use isbjssp_core::sim::{validate_schedule, EventLog, DEFAULT_STEP_CAP};
use isbjssp_core::{
    run_episode, ActMode, EpisodeConfig, GnnConfig, GnnScheduler, Instance, ParamStore, Rule, Scheduler, SimConfig,
};
use rayon::prelude::*;

use crate::error::CliError;
use crate::records::RunRecord;

pub const GNN_NAME: &str = "GNN";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerKind {
    Rule(Rule),
    /// The trained policy, acting greedily.
    Gnn,
}

impl SchedulerKind {
    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Rule(r) => r.name(),
            SchedulerKind::Gnn => GNN_NAME,
        }
    }

    /// Comma-separated names; `ALL` expands to the eleven rules.
    pub fn parse_list(text: &str) -> Result<Vec<SchedulerKind>, CliError> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if part.eq_ignore_ascii_case("all") {
                out.extend(Rule::ALL.map(SchedulerKind::Rule));
            } else {
                out.push(part.parse()?);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case(GNN_NAME) || s.eq_ignore_ascii_case("GNN-RL") {
            return Ok(SchedulerKind::Gnn);
        }
        s.parse().map(SchedulerKind::Rule).map_err(|e| CliError::Usage(format!("{e}")))
    }
}

#[derive(Debug, Clone)]
pub struct EvalPlan {
    pub instances: Vec<Arc<Instance>>,
    pub schedulers: Vec<SchedulerKind>,
    pub p_values: Vec<f64>,
    pub t_interrupt: u32,
    pub replicates: u64,
    pub master_seed: u64,
    pub params: Option<Arc<ParamStore>>,
    pub gnn: GnnConfig,
    /// When false, `wall_ms` is written as 0 so output is reproducible.
    pub timing: bool,
    pub step_cap: u64,
}

impl EvalPlan {
    pub fn new(instances: Vec<Arc<Instance>>, schedulers: Vec<SchedulerKind>) -> Self {
        Self {
            instances,
            schedulers,
            p_values: vec![0.0],
            t_interrupt: 50,
            replicates: 1,
            master_seed: 0,
            params: None,
            gnn: GnnConfig::default(),
            timing: true,
            step_cap: DEFAULT_STEP_CAP,
        }
    }

    fn cells(&self) -> Vec<Cell<'_>> {
        let mut cells = Vec::new();
        for inst in &self.instances {
            for &scheduler in &self.schedulers {
                for &p in &self.p_values {
                    for replicate in 0..self.replicates {
                        cells.push(Cell { instance: inst, scheduler, p, replicate });
                    }
                }
            }
        }
        cells
    }
}

struct Cell<'a> {
    instance: &'a Arc<Instance>,
    scheduler: SchedulerKind,
    p: f64,
    replicate: u64,
}

/// One evaluated episode with its event log.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub record: RunRecord,
    pub log: EventLog,
}

/// Runs every cell of the plan in parallel; output order follows
/// instance, scheduler, p, replicate.
pub fn evaluate(plan: &EvalPlan) -> Result<Vec<Outcome>, CliError> {
    if plan.schedulers.contains(&SchedulerKind::Gnn) && plan.params.is_none() {
        return Err(CliError::MissingCheckpoint);
    }
    for &p in &plan.p_values {
        SimConfig { p_interrupt: p, t_interrupt: plan.t_interrupt }.validate()?;
    }
    plan.cells().par_iter().map(|cell| run_cell(plan, cell)).collect()
}

fn run_cell(plan: &EvalPlan, cell: &Cell<'_>) -> Result<Outcome, CliError> {
    let label = format!("{}|{}|{}", cell.instance.name(), cell.scheduler.name(), cell.p);
    let sim_seed = derive_seed(plan.master_seed, &format!("sim|{label}"), cell.replicate);
    let policy_seed = derive_seed(plan.master_seed, &format!("scheduler|{label}"), cell.replicate);
    let mut scheduler: Box<dyn Scheduler> = match cell.scheduler {
        SchedulerKind::Rule(rule) => Box::new(rule.scheduler(policy_seed)),
        SchedulerKind::Gnn => {
            let params = plan.params.clone().ok_or(CliError::MissingCheckpoint)?;
            Box::new(GnnScheduler::new(params, ActMode::Greedy, policy_seed).with_gnn(plan.gnn))
        }
    };
    let config = EpisodeConfig {
        sim: SimConfig { p_interrupt: cell.p, t_interrupt: plan.t_interrupt },
        seed: sim_seed,
        step_cap: plan.step_cap,
    };
    let start = Instant::now();
    let episode = run_episode(cell.instance.clone(), &mut scheduler, &config)?;
    let wall_ms = if plan.timing { start.elapsed().as_millis() as u64 } else { 0 };
    let validated = validate_schedule(cell.instance, &episode.log).is_empty();
    Ok(Outcome {
        record: RunRecord {
            instance: cell.instance.name().to_string(),
            scheduler: cell.scheduler.name().to_string(),
            p_interrupt: cell.p,
            t_interrupt: plan.t_interrupt,
            seed: cell.replicate,
            makespan: episode.makespan,
            wall_ms,
            validated,
        },
        log: episode.log,
    })
}
