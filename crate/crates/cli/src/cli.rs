//! Argument parsing and command dispatch for the `isbjssp` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use isbjssp_core::sim::{validate_schedule, EventLog};
use isbjssp_core::{train, Instance, ParamStore, PpoConfig, TrainOptions};

use crate::config::{config_echo, load_config};
use crate::error::CliError;
use crate::evaluate::{evaluate, EvalPlan, SchedulerKind};
use crate::records::{load_instances, load_records, records_to_string, RESULTS_HEADER};
use crate::report::build_report;
use crate::{generate, plot};

#[derive(Debug, Parser)]
#[command(name = "isbjssp", version, about = "Interrupting swap-allowed blocking job shop toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write random instance files.
    Generate(GenerateArgs),
    /// Simulate schedulers over instances and write a results CSV.
    Evaluate(EvaluateArgs),
    /// Train the GNN policy with PPO.
    Train(TrainArgs),
    /// Check an event log against its instance.
    Validate(ValidateArgs),
    /// Aggregate a results CSV.
    Report(ReportArgs),
    /// Render an event log as a Gantt chart or a results CSV as curves.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub machines: usize,
    #[arg(long)]
    pub jobs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also dump each initial disjunctive graph as an edge list.
    #[arg(long)]
    pub graphs: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Instance file or directory of `*.txt` instances.
    #[arg(long)]
    pub instances: PathBuf,
    /// Comma-separated rule names, `GNN`, or `ALL`.
    #[arg(long, default_value = "ALL")]
    pub scheduler: String,
    /// Comma-separated probabilities; `5%` and `0.05` are equivalent.
    #[arg(long, default_value = "0")]
    pub p_interrupt: String,
    #[arg(long, default_value_t = 50)]
    pub t_interrupt: u32,
    /// Replicates per cell.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Training config whose GNN settings match the checkpoint.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Results CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write one event log CSV per episode into this directory.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Write wall_ms as 0 so the CSV is reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Best-so-far parameters are written here.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Training log CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Leave wall_ms empty so the log is reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Instance file the log was produced from.
    #[arg(long)]
    pub instances: PathBuf,
    /// Event log CSV.
    pub events: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub results: PathBuf,
    /// Include the per-instance table.
    #[arg(long)]
    pub per_instance: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Event log CSV (Gantt chart) or results CSV (curves).
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub title: Option<String>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate(a) => {
            let files = generate::generate(a.count, a.machines, a.jobs, a.seed, &a.out, a.graphs)?;
            eprintln!("wrote {} instance(s) to {}", files.len(), a.out.display());
            Ok(())
        }
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Train(a) => cmd_train(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Report(a) => {
            let report = build_report(&load_records(&a.results)?)?;
            write_output(a.out.as_deref(), &report.render(a.per_instance))
        }
        Command::Plot(a) => cmd_plot(a),
    }
}

/// Parses `0,0.05,20%` into probabilities.
pub fn parse_probabilities(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (num, scale) = match s.strip_suffix('%') {
                Some(pct) => (pct, 100.0),
                None => (s, 1.0),
            };
            let p = num.parse::<f64>().map_err(|_| CliError::Usage(format!("bad probability `{s}`")))? / scale;
            if (0.0..=1.0).contains(&p) {
                Ok(p)
            } else {
                Err(CliError::Usage(format!("probability `{s}` outside [0, 1]")))
            }
        })
        .collect()
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(CliError::io(p)),
        None => {
            let stdout = Path::new("<stdout>");
            std::io::stdout().lock().write_all(text.as_bytes()).map_err(CliError::io(stdout))
        }
    }
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let schedulers = SchedulerKind::parse_list(&a.scheduler)?;
    let mut plan = EvalPlan::new(load_instances(&a.instances)?, schedulers);
    plan.p_values = parse_probabilities(&a.p_interrupt)?;
    plan.t_interrupt = a.t_interrupt;
    plan.replicates = a.seeds;
    plan.master_seed = a.seed;
    plan.timing = !a.no_timing;
    if let Some(path) = &a.config {
        let cfg = load_config(path)?;
        plan.gnn = cfg.gnn();
        plan.step_cap = cfg.step_cap;
    }
    if let Some(path) = &a.checkpoint {
        plan.params = Some(Arc::new(ParamStore::load(path).map_err(|e| CliError::parse(path, e))?));
    }
    let outcomes = evaluate(&plan)?;
    if let Some(dir) = &a.events {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        for o in &outcomes {
            let r = &o.record;
            let name = format!("{}_{}_p{}_s{}.csv", r.instance, r.scheduler, r.p_interrupt, r.seed);
            let path = dir.join(name);
            std::fs::write(&path, o.log.to_csv()).map_err(CliError::io(&path))?;
        }
    }
    let records: Vec<_> = outcomes.into_iter().map(|o| o.record).collect();
    write_output(a.out.as_deref(), &records_to_string(&records))?;
    let invalid = records.iter().filter(|r| !r.validated).count();
    if invalid > 0 {
        return Err(CliError::Validation(format!("{invalid} episode(s) failed schedule validation")));
    }
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    let mut config = match &a.config {
        Some(path) => load_config(path)?,
        None => PpoConfig::default(),
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    let file = std::fs::File::create(&a.out).map_err(CliError::io(&a.out))?;
    let mut log = std::io::BufWriter::new(file);
    let io_err = CliError::io(&a.out);
    let mut write_err = None;
    let mut write = |text: &str, log: &mut std::io::BufWriter<std::fs::File>| {
        if write_err.is_none() {
            if let Err(e) = log.write_all(text.as_bytes()).and_then(|_| log.flush()) {
                write_err = Some(e);
            }
        }
    };
    write(&config_echo(&config), &mut log);
    write(&format!("{}\n", isbjssp_core::ppo::TRAIN_LOG_HEADER), &mut log);
    let options = TrainOptions { checkpoint: Some(a.checkpoint.clone()), omit_wall_time: a.no_timing };
    let outcome = train(&config, &options, |row| write(&format!("{}\n", row.to_csv_line()), &mut log))?;
    if let Some(e) = write_err {
        return Err(io_err(e));
    }
    eprintln!(
        "{} iteration(s){}; best validation mean makespan {:.1}; checkpoint {}",
        outcome.iterations,
        if outcome.stopped_early { " (stopped early)" } else { "" },
        outcome.best_validation,
        a.checkpoint.display()
    );
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> Result<(), CliError> {
    let inst = Instance::load(&a.instances).map_err(|e| CliError::instance(&a.instances, e))?;
    let text = std::fs::read_to_string(&a.events).map_err(CliError::io(&a.events))?;
    let log = EventLog::from_csv(&text).map_err(|e| CliError::parse(&a.events, e))?;
    let violations = validate_schedule(&inst, &log);
    if violations.is_empty() {
        println!("ok: {} events, no violations", log.len());
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(CliError::Validation(format!("{} violation(s)", violations.len())))
}

fn cmd_plot(a: PlotArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.input).map_err(CliError::io(&a.input))?;
    let title = a.title.unwrap_or_else(|| a.input.file_stem().unwrap_or_default().to_string_lossy().into_owned());
    let svg = if text.starts_with(RESULTS_HEADER) {
        let records = crate::records::read_records(text.as_bytes()).map_err(|e| CliError::parse(&a.input, e))?;
        plot::curves_svg(&build_report(&records)?, &title)
    } else {
        let log = EventLog::from_csv(&text).map_err(|e| CliError::parse(&a.input, e))?;
        plot::gantt_svg(&log, &title)
    };
    std::fs::write(&a.out, svg).map_err(CliError::io(&a.out))
}
