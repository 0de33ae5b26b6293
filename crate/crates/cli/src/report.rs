//! Aggregate tables over results rows.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::CliError;
use crate::records::RunRecord;

/// Population mean and standard deviation; `(0, 0)` for no values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub instance: String,
    pub scheduler: String,
    pub p_interrupt: f64,
    pub t_interrupt: u32,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
}

/// Instance-set totals for one scheduler and interruption setting.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalStats {
    pub scheduler: String,
    pub p_interrupt: f64,
    pub t_interrupt: u32,
    pub instances: usize,
    /// Replicates present for every instance.
    pub replicates: usize,
    /// Sum of per-instance means.
    pub total_mean: f64,
    /// Spread of the per-replicate totals.
    pub total_std: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub groups: Vec<GroupStats>,
    pub totals: Vec<TotalStats>,
}

type SettingKey = (String, u64, u32);

fn setting_key(r: &RunRecord) -> SettingKey {
    (r.scheduler.clone(), r.p_interrupt.to_bits(), r.t_interrupt)
}

/// Builds the report; every row must be validated.
pub fn build_report(records: &[RunRecord]) -> Result<Report, CliError> {
    if let Some(bad) = records.iter().find(|r| !r.validated) {
        return Err(CliError::Validation(format!(
            "row for {} / {} / seed {} failed schedule validation",
            bad.instance, bad.scheduler, bad.seed
        )));
    }

    // Settings and instances keep their first-appearance order.
    let mut settings: Vec<SettingKey> = Vec::new();
    let mut setting_index: HashMap<SettingKey, usize> = HashMap::new();
    let mut per_setting: Vec<Vec<(String, Vec<&RunRecord>)>> = Vec::new();
    for r in records {
        let key = setting_key(r);
        let s = *setting_index.entry(key.clone()).or_insert_with(|| {
            settings.push(key);
            per_setting.push(Vec::new());
            settings.len() - 1
        });
        let groups = &mut per_setting[s];
        match groups.iter_mut().find(|(name, _)| *name == r.instance) {
            Some((_, rows)) => rows.push(r),
            None => groups.push((r.instance.clone(), vec![r])),
        }
    }

    let mut report = Report::default();
    for ((scheduler, p_bits, t_interrupt), groups) in settings.into_iter().zip(per_setting) {
        let p_interrupt = f64::from_bits(p_bits);
        let mut total_mean = 0.0;
        let mut by_replicate: BTreeMap<u64, (usize, u64)> = BTreeMap::new();
        for (instance, rows) in &groups {
            let values: Vec<f64> = rows.iter().map(|r| r.makespan as f64).collect();
            let (mean, std) = mean_std(&values);
            total_mean += mean;
            for r in rows {
                let slot = by_replicate.entry(r.seed).or_default();
                slot.0 += 1;
                slot.1 += r.makespan;
            }
            report.groups.push(GroupStats {
                instance: instance.clone(),
                scheduler: scheduler.clone(),
                p_interrupt,
                t_interrupt,
                runs: rows.len(),
                mean,
                std,
            });
        }
        let complete: Vec<f64> =
            by_replicate.values().filter(|(count, _)| *count == groups.len()).map(|&(_, sum)| sum as f64).collect();
        report.totals.push(TotalStats {
            scheduler,
            p_interrupt,
            t_interrupt,
            instances: groups.len(),
            replicates: complete.len(),
            total_mean,
            total_std: mean_std(&complete).1,
        });
    }
    Ok(report)
}

impl Report {
    pub fn total(&self, scheduler: &str, p_interrupt: f64) -> Option<&TotalStats> {
        self.totals.iter().find(|t| t.scheduler == scheduler && t.p_interrupt == p_interrupt)
    }

    pub fn render(&self, with_instances: bool) -> String {
        let mut out = String::new();
        if with_instances {
            let _ = writeln!(
                out,
                "{:<12} {:<8} {:>8} {:>6} {:>12} {:>10}",
                "instance", "scheduler", "p", "runs", "mean", "std"
            );
            for g in &self.groups {
                let _ = writeln!(
                    out,
                    "{:<12} {:<8} {:>8} {:>6} {:>12.1} {:>10.1}",
                    g.instance, g.scheduler, g.p_interrupt, g.runs, g.mean, g.std
                );
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>6} {:>9} {:>10} {:>14} {:>10}",
            "scheduler", "p", "t", "instances", "replicates", "total_mean", "total_std"
        );
        for t in &self.totals {
            let _ = writeln!(
                out,
                "{:<8} {:>8} {:>6} {:>9} {:>10} {:>14.1} {:>10.1}",
                t.scheduler, t.p_interrupt, t.t_interrupt, t.instances, t.replicates, t.total_mean, t.total_std
            );
        }
        out.push_str(
            "\nstd is the population standard deviation; total_mean sums per-instance means and \
             total_std is taken over per-replicate totals.\n",
        );
        out
    }
}
