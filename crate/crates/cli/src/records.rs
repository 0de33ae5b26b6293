//! Results CSV: one row per simulated episode.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use isbjssp_core::Instance;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const RESULTS_HEADER: &str = "instance,scheduler,p_interrupt,t_interrupt,seed,makespan,wall_ms,validated";

/// Outcome of one episode. `seed` is the replicate index within its cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub scheduler: String,
    pub p_interrupt: f64,
    pub t_interrupt: u32,
    pub seed: u64,
    pub makespan: u64,
    pub wall_ms: u64,
    pub validated: bool,
}

pub fn write_records<W: Write>(out: W, records: &[RunRecord]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RESULTS_HEADER.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn records_to_string(records: &[RunRecord]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<RunRecord>, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().collect()
}

pub fn save_records(path: &Path, records: &[RunRecord]) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(CliError::io(path))?;
    write_records(std::io::BufWriter::new(file), records).map_err(|e| CliError::parse(path, e))
}

pub fn load_records(path: &Path) -> Result<Vec<RunRecord>, CliError> {
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    read_records(std::io::BufReader::new(file)).map_err(|e| CliError::parse(path, e))
}

/// Loads one instance file, or every `*.txt` file of a directory sorted by name.
pub fn load_instances(path: &Path) -> Result<Vec<Arc<Instance>>, CliError> {
    let meta = std::fs::metadata(path).map_err(CliError::io(path))?;
    if !meta.is_dir() {
        return Ok(vec![Arc::new(Instance::load(path).map_err(|e| CliError::instance(path, e))?)]);
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(CliError::io(path))? {
        let p = entry.map_err(CliError::io(path))?.path();
        if p.extension().is_some_and(|e| e == "txt") {
            files.push(p);
        }
    }
    files.sort();
    files.iter().map(|p| Instance::load(p).map(Arc::new).map_err(|e| CliError::instance(p, e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(p: f64, seed: u64) -> RunRecord {
        RunRecord {
            instance: "ft10".into(),
            scheduler: "SPT".into(),
            p_interrupt: p,
            t_interrupt: 50,
            seed,
            makespan: 1234,
            wall_ms: 7,
            validated: true,
        }
    }

    #[test]
    fn header_is_exact() {
        let text = records_to_string(&[]);
        assert_eq!(text, format!("{RESULTS_HEADER}\n"));
    }

    #[test]
    fn records_round_trip() {
        let rows = vec![record(0.0, 0), record(0.05, 1), record(0.1 + 0.2, 2)];
        let text = records_to_string(&rows);
        assert!(text.lines().nth(1).unwrap().starts_with("ft10,SPT,0.0,50,0,1234,7,true"));
        assert_eq!(read_records(text.as_bytes()).unwrap(), rows);
    }
}
