use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::NodeId;

pub const EVENT_CSV_HEADER: &str = "time,event,job,rank,machine";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Start,
    Complete,
    SwapStart,
    Fail,
    Recover,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Start => "start",
            Self::Complete => "complete",
            Self::SwapStart => "swap_start",
            Self::Fail => "fail",
            Self::Recover => "recover",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "start" => Self::Start,
            "complete" => Self::Complete,
            "swap_start" => Self::SwapStart,
            "fail" => Self::Fail,
            "recover" => Self::Recover,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub time: u64,
    pub kind: EventKind,
    /// Operation concerned; `None` for machine failures and recoveries.
    pub op: Option<NodeId>,
    pub machine: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("event log line {line}: {message}")]
pub struct EventLogError {
    pub line: usize,
    pub message: String,
}

/// Time-ordered record of starts, completions, swaps, failures and recoveries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Event> {
        self.events.iter()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn events_mut(&mut self) -> &mut Vec<Event> {
        &mut self.events
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(EVENT_CSV_HEADER);
        out.push('\n');
        for e in &self.events {
            let (job, rank) = match e.op {
                Some(v) => (v.job.to_string(), v.rank.to_string()),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(out, "{},{},{job},{rank},{}", e.time, e.kind.as_str(), e.machine);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, EventLogError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == EVENT_CSV_HEADER => {}
            _ => return Err(EventLogError { line: 1, message: format!("expected header `{EVENT_CSV_HEADER}`") }),
        }
        let mut events = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: &str| EventLogError { line: line_no, message: message.to_string() };
            let fields: Vec<&str> = line.trim().split(',').collect();
            let [time, kind, job, rank, machine] = fields[..] else {
                return Err(err("expected 5 fields"));
            };
            let time = time.parse().map_err(|_| err("bad time"))?;
            let kind = EventKind::parse(kind).ok_or_else(|| err("unknown event"))?;
            let machine = machine.parse().map_err(|_| err("bad machine"))?;
            let op = match (job, rank) {
                ("", "") => None,
                (j, r) => {
                    Some(NodeId::new(j.parse().map_err(|_| err("bad job"))?, r.parse().map_err(|_| err("bad rank"))?))
                }
            };
            if op.is_none() != matches!(kind, EventKind::Fail | EventKind::Recover) {
                return Err(err("operation fields do not match event kind"));
            }
            events.push(Event { time, kind, op, machine });
        }
        Ok(Self { events })
    }
}

impl<'a> IntoIterator for &'a EventLog {
    type Item = &'a Event;
    type IntoIter = std::slice::Iter<'a, Event>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}
