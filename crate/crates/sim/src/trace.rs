use std::io::{self, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceKind {
    Depart,
    ArriveStop { stop_id: String },
    Board { stop_id: String, count: usize },
    /// `stop_id` is absent when everyone leaves at the end of the route.
    Alight { stop_id: Option<String>, count: usize },
    FrameEmitted { truth_occupied: usize },
    ReportPosted { occupied: usize, empty: usize, total: usize, version: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: u64,
    pub bus_id: String,
    #[serde(flatten)]
    pub kind: TraceKind,
}

/// Ordered record of everything that happened in a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub events: Vec<TraceEvent>,
}

impl SimTrace {
    pub fn push(&mut self, t: u64, bus_id: &str, kind: TraceKind) {
        self.events.push(TraceEvent { t, bus_id: bus_id.to_string(), kind });
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn read_jsonl(text: &str) -> serde_json::Result<Self> {
        let events = text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect::<Result<_, _>>()?;
        Ok(Self { events })
    }

    /// Net boardings minus alightings for one bus.
    pub fn net_onboard(&self, bus_id: &str) -> i64 {
        self.events
            .iter()
            .filter(|e| e.bus_id == bus_id)
            .map(|e| match e.kind {
                TraceKind::Board { count, .. } => count as i64,
                TraceKind::Alight { count, .. } => -(count as i64),
                _ => 0,
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let mut t = SimTrace::default();
        t.push(10, "b1", TraceKind::Depart);
        t.push(20, "b1", TraceKind::Board { stop_id: "A".into(), count: 3 });
        t.push(30, "b1", TraceKind::Alight { stop_id: None, count: 1 });
        t.push(60, "b1", TraceKind::ReportPosted { occupied: 2, empty: 58, total: 60, version: 1 });
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().next().unwrap().contains(r#""kind":"depart""#));
        assert_eq!(SimTrace::read_jsonl(&text).unwrap(), t);
        assert_eq!(t.net_onboard("b1"), 2);
    }
}
