//! Event trace of a run and the aggregates computed from it: per-AC
//! collision counts, per-AC channel utilization, total transmission time
//! and per-AC admission order. Also the CSV/JSON export formats.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::params::{AccessCategory, Discipline, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Enqueue,
    TxStart,
    Success,
    Collision,
    ChannelError,
    Drop,
    ClassChange {
        before: u8,
        after: u8,
    },
    /// Lost the station-internal scheduler to a higher-priority category.
    VirtualCollision,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Enqueue => "enqueue",
            EventKind::TxStart => "tx_start",
            EventKind::Success => "success",
            EventKind::Collision => "collision",
            EventKind::ChannelError => "channel_error",
            EventKind::Drop => "drop",
            EventKind::ClassChange { .. } => "class_change",
            EventKind::VirtualCollision => "virtual_collision",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: SimTime,
    pub station: u32,
    pub ac: AccessCategory,
    pub kind: EventKind,
    pub seq: u32,
    /// Data airtime for `TxStart`/`Success`/`Collision`/`ChannelError`, else 0.
    pub airtime_us: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: String,
    pub discipline: Discipline,
    pub seed: u64,
    pub events: Vec<TraceEvent>,
    pub enqueued: [u64; 4],
    pub delivered: [u64; 4],
    pub dropped: [u64; 4],
}

impl SimulationReport {
    pub fn is_conserved(&self) -> bool {
        (0..4).all(|i| self.enqueued[i] == self.delivered[i] + self.dropped[i])
    }
}

/// Per-AC count of transmissions that ended in a collision on the medium.
/// Every participant counts once in its own category.
pub fn collision_count_per_ac(report: &SimulationReport) -> [u64; 4] {
    let mut out = [0; 4];
    for e in &report.events {
        if e.kind == EventKind::Collision {
            out[e.ac.index()] += 1;
        }
    }
    out
}

/// Time of the last delivery or drop; zero for an empty run.
pub fn total_transmission_time(report: &SimulationReport) -> SimTime {
    report
        .events
        .iter()
        .rev()
        .find(|e| matches!(e.kind, EventKind::Success | EventKind::Drop))
        .map(|e| e.time)
        .unwrap_or(SimTime::ZERO)
}

/// Successful data airtime of `ac` over the whole run duration.
pub fn channel_utilization(report: &SimulationReport, ac: AccessCategory) -> f64 {
    let total = total_transmission_time(report).as_us();
    if total == 0 {
        return 0.0;
    }
    let airtime: u64 = report
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Success && e.ac == ac)
        .map(|e| e.airtime_us)
        .sum();
    airtime as f64 / total as f64
}

pub fn utilization_per_ac(report: &SimulationReport) -> [f64; 4] {
    AccessCategory::ALL.map(|ac| channel_utilization(report, ac))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admission {
    pub index: usize,
    pub station: u32,
    pub time: SimTime,
}

/// Deliveries of `ac` in time order, numbered from 1.
pub fn admission_trace(report: &SimulationReport, ac: AccessCategory) -> Vec<Admission> {
    report
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Success && e.ac == ac)
        .enumerate()
        .map(|(i, e)| Admission {
            index: i + 1,
            station: e.station,
            time: e.time,
        })
        .collect()
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub mode: String,
    pub k: Option<u32>,
    pub k_low: Option<u32>,
    pub n: Option<u8>,
    pub seed: u64,
    pub collisions: [u64; 4],
    pub utilization: [f64; 4],
    pub total_time_us: u64,
    pub delivered: [u64; 4],
    pub dropped: [u64; 4],
}

impl Summary {
    pub fn from_report(report: &SimulationReport) -> Self {
        let (mode, k, k_low, n) = match report.discipline {
            Discipline::Basic => ("basic", None, None, None),
            Discipline::Modified { k_high, k_low, n } => {
                ("modified", Some(k_high), Some(k_low), Some(n))
            }
        };
        Summary {
            scenario: report.scenario.clone(),
            mode: mode.to_string(),
            k,
            k_low,
            n,
            seed: report.seed,
            collisions: collision_count_per_ac(report),
            utilization: utilization_per_ac(report),
            total_time_us: total_transmission_time(report).as_us(),
            delivered: report.delivered,
            dropped: report.dropped,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary is always serializable");
        s.push('\n');
        s
    }
}

pub const EVENTS_CSV_HEADER: &str = "time_us,station,ac,kind,seq,j_before,j_after";

pub fn events_csv(report: &SimulationReport) -> String {
    let mut out = String::with_capacity(report.events.len() * 32);
    out.push_str(EVENTS_CSV_HEADER);
    out.push('\n');
    for e in &report.events {
        let (before, after) = match e.kind {
            EventKind::ClassChange { before, after } => (before.to_string(), after.to_string()),
            _ => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.time.as_us(),
            e.station,
            e.ac.index(),
            e.kind.name(),
            e.seq,
            before,
            after
        );
    }
    out
}

pub const ADMISSION_CSV_HEADER: &str = "index,station,time_us";

pub fn admission_csv(report: &SimulationReport, ac: AccessCategory) -> String {
    let mut out = String::from(ADMISSION_CSV_HEADER);
    out.push('\n');
    for a in admission_trace(report, ac) {
        let _ = writeln!(out, "{},{},{}", a.index, a.station, a.time.as_us());
    }
    out
}
