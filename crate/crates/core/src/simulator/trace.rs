use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::Time;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Release,
    /// First time the job gets its core.
    Start,
    Preempt,
    /// The job gets its core back after a preemption or a suspension.
    Resume,
    /// Offloading phase done; the job leaves its core and waits for the
    /// accelerator.
    Offload,
    AccelStart,
    AccelDone,
    Finish,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: Time,
    pub task: String,
    pub job: u64,
    pub kind: EventKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segment: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRecord {
    pub task: String,
    pub job: u64,
    pub release: Time,
    pub finish: Time,
    pub response: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimTrace {
    pub horizon: Time,
    /// Empty unless tracing was enabled.
    pub events: Vec<TraceEvent>,
    /// Largest observed response per task; `None` if no job was released.
    pub observed_wcrt: IndexMap<String, Option<Time>>,
    pub jobs: Vec<JobRecord>,
    /// Whether requests were serialized on one accelerator.
    pub serialized_accel: bool,
}

impl SimTrace {
    /// Events as JSON lines.
    pub fn events_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serialization cannot fail"));
            out.push('\n');
        }
        out
    }

    /// Per-job response times as CSV.
    pub fn jobs_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for j in &self.jobs {
            w.serialize(j).expect("in-memory csv write cannot fail");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush cannot fail")).expect("csv is utf-8")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceViolation {
    pub time: Time,
    pub message: String,
}

/// Checks structural invariants of a recorded trace: a core runs one job
/// at a time, the accelerator serves one request at a time (when
/// serialized), and every job goes release, then offload, accelerator
/// start and accelerator done for each offloaded segment in order, then
/// finish.
pub fn check_trace(trace: &SimTrace) -> Vec<TraceViolation> {
    #[derive(Default)]
    struct JobState {
        released: bool,
        finished: bool,
        on_core: Option<usize>,
        // 0 idle, 1 offloaded and waiting, 2 on accelerator
        accel: u8,
        segment: Option<usize>,
    }
    let mut out = Vec::new();
    let mut bad = |time: Time, message: String| out.push(TraceViolation { time, message });
    let mut core_busy: HashMap<usize, (String, u64)> = HashMap::new();
    let mut accel_busy = 0usize;
    let mut jobs: HashMap<(String, u64), JobState> = HashMap::new();
    let mut last = 0;
    for e in &trace.events {
        if e.time < last {
            bad(e.time, "events out of time order".into());
        }
        last = e.time;
        let key = (e.task.clone(), e.job);
        let j = jobs.entry(key.clone()).or_default();
        let who = format!("{}#{}", e.task, e.job);
        if j.finished {
            bad(e.time, format!("{who}: {:?} after finish", e.kind));
        }
        if !j.released && e.kind != EventKind::Release {
            bad(e.time, format!("{who}: {:?} before release", e.kind));
        }
        match e.kind {
            EventKind::Release => {
                if j.released {
                    bad(e.time, format!("{who}: released twice"));
                }
                j.released = true;
            }
            EventKind::Start | EventKind::Resume => {
                let Some(core) = e.core else {
                    bad(e.time, format!("{who}: dispatched without a core"));
                    continue;
                };
                if j.accel != 0 {
                    bad(e.time, format!("{who}: runs on a core while suspended"));
                }
                if let Some(other) = core_busy.get(&core) {
                    bad(e.time, format!("core {core} runs {}#{} and {who}", other.0, other.1));
                }
                core_busy.insert(core, key.clone());
                j.on_core = Some(core);
            }
            EventKind::Preempt | EventKind::Offload | EventKind::Finish => {
                if let Some(core) = e.core {
                    if core_busy.get(&core) != Some(&key) || j.on_core != Some(core) {
                        bad(e.time, format!("{who}: leaves core {core} it does not hold"));
                    }
                    core_busy.remove(&core);
                    j.on_core = None;
                }
                match e.kind {
                    EventKind::Offload => {
                        if j.accel != 0 {
                            bad(e.time, format!("{who}: offloads while suspended"));
                        }
                        if e.segment.is_some() && e.segment <= j.segment {
                            bad(e.time, format!("{who}: segments out of order"));
                        }
                        j.accel = 1;
                        j.segment = e.segment;
                    }
                    EventKind::Finish => {
                        if j.accel != 0 {
                            bad(e.time, format!("{who}: finishes while suspended"));
                        }
                        j.finished = true;
                    }
                    _ => {}
                }
            }
            EventKind::AccelStart => {
                if j.accel != 1 || e.segment != j.segment {
                    bad(e.time, format!("{who}: accelerator start without a matching offload"));
                }
                j.accel = 2;
                accel_busy += 1;
                if trace.serialized_accel && accel_busy > 1 {
                    bad(e.time, format!("{who}: accelerator already busy"));
                }
            }
            EventKind::AccelDone => {
                if j.accel != 2 || e.segment != j.segment {
                    bad(e.time, format!("{who}: accelerator done without a start"));
                }
                j.accel = 0;
                accel_busy = accel_busy.saturating_sub(1);
            }
        }
    }
    out
}
