//! The WATERS 2019 industrial challenge (NVIDIA Jetson TX2 flavour).
//!
//! Four A57 cores, two Denver cores and one GPU acting as the accelerator.
//! Every task has a single segment. The published core-side WCET of an
//! accelerated segment is the whole offloading cost, so it is stored as
//! the offloading phase with a zero finalization phase.

use std::collections::BTreeMap;

use super::{ChainSpec, Core, ImplType, PlatformSpec, ProblemInstance, SegmentSpec, TaskSpec};
use crate::Time;

const A57: &str = "A57";
const DENVER: &str = "Denver";

struct Row {
    id: &'static str,
    period_ms: Time,
    impl_type: ImplType,
    /// (A57, Denver) processing WCET on a core.
    exec: Option<(Time, Time)>,
    /// (A57, Denver) offloading WCET.
    offload: Option<(Time, Time)>,
    accel: Option<Time>,
}

const ROWS: [Row; 9] = [
    Row { id: "Lidar Grabber", period_ms: 33, impl_type: ImplType::Cpu, exec: Some((14_379, 10_868)), offload: None, accel: None },
    Row { id: "DASM", period_ms: 5, impl_type: ImplType::Cpu, exec: Some((1_958, 1_300)), offload: None, accel: None },
    Row { id: "CAN Polling", period_ms: 10, impl_type: ImplType::Cpu, exec: Some((632, 600)), offload: None, accel: None },
    Row { id: "EKF", period_ms: 15, impl_type: ImplType::Cpu, exec: Some((5_011, 4_430)), offload: None, accel: None },
    Row { id: "Planner", period_ms: 12, impl_type: ImplType::Cpu, exec: Some((13_939, 12_437)), offload: None, accel: None },
    Row { id: "SFM", period_ms: 33, impl_type: ImplType::CpuHwa, exec: Some((31_055, 27_812)), offload: Some((8_320, 6_711)), accel: Some(7_900) },
    Row { id: "Localization", period_ms: 400, impl_type: ImplType::CpuHwa, exec: Some((407_811, 294_808)), offload: Some((18_568, 14_516)), accel: Some(124_000) },
    Row { id: "Lane Detection", period_ms: 66, impl_type: ImplType::CpuHwa, exec: Some((53_732, 42_238)), offload: Some((8_667, 7_626)), accel: Some(27_333) },
    Row { id: "Detection", period_ms: 200, impl_type: ImplType::Hwa, exec: None, offload: Some((4_958, 4_086)), accel: Some(116_000) },
];

/// Chains as 1-based indices into the task table, in table order C1..C8.
pub const WATERS_CHAINS: [&[usize]; 8] = [
    &[9, 5, 2],
    &[6, 5, 2],
    &[8, 5, 2],
    &[3, 7, 4, 5, 2],
    &[1, 7, 4, 5, 2],
    &[1, 5, 2],
    &[3, 4, 5, 2],
    &[3, 5, 2],
];

/// Published round-robin min-max-latency solution: (task, PRIO, core, accelerated).
pub const WATERS_PUBLISHED_RR: [(&str, u32, usize, bool); 9] = [
    ("Lidar Grabber", 8, 5, false),
    ("DASM", 5, 1, false),
    ("CAN Polling", 1, 1, false),
    ("EKF", 3, 0, false),
    ("Planner", 2, 2, false),
    ("SFM", 4, 3, false),
    ("Localization", 7, 4, false),
    ("Lane Detection", 6, 5, false),
    ("Detection", 0, 0, true),
];

fn per_type(pair: (Time, Time)) -> BTreeMap<String, Time> {
    BTreeMap::from([(A57.to_string(), pair.0), (DENVER.to_string(), pair.1)])
}

/// The bundled 9-task, 6-core instance with its 8 processing chains,
/// exactly as tabulated. Note that the Planner's WCET exceeds its 12 ms
/// period on both core types, so no design point is schedulable.
pub fn builtin_waters() -> ProblemInstance {
    let cores = (0..6)
        .map(|k| Core {
            id: k.to_string(),
            core_type: if k < 4 { A57 } else { DENVER }.to_string(),
        })
        .collect();
    let tasks = ROWS
        .iter()
        .map(|r| {
            let period = r.period_ms * 1000;
            TaskSpec {
                id: r.id.to_string(),
                period,
                deadline: period,
                segments: vec![SegmentSpec {
                    impl_type: r.impl_type,
                    exec: r.exec.map(per_type).unwrap_or_default(),
                    offload: r.offload.map(per_type).unwrap_or_default(),
                    finalize: r.offload.map(|_| per_type((0, 0))).unwrap_or_default(),
                    accel: r.accel,
                }],
            }
        })
        .collect();
    let chains = WATERS_CHAINS
        .iter()
        .enumerate()
        .map(|(x, members)| ChainSpec {
            id: format!("C{}", x + 1),
            tasks: members.iter().map(|&n| ROWS[n - 1].id.to_string()).collect(),
        })
        .collect();
    ProblemInstance {
        platform: PlatformSpec {
            core_types: vec![A57.to_string(), DENVER.to_string()],
            cores,
            accelerator: true,
        },
        tasks,
        chains,
    }
}

/// [`builtin_waters`] with the Planner's period and deadline at 15 ms, the
/// value the published chain latencies are consistent with.
pub fn builtin_waters_p15() -> ProblemInstance {
    let mut inst = builtin_waters();
    let planner = inst.task_index("Planner").expect("bundled task");
    inst.tasks[planner].period = 15_000;
    inst.tasks[planner].deadline = 15_000;
    inst
}

/// Names accepted after `builtin:`.
pub const BUILTIN_NAMES: [&str; 2] = ["waters", "waters-p15"];

pub fn builtin_instance(name: &str) -> Option<ProblemInstance> {
    match name {
        "waters" => Some(builtin_waters()),
        "waters-p15" => Some(builtin_waters_p15()),
        _ => None,
    }
}
