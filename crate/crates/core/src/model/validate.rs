use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ImplType, ProblemInstance};
use crate::Time;

/// One broken invariant, with a path-like locator into the instance
/// document (e.g. `tasks[3].segments[0].accel_us`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }
}

/// Returns every invariant violation of `inst`; an empty list means the
/// instance is valid.
pub fn validate_instance(inst: &ProblemInstance) -> Vec<Violation> {
    let mut out = Collector(Vec::new());
    let platform = &inst.platform;

    let mut seen = HashSet::new();
    for (n, ty) in platform.core_types.iter().enumerate() {
        if !seen.insert(ty.as_str()) {
            out.push(
                format!("platform.core_types[{n}]"),
                format!("duplicate core type {ty:?}"),
            );
        }
    }
    if platform.cores.is_empty() {
        out.push("platform.cores", "platform needs at least one core");
    }
    let mut core_ids = HashSet::new();
    for (k, core) in platform.cores.iter().enumerate() {
        if !core_ids.insert(core.id.as_str()) {
            out.push(
                format!("platform.cores[{k}].id"),
                format!("duplicate core id {:?}", core.id),
            );
        }
        if !platform.core_types.contains(&core.core_type) {
            out.push(
                format!("platform.cores[{k}].type"),
                format!("unknown core type {:?}", core.core_type),
            );
        }
    }

    let mut task_ids = HashSet::new();
    for (i, task) in inst.tasks.iter().enumerate() {
        let at = format!("tasks[{i}]");
        if !task_ids.insert(task.id.as_str()) {
            out.push(format!("{at}.id"), format!("duplicate task id {:?}", task.id));
        }
        if task.deadline == 0 {
            out.push(format!("{at}.deadline_us"), "deadline must be positive");
        }
        if task.deadline > task.period {
            out.push(
                format!("{at}.deadline_us"),
                format!(
                    "task {:?}: deadline {} exceeds period {}",
                    task.id, task.deadline, task.period
                ),
            );
        }
        if task.segments.is_empty() {
            out.push(format!("{at}.segments"), "task needs at least one segment");
        }
        for (j, seg) in task.segments.iter().enumerate() {
            let at = format!("{at}.segments[{j}]");
            let needs = |family: &BTreeMap<String, Time>, name: &str, out: &mut Collector| {
                for ty in &platform.core_types {
                    if !family.contains_key(ty) {
                        out.push(format!("{at}.{name}"), format!("missing WCET for core type {ty:?}"));
                    }
                }
            };
            let forbids = |family: &BTreeMap<String, Time>, name: &str, out: &mut Collector| {
                if !family.is_empty() {
                    out.push(
                        format!("{at}.{name}"),
                        format!("not allowed for impl {:?}", seg.impl_type),
                    );
                }
            };
            for (name, family) in [
                ("exec_us", &seg.exec),
                ("offload_us", &seg.offload),
                ("finalize_us", &seg.finalize),
            ] {
                for ty in family.keys() {
                    if !platform.core_types.contains(ty) {
                        out.push(format!("{at}.{name}"), format!("unknown core type {ty:?}"));
                    }
                }
            }
            match seg.impl_type {
                ImplType::Cpu => {
                    needs(&seg.exec, "exec_us", &mut out);
                    if seg.accel.is_some() {
                        out.push(format!("{at}.accel_us"), "cpu-only segment cannot have an accelerator WCET");
                    }
                }
                ImplType::Hwa => {
                    forbids(&seg.exec, "exec_us", &mut out);
                    needs(&seg.offload, "offload_us", &mut out);
                    needs(&seg.finalize, "finalize_us", &mut out);
                    if seg.accel.is_none() {
                        out.push(format!("{at}.accel_us"), "accelerated segment needs an accelerator WCET");
                    }
                }
                ImplType::CpuHwa => {
                    needs(&seg.exec, "exec_us", &mut out);
                    needs(&seg.offload, "offload_us", &mut out);
                    needs(&seg.finalize, "finalize_us", &mut out);
                    if seg.accel.is_none() {
                        out.push(format!("{at}.accel_us"), "accelerable segment needs an accelerator WCET");
                    }
                }
            }
            if seg.impl_type != ImplType::Cpu && !platform.accelerator {
                out.push(
                    format!("{at}.impl"),
                    format!(
                        "task {:?} uses the accelerator but the platform has none",
                        task.id
                    ),
                );
            }
        }
    }

    for (x, chain) in inst.chains.iter().enumerate() {
        if chain.tasks.is_empty() {
            out.push(format!("chains[{x}].tasks"), "chain must not be empty");
        }
        for (n, id) in chain.tasks.iter().enumerate() {
            if inst.task_index(id).is_none() {
                out.push(format!("chains[{x}].tasks[{n}]"), format!("unknown task {id:?}"));
            }
        }
    }

    out.0
}

/// Problems that leave the instance well formed but make it infeasible:
/// tasks whose response time in isolation, on the fastest core type and
/// with the best acceleration choice per segment, already exceeds the
/// deadline.
pub fn validation_warnings(inst: &ProblemInstance) -> Vec<Violation> {
    let mut out = Collector(Vec::new());
    for (i, task) in inst.tasks.iter().enumerate() {
        let best = inst
            .used_core_types()
            .into_iter()
            .map(|ty| {
                task.segments
                    .iter()
                    .map(|seg| {
                        let cpu = seg.impl_type.has_cpu_impl().then(|| seg.exec_on(ty));
                        let acc = seg.impl_type.has_accel_impl().then(|| seg.accel_side_on(ty) + seg.accel_wcet());
                        cpu.into_iter().chain(acc).min().unwrap_or(0)
                    })
                    .sum::<Time>()
            })
            .min();
        if let Some(best) = best.filter(|&b| b > task.deadline) {
            out.push(
                format!("tasks[{i}]"),
                format!(
                    "task {:?} needs at least {best} us in isolation but its deadline is {} us",
                    task.id, task.deadline
                ),
            );
        }
    }
    out.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_waters;

    #[test]
    fn waters_is_valid() {
        assert_eq!(validate_instance(&builtin_waters()), vec![]);
    }

    #[test]
    fn tabulated_planner_is_flagged() {
        let w = validation_warnings(&builtin_waters());
        assert_eq!(w.len(), 1, "{w:?}");
        assert!(w[0].message.contains("Planner") && w[0].message.contains("12437"));
        assert_eq!(validation_warnings(&crate::model::builtin_waters_p15()), vec![]);
    }

    #[test]
    fn deadline_beyond_period_is_reported_once() {
        let mut inst = builtin_waters();
        inst.tasks[2].deadline = inst.tasks[2].period + 1;
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].message.contains("CAN Polling"));
        assert_eq!(v[0].path, "tasks[2].deadline_us");
    }

    #[test]
    fn accelerable_segment_without_accelerator() {
        let mut inst = builtin_waters();
        // Keep a single accelerable task so exactly one violation remains.
        inst.tasks.retain(|t| t.id == "SFM" || !t.accelerable());
        inst.chains.clear();
        inst.platform.accelerator = false;
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].message.contains("SFM"));
    }

    #[test]
    fn structural_problems() {
        let mut inst = builtin_waters();
        inst.platform.cores[1].id = inst.platform.cores[0].id.clone();
        inst.tasks[0].segments[0].exec.remove("Denver");
        inst.chains[0].tasks.push("nope".into());
        let v = validate_instance(&inst);
        let paths: Vec<_> = v.iter().map(|v| v.path.as_str()).collect();
        assert_eq!(
            paths,
            ["platform.cores[1].id", "tasks[0].segments[0].exec_us", "chains[0].tasks[3]"]
        );
    }
}
