use serde::Serialize;

use super::AnalysisError;
use crate::model::{Assignment, ProblemInstance};
use crate::Time;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Exec { wcet: Time },
    /// Accelerator processing of segment `segment` of the task.
    Suspension { segment: usize },
}

/// A task seen as alternating execution and suspension regions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelfSuspendingView {
    pub task: usize,
    pub regions: Vec<Region>,
    pub total_exec: Time,
    pub has_suspension: bool,
}

impl SelfSuspendingView {
    pub fn exec_regions(&self) -> impl Iterator<Item = Time> + '_ {
        self.regions.iter().filter_map(|r| match r {
            Region::Exec { wcet } => Some(*wcet),
            Region::Suspension { .. } => None,
        })
    }

    pub fn num_suspensions(&self) -> usize {
        self.regions
            .iter()
            .filter(|r| matches!(r, Region::Suspension { .. }))
            .count()
    }
}

/// Looks up `task_id` and maps it; see [`self_suspending_view`].
pub fn map_to_self_suspending(
    inst: &ProblemInstance,
    assign: &Assignment,
    task_id: &str,
) -> Result<SelfSuspendingView, AnalysisError> {
    let i = inst
        .task_index(task_id)
        .ok_or_else(|| AnalysisError::UnknownTask(task_id.to_string()))?;
    Ok(self_suspending_view(inst, assign, i))
}

/// Non-accelerated segments become execution regions; accelerated ones
/// become offloading, suspension and finalization. Consecutive execution
/// regions are merged.
pub fn self_suspending_view(inst: &ProblemInstance, assign: &Assignment, task: usize) -> SelfSuspendingView {
    let ty = inst.core_type(assign.core_of[task]);
    let mut regions = Vec::new();
    let mut pending: Time = 0;
    for (j, (seg, &acc)) in inst.tasks[task]
        .segments
        .iter()
        .zip(&assign.accelerated[task])
        .enumerate()
    {
        if acc {
            pending += seg.offload_on(ty);
            regions.push(Region::Exec { wcet: pending });
            regions.push(Region::Suspension { segment: j });
            pending = seg.finalize_on(ty);
        } else {
            pending += seg.exec_on(ty);
        }
    }
    regions.push(Region::Exec { wcet: pending });
    let total_exec = regions
        .iter()
        .map(|r| match r {
            Region::Exec { wcet } => *wcet,
            Region::Suspension { .. } => 0,
        })
        .sum();
    let has_suspension = regions.len() > 1;
    SelfSuspendingView {
        task,
        regions,
        total_exec,
        has_suspension,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Core, ImplType, PlatformSpec, SegmentSpec, TaskSpec};
    use std::collections::BTreeMap;

    fn seg(exec: Time, off: Time, fin: Time, accel: Time) -> SegmentSpec {
        let m = |v| BTreeMap::from([("X".to_string(), v)]);
        SegmentSpec {
            impl_type: ImplType::CpuHwa,
            exec: m(exec),
            offload: m(off),
            finalize: m(fin),
            accel: Some(accel),
        }
    }

    fn inst(segments: Vec<SegmentSpec>) -> ProblemInstance {
        ProblemInstance {
            platform: PlatformSpec {
                core_types: vec!["X".into()],
                cores: vec![Core { id: "c".into(), core_type: "X".into() }],
                accelerator: true,
            },
            tasks: vec![TaskSpec { id: "t".into(), period: 100_000, deadline: 100_000, segments }],
            chains: vec![],
        }
    }

    fn assign(flags: Vec<bool>) -> Assignment {
        Assignment { core_of: vec![0], priority_of: vec![1], accelerated: vec![flags] }
    }

    #[test]
    fn third_of_three_accelerated() {
        let i = inst(vec![seg(10, 1, 2, 50), seg(20, 3, 4, 60), seg(30, 5, 6, 70)]);
        let v = self_suspending_view(&i, &assign(vec![false, false, true]), 0);
        assert_eq!(
            v.regions,
            [
                Region::Exec { wcet: 10 + 20 + 5 },
                Region::Suspension { segment: 2 },
                Region::Exec { wcet: 6 }
            ]
        );
        assert_eq!(v.total_exec, 41);
        assert!(v.has_suspension);
    }

    #[test]
    fn nothing_accelerated() {
        let i = inst(vec![seg(10, 1, 2, 50), seg(20, 3, 4, 60)]);
        let v = self_suspending_view(&i, &assign(vec![false, false]), 0);
        assert_eq!(v.regions, [Region::Exec { wcet: 30 }]);
        assert!(!v.has_suspension);
    }

    #[test]
    fn both_of_two_accelerated() {
        let i = inst(vec![seg(10, 1, 2, 50), seg(20, 3, 4, 60)]);
        let v = self_suspending_view(&i, &assign(vec![true, true]), 0);
        assert_eq!(
            v.regions,
            [
                Region::Exec { wcet: 1 },
                Region::Suspension { segment: 0 },
                Region::Exec { wcet: 2 + 3 },
                Region::Suspension { segment: 1 },
                Region::Exec { wcet: 4 }
            ]
        );
        assert_eq!(v.num_suspensions(), 2);
        assert_eq!(v.total_exec, 10);
    }

    #[test]
    fn unknown_task() {
        let i = inst(vec![seg(10, 1, 2, 50)]);
        assert_eq!(
            map_to_self_suspending(&i, &assign(vec![false]), "nope"),
            Err(AnalysisError::UnknownTask("nope".into()))
        );
    }
}
