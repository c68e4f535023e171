use std::collections::BTreeMap;

use super::checkpoint::{checkpoints, demand_test};
use super::AccelPolicy;
use crate::model::{Assignment, ProblemInstance};
use crate::{ceil_div, Time};

/// Suspension bounds of every offloaded segment and their per-task sums.
/// `None` marks a bound that could not be established within the task's
/// deadline, which makes the task unschedulable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SuspensionBounds {
    /// Per task, offloaded segment index to its bound.
    pub per_segment: Vec<BTreeMap<usize, Option<Time>>>,
    pub per_task: Vec<Option<Time>>,
}

impl SuspensionBounds {
    fn from_segments(per_segment: Vec<BTreeMap<usize, Option<Time>>>) -> Self {
        let per_task = per_segment
            .iter()
            .map(|segs| segs.values().try_fold(0, |acc, s| s.map(|s| acc + s)))
            .collect();
        SuspensionBounds { per_segment, per_task }
    }
}

/// Largest offloaded accelerator WCET among tasks of strictly lower
/// priority than `task`, on any core.
pub fn npfp_blocking(inst: &ProblemInstance, assign: &Assignment, task: usize) -> Time {
    (0..inst.num_tasks())
        .filter(|&s| s != task && assign.higher_priority(task, s))
        .map(|s| assign.longest_accel_segment(inst, s))
        .max()
        .unwrap_or(0)
}

/// Least positive solution of `Phi = B + sum ceil((Phi + J_h) / T_h) * G_h`
/// over interferers `(G_h, T_h, J_h)`, or `None` once it exceeds `cap`.
pub fn npfp_phi(b: Time, interferers: &[(Time, Time, Time)], cap: Time) -> Option<Time> {
    let active = interferers.iter().any(|&(g, _, _)| g > 0);
    let mut phi = if active { b.max(1) } else { b };
    loop {
        if phi > cap {
            return None;
        }
        let next = b + interferers
            .iter()
            .map(|&(g, t, j)| ceil_div(phi + j, t) * g)
            .sum::<Time>();
        if next <= phi {
            return Some(phi);
        }
        phi = next;
    }
}

/// Per-segment suspension bounds for the given policy.
///
/// Round-robin: own processing plus the longest offloaded segment of every
/// other task. Non-preemptive FP: own processing plus the accelerator
/// busy window made of one lower-priority blocking segment and all
/// higher-priority offloads. No contention: own processing only.
pub fn suspension_bounds(inst: &ProblemInstance, assign: &Assignment, policy: AccelPolicy) -> SuspensionBounds {
    let n = inst.num_tasks();
    let longest: Vec<Time> = (0..n).map(|s| assign.longest_accel_segment(inst, s)).collect();
    let per_segment = (0..n)
        .map(|i| {
            let own = |j: usize| inst.tasks[i].segments[j].accel_wcet();
            match policy {
                AccelPolicy::NoContention => {
                    assign.accelerated_segments(i).map(|j| (j, Some(own(j)))).collect()
                }
                AccelPolicy::RoundRobin => {
                    let others: Time = (0..n).filter(|&s| s != i).map(|s| longest[s]).sum();
                    assign
                        .accelerated_segments(i)
                        .map(|j| (j, Some(own(j) + others)))
                        .collect()
                }
                AccelPolicy::NonPreemptiveFp => {
                    if !assign.uses_accel(i) {
                        return BTreeMap::new();
                    }
                    let b = npfp_blocking(inst, assign, i);
                    let hp: Vec<(Time, Time, Time)> = (0..n)
                        .filter(|&h| h != i && assign.higher_priority(h, i) && assign.uses_accel(h))
                        .map(|h| {
                            let g = assign.accel_wcet(inst, h);
                            let t = &inst.tasks[h];
                            (g, t.period, t.deadline.saturating_sub(g))
                        })
                        .collect();
                    let phi = npfp_phi(b, &hp, inst.tasks[i].deadline);
                    assign
                        .accelerated_segments(i)
                        .map(|j| (j, phi.map(|p| p + own(j))))
                        .collect()
                }
            }
        })
        .collect();
    SuspensionBounds::from_segments(per_segment)
}

/// Checkpointed form of the non-preemptive FP bound, with accelerator
/// jitters `D_s - C_s^{min,H}` for every task that could offload and the
/// checkpoint set built from all of them. Returns the segment's own
/// processing time plus the busy-window demand at the first passing
/// checkpoint, or `None` if no checkpoint passes.
pub fn npfp_suspension_checkpointed(
    inst: &ProblemInstance,
    assign: &Assignment,
    task: usize,
    segment: usize,
) -> Option<Time> {
    let n = inst.num_tasks();
    let others: Vec<usize> = (0..n)
        .filter(|&s| s != task && inst.tasks[s].accelerable())
        .collect();
    let jitter = |s: usize| inst.conservative_accel_jitter(s).unwrap_or(0);
    let points = checkpoints(
        inst.tasks[task].deadline,
        &others
            .iter()
            .map(|&s| (inst.tasks[s].period, jitter(s)))
            .collect::<Vec<_>>(),
    );
    let hp: Vec<(Time, Time, Time)> = others
        .iter()
        .filter(|&&s| assign.higher_priority(s, task))
        .map(|&s| (assign.accel_wcet(inst, s), inst.tasks[s].period, jitter(s)))
        .collect();
    let b = npfp_blocking(inst, assign, task);
    demand_test(b, 0, &points, &hp).map(|p| p.demand + inst.tasks[task].segments[segment].accel_wcet())
}

/// Per-segment bounds as used by the conservative checkpoint analysis.
pub(crate) fn checkpointed_bounds(
    inst: &ProblemInstance,
    assign: &Assignment,
    policy: AccelPolicy,
) -> SuspensionBounds {
    match policy {
        AccelPolicy::NonPreemptiveFp => SuspensionBounds::from_segments(
            (0..inst.num_tasks())
                .map(|i| {
                    assign
                        .accelerated_segments(i)
                        .map(|j| (j, npfp_suspension_checkpointed(inst, assign, i, j)))
                        .collect()
                })
                .collect(),
        ),
        _ => suspension_bounds(inst, assign, policy),
    }
}
