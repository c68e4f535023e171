use super::checkpoint::{checkpoints, demand_test};
use super::report::{AnalysisReport, TaskBounds};
use super::suspension::{checkpointed_bounds, suspension_bounds};
use super::{AccelPolicy, JitterMode};
use crate::model::{Assignment, ProblemInstance};
use crate::{ceil_div, Time};

fn exec_times(inst: &ProblemInstance, assign: &Assignment) -> Vec<Time> {
    (0..inst.num_tasks()).map(|i| assign.core_wcet(inst, i)).collect()
}

/// Jitter `R_h - C_h` of an already analyzed interferer; zero when it
/// never suspends. `None` when the interferer itself has no bound.
fn self_jitter(assign: &Assignment, wcrt: &[Option<Time>], exec: &[Time], h: usize) -> Option<Time> {
    if assign.uses_accel(h) {
        wcrt[h].map(|r| r - exec[h])
    } else {
        Some(0)
    }
}

/// Higher-priority interferers on the same core as `(C_h, T_h, J_h)`,
/// or `None` if one of them is unbounded.
fn hp_interferers(
    inst: &ProblemInstance,
    assign: &Assignment,
    wcrt: &[Option<Time>],
    exec: &[Time],
    i: usize,
) -> Option<Vec<(Time, Time, Time)>> {
    assign
        .hp_on_core(i)
        .into_iter()
        .map(|h| self_jitter(assign, wcrt, exec, h).map(|j| (exec[h], inst.tasks[h].period, j)))
        .collect()
}

/// Per-task WCRTs from the fixed-point iteration
/// `R = C + S + sum ceil((R + J_h) / T_h) * C_h`.
pub fn fixed_point_wcrt(inst: &ProblemInstance, assign: &Assignment, policy: AccelPolicy) -> TaskBounds {
    let exec = exec_times(inst, assign);
    let suspension = suspension_bounds(inst, assign, policy);
    let mut wcrt = vec![None; inst.num_tasks()];
    for i in assign.by_decreasing_priority() {
        let d = inst.tasks[i].deadline;
        let (Some(s), Some(hp)) = (suspension.per_task[i], hp_interferers(inst, assign, &wcrt, &exec, i)) else {
            continue;
        };
        let mut r = exec[i] + s;
        wcrt[i] = loop {
            if r > d {
                break None;
            }
            let next = exec[i] + s + hp.iter().map(|&(c, t, j)| ceil_div(r + j, t) * c).sum::<Time>();
            if next <= r {
                break Some(r);
            }
            r = next;
        };
    }
    TaskBounds { wcrt, suspension, exec }
}

/// Per-task WCRTs from the checkpoint demand test. The bound is the demand
/// at the first passing checkpoint.
pub fn checkpoint_wcrt(
    inst: &ProblemInstance,
    assign: &Assignment,
    policy: AccelPolicy,
    mode: JitterMode,
) -> TaskBounds {
    let n = inst.num_tasks();
    let exec = exec_times(inst, assign);
    let suspension = match mode {
        JitterMode::Exact => suspension_bounds(inst, assign, policy),
        JitterMode::Conservative => checkpointed_bounds(inst, assign, policy),
    };
    let cons_jitter: Vec<Time> = (0..n).map(|s| inst.conservative_jitter(s)).collect();
    let mut wcrt = vec![None; n];
    for i in assign.by_decreasing_priority() {
        let d = inst.tasks[i].deadline;
        let Some(s) = suspension.per_task[i] else {
            continue;
        };
        let mut sources: Vec<(Time, Time)> = (0..n)
            .filter(|&s| s != i)
            .map(|s| (inst.tasks[s].period, cons_jitter[s]))
            .collect();
        let demand_side = match mode {
            // Exact mode keeps the conservative checkpoints and adds those of
            // its own interferers, so it can pass wherever conservative mode
            // passes and its bound is never the larger one.
            JitterMode::Exact => {
                let Some(hp) = hp_interferers(inst, assign, &wcrt, &exec, i) else {
                    continue;
                };
                sources.extend(hp.iter().map(|&(_, t, j)| (t, j)));
                hp
            }
            JitterMode::Conservative => assign
                .hp_on_core(i)
                .into_iter()
                .map(|h| (exec[h], inst.tasks[h].period, cons_jitter[h]))
                .collect(),
        };
        let points = checkpoints(d, &sources);
        wcrt[i] = demand_test(exec[i], s, &points, &demand_side).map(|p| p.demand);
    }
    TaskBounds { wcrt, suspension, exec }
}

pub fn rta_fixed_point(inst: &ProblemInstance, assign: &Assignment, policy: AccelPolicy) -> AnalysisReport {
    AnalysisReport::from_bounds(inst, fixed_point_wcrt(inst, assign, policy))
}

pub fn checkpoint_rta(
    inst: &ProblemInstance,
    assign: &Assignment,
    policy: AccelPolicy,
    mode: JitterMode,
) -> AnalysisReport {
    AnalysisReport::from_bounds(inst, checkpoint_wcrt(inst, assign, policy, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_waters, builtin_waters_p15, Core, ImplType, PlatformSpec, SegmentSpec, TaskSpec};
    use std::collections::BTreeMap;

    fn x(v: Time) -> BTreeMap<String, Time> {
        BTreeMap::from([("X".to_string(), v)])
    }

    fn task(id: &str, period: Time, seg: SegmentSpec) -> TaskSpec {
        TaskSpec { id: id.into(), period, deadline: period, segments: vec![seg] }
    }

    fn one_core(tasks: Vec<TaskSpec>) -> ProblemInstance {
        ProblemInstance {
            platform: PlatformSpec {
                core_types: vec!["X".into()],
                cores: vec![Core { id: "0".into(), core_type: "X".into() }],
                accelerator: true,
            },
            tasks,
            chains: vec![],
        }
    }

    #[test]
    fn single_task() {
        let inst = one_core(vec![task("t", 10_000, SegmentSpec::cpu([("X".to_string(), 2_000)]))]);
        let a = Assignment::trivial(&inst);
        for p in AccelPolicy::ALL {
            assert_eq!(fixed_point_wcrt(&inst, &a, p).wcrt, [Some(2_000)]);
            for m in [JitterMode::Exact, JitterMode::Conservative] {
                assert_eq!(checkpoint_wcrt(&inst, &a, p, m).wcrt, [Some(2_000)]);
            }
        }
    }

    #[test]
    fn hp_lp_pair() {
        let inst = one_core(vec![
            task("hp", 4_000, SegmentSpec::cpu([("X".to_string(), 1_000)])),
            task("lp", 10_000, SegmentSpec::cpu([("X".to_string(), 2_000)])),
        ]);
        let a = Assignment::trivial(&inst);
        let r = fixed_point_wcrt(&inst, &a, AccelPolicy::RoundRobin);
        assert_eq!(r.wcrt, [Some(1_000), Some(3_000)]);
    }

    #[test]
    fn hp_lp_pair_with_suspension() {
        // The low-priority task suspends for 1 000 with no competitor on
        // the accelerator.
        let lp = SegmentSpec {
            impl_type: ImplType::Hwa,
            exec: BTreeMap::new(),
            offload: x(2_000),
            finalize: x(0),
            accel: Some(1_000),
        };
        let inst = one_core(vec![
            task("hp", 4_000, SegmentSpec::cpu([("X".to_string(), 1_000)])),
            task("lp", 10_000, lp),
        ]);
        let a = Assignment::trivial(&inst);
        for p in AccelPolicy::ALL {
            let r = fixed_point_wcrt(&inst, &a, p);
            assert_eq!(r.wcrt, [Some(1_000), Some(4_000)], "{p}");
            assert_eq!(r.suspension.per_task, [Some(0), Some(1_000)]);
        }
    }

    #[test]
    fn overload_is_unschedulable() {
        let inst = one_core(vec![
            task("a", 4_000, SegmentSpec::cpu([("X".to_string(), 3_000)])),
            task("b", 4_000, SegmentSpec::cpu([("X".to_string(), 2_000)])),
        ]);
        let a = Assignment::trivial(&inst);
        let r = rta_fixed_point(&inst, &a, AccelPolicy::RoundRobin);
        assert!(!r.schedulable);
        assert_eq!(r.wcrt("a"), Some(3_000));
        assert_eq!(r.wcrt("b"), None);
    }

    #[test]
    fn waters_published_rr_schedulable() {
        let w = builtin_waters_p15();
        let a = Assignment::waters_published_rr(&w).unwrap();
        let cons = checkpoint_rta(&w, &a, AccelPolicy::RoundRobin, JitterMode::Conservative);
        assert!(cons.schedulable, "{cons:?}");
        let fp = rta_fixed_point(&w, &a, AccelPolicy::RoundRobin);
        assert!(fp.schedulable);
        for (id, r) in &fp.wcrt_us {
            assert!(cons.wcrt(id) >= *r, "{id}");
        }
        assert_eq!(fp.chain_latency_us["C5"], Some(761_584));
        assert_eq!(cons.chain_latency_us["C5"], Some(761_584));
    }

    #[test]
    fn tabulated_waters_has_no_schedulable_point() {
        let w = builtin_waters();
        let a = Assignment::waters_published_rr(&w).unwrap();
        let r = rta_fixed_point(&w, &a, AccelPolicy::RoundRobin);
        assert_eq!(r.wcrt("Planner"), None);
    }

    #[test]
    fn waters_everything_on_one_core() {
        let w = builtin_waters();
        let a = Assignment::trivial(&w);
        for p in AccelPolicy::ALL {
            assert!(!rta_fixed_point(&w, &a, p).schedulable);
            assert!(!checkpoint_rta(&w, &a, p, JitterMode::Conservative).schedulable);
        }
    }
}
