use serde::Serialize;

use crate::model::ProblemInstance;
use crate::{ceil_div, Time};

/// Instance-wide big-M envelopes, one per constraint family. The encoder
/// uses `priority` directly and tighter row-local values elsewhere; the
/// others are reported as upper bounds on those.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct BigM {
    /// Response-time rows: worst demand any checkpoint can see.
    pub time: Time,
    /// Priority index rows.
    pub priority: Time,
    /// WCET and interference rows.
    pub wcet: Time,
    /// Accelerator-side rows (blocking, interference, suspension).
    pub suspension: Time,
}

pub fn big_m(inst: &ProblemInstance) -> BigM {
    let n = inst.num_tasks();
    let max_d = inst.tasks.iter().map(|t| t.deadline).max().unwrap_or(0);
    let horizon = 2 * max_d;
    let time = max_d
        + (0..n)
            .map(|s| inst.max_wcet(s) * ceil_div(horizon, inst.tasks[s].period))
            .sum::<Time>();
    let wcet = (0..n).map(|s| inst.max_wcet(s)).max().unwrap_or(0);
    let max_eh = inst
        .tasks
        .iter()
        .flat_map(|t| t.segments.iter().map(|s| s.accel.unwrap_or(0)))
        .max()
        .unwrap_or(0);
    let suspension = max_d
        + 2 * max_eh
        + inst
            .tasks
            .iter()
            .map(|t| t.max_accel_wcet() * ceil_div(horizon, t.period))
            .sum::<Time>();
    BigM { time, priority: n as Time, wcet, suspension }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_waters, Core, PlatformSpec, SegmentSpec, TaskSpec};

    #[test]
    fn priority_m_is_task_count() {
        assert_eq!(big_m(&builtin_waters()).priority, 9);
    }

    #[test]
    fn single_task_envelope() {
        let inst = ProblemInstance {
            platform: PlatformSpec {
                core_types: vec!["X".into()],
                cores: vec![Core { id: "0".into(), core_type: "X".into() }],
                accelerator: false,
            },
            tasks: vec![TaskSpec {
                id: "t".into(),
                period: 10_000,
                deadline: 10_000,
                segments: vec![SegmentSpec::cpu([("X".to_string(), 2_000)])],
            }],
            chains: vec![],
        };
        let m = big_m(&inst);
        // D + C * ceil(2D / T)
        assert_eq!(m.time, 10_000 + 2 * 2_000);
        assert_eq!(m.wcet, 2_000);
    }

    #[test]
    fn waters_time_m_is_moderate() {
        let m = big_m(&builtin_waters());
        assert!(m.time > 400_000 && m.time < 1 << 40, "{m:?}");
        assert!(m.suspension < 1 << 40);
    }
}
