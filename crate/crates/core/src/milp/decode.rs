use super::{MilpError, MilpModel, SolverSolution};
use crate::analysis::{checkpoint_rta, AccelPolicy, AnalysisReport, JitterMode};
use crate::model::{Assignment, AssignmentError, ProblemInstance};

/// Assignment read back from a solver solution, with the solver's own
/// claims about response times and suspensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedSolution {
    pub assignment: Assignment,
    pub claimed_wcrt: Vec<f64>,
    pub claimed_suspension: Vec<f64>,
    pub objective_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error("task {task} misses its deadline under the analysis")]
    Unschedulable { task: String },
    #[error("task {task}: analysis gives {recomputed} us but the solver claimed {claimed} us")]
    ClaimTooLow { task: String, recomputed: u64, claimed: f64 },
}

fn bit(v: f64) -> bool {
    v >= 0.5
}

/// Rounds binaries at 0.5 and rebuilds core map, priorities and
/// acceleration choices.
pub fn decode(model: &MilpModel, solution: &SolverSolution) -> Result<DecodedSolution, MilpError> {
    if !solution.status.has_solution() {
        return Err(MilpError::BadSolution(format!("no solution to decode ({})", solution.status)));
    }
    let val = |v: usize| solution.values.get(v).copied().unwrap_or(0.0);
    let idx = &model.index;
    let n = idx.x.len();

    let mut core_of = Vec::with_capacity(n);
    for (i, xs) in idx.x.iter().enumerate() {
        let on: Vec<usize> = (0..xs.len()).filter(|&k| bit(val(xs[k]))).collect();
        match on.as_slice() {
            [k] => core_of.push(*k),
            _ => {
                return Err(MilpError::BadSolution(format!(
                    "task {i} is mapped to {} cores after rounding",
                    on.len()
                )))
            }
        }
    }

    let mut priority_of = Vec::with_capacity(n);
    for (i, ps) in idx.pr.iter().enumerate() {
        let on: Vec<usize> = (0..ps.len()).filter(|&p| bit(val(ps[p]))).collect();
        match on.as_slice() {
            [p] => priority_of.push(*p as u32 + 1),
            _ => {
                return Err(MilpError::BadSolution(format!(
                    "task {i} has {} priority levels after rounding",
                    on.len()
                )))
            }
        }
    }
    let mut seen = vec![false; n];
    for &p in &priority_of {
        if std::mem::replace(&mut seen[p as usize - 1], true) {
            return Err(MilpError::BadSolution(format!("priority level {p} is used twice")));
        }
    }

    let accelerated = idx.a.iter().map(|segs| segs.iter().map(|&v| bit(val(v))).collect()).collect();
    Ok(DecodedSolution {
        assignment: Assignment { core_of, priority_of, accelerated },
        claimed_wcrt: idx.r.iter().map(|&v| val(v)).collect(),
        claimed_suspension: idx.s.iter().map(|&v| val(v)).collect(),
        objective_value: solution.objective_value,
    })
}

/// Re-analyzes the decoded assignment with the conservative checkpoint
/// analysis. Every task must meet its deadline and no bound may exceed
/// the solver's claim by more than 1 us.
pub fn verify_solution(
    inst: &ProblemInstance,
    policy: AccelPolicy,
    decoded: &DecodedSolution,
) -> Result<AnalysisReport, VerifyError> {
    decoded.assignment.validate(inst)?;
    let report = checkpoint_rta(inst, &decoded.assignment, policy, JitterMode::Conservative);
    for (i, t) in inst.tasks.iter().enumerate() {
        let Some(r) = report.wcrt(&t.id) else {
            return Err(VerifyError::Unschedulable { task: t.id.clone() });
        };
        let claimed = decoded.claimed_wcrt.get(i).copied().unwrap_or(f64::INFINITY);
        if r as f64 > claimed + 1.0 {
            return Err(VerifyError::ClaimTooLow { task: t.id.clone(), recomputed: r, claimed });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{build_model, ObjectiveKind, SolveStatus};
    use crate::model::{Core, PlatformSpec, SegmentSpec, TaskSpec};
    use std::collections::BTreeMap;

    fn one_task() -> ProblemInstance {
        ProblemInstance {
            platform: PlatformSpec {
                core_types: vec!["X".into()],
                cores: vec![
                    Core { id: "0".into(), core_type: "X".into() },
                    Core { id: "1".into(), core_type: "X".into() },
                ],
                accelerator: false,
            },
            tasks: vec![TaskSpec {
                id: "t".into(),
                period: 10_000,
                deadline: 10_000,
                segments: vec![SegmentSpec::cpu(BTreeMap::from([("X".to_string(), 2_000)]))],
            }],
            chains: vec![],
        }
    }

    fn solution(model: &MilpModel, set: &[(&str, f64)]) -> SolverSolution {
        let mut values = vec![0.0; model.num_vars()];
        for &(name, v) in set {
            values[model.var(name).unwrap()] = v;
        }
        SolverSolution { status: SolveStatus::Optimal, values, objective_value: None, wall_time_s: 0.0 }
    }

    #[test]
    fn rounding_near_one() {
        let inst = one_task();
        let m = build_model(&inst, AccelPolicy::RoundRobin, ObjectiveKind::MinSumRt).unwrap();
        let s = solution(&m, &[("x_0_1", 0.9999), ("x_0_0", 0.0001), ("pr_0_1", 1.0), ("R_0", 2_000.0)]);
        let d = decode(&m, &s).unwrap();
        assert_eq!(d.assignment.core_of, [1]);
        assert_eq!(d.assignment.priority_of, [1]);
        let report = verify_solution(&inst, AccelPolicy::RoundRobin, &d).unwrap();
        assert_eq!(report.wcrt("t"), Some(2_000));
    }

    #[test]
    fn two_cores_rejected() {
        let inst = one_task();
        let m = build_model(&inst, AccelPolicy::RoundRobin, ObjectiveKind::MinSumRt).unwrap();
        let s = solution(&m, &[("x_0_1", 0.7), ("x_0_0", 0.6), ("pr_0_1", 1.0)]);
        assert!(matches!(decode(&m, &s), Err(MilpError::BadSolution(_))));
    }

    #[test]
    fn low_claim_rejected() {
        let inst = one_task();
        let m = build_model(&inst, AccelPolicy::RoundRobin, ObjectiveKind::MinSumRt).unwrap();
        let s = solution(&m, &[("x_0_0", 1.0), ("pr_0_1", 1.0), ("R_0", 1_500.0)]);
        let d = decode(&m, &s).unwrap();
        assert!(matches!(
            verify_solution(&inst, AccelPolicy::RoundRobin, &d),
            Err(VerifyError::ClaimTooLow { recomputed: 2_000, .. })
        ));
    }
}
