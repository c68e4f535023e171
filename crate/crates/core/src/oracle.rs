//! Exhaustive search over every design point of a small instance.
//!
//! Each candidate is scored with the conservative checkpoint analysis, the
//! same math the optimization model encodes, so the optimum found here
//! must match the solver's optimum exactly.

use num_rational::Ratio;
use rayon::prelude::*;

use crate::analysis::{checkpoint_wcrt, chain_latency, AccelPolicy, JitterMode, TaskBounds};
use crate::milp::{optimize, MilpError, ObjectiveKind, SolveStatus, SolverBackend};
use crate::model::{Assignment, ImplType, ProblemInstance};

/// Exact objective value: integer microseconds for latency objectives,
/// a ratio of microseconds for the response-time ones.
pub type ObjectiveValue = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_tasks: usize,
    pub max_cores: usize,
    pub max_accelerable_segments: usize,
    pub hard_cap: u128,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_tasks: 6,
            max_cores: 4,
            max_accelerable_segments: 6,
            hard_cap: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("instance exceeds the enumeration budget: {0}")]
    BudgetExceeded(String),
}

/// Number of design points: `m^n * n! * 2^a` with `a` the segments whose
/// acceleration is a free choice. Saturates at `u128::MAX`.
pub fn candidate_count(inst: &ProblemInstance) -> u128 {
    let n = inst.num_tasks() as u32;
    let m = inst.num_cores() as u128;
    let free = free_segments(inst).len() as u32;
    let fact = (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k));
    m.checked_pow(n)
        .zip(fact)
        .and_then(|(a, b)| a.checked_mul(b))
        .and_then(|v| v.checked_mul(1u128.checked_shl(free)?))
        .unwrap_or(u128::MAX)
}

fn free_segments(inst: &ProblemInstance) -> Vec<(usize, usize)> {
    inst.tasks
        .iter()
        .enumerate()
        .flat_map(|(i, t)| {
            t.segments
                .iter()
                .enumerate()
                .filter(|(_, s)| s.impl_type == ImplType::CpuHwa)
                .map(move |(j, _)| (i, j))
        })
        .collect()
}

/// Random-access view of all candidates in lexicographic order: core map
/// first, then priority permutation, then acceleration choices.
#[derive(Debug, Clone)]
pub struct Candidates<'a> {
    inst: &'a ProblemInstance,
    free: Vec<(usize, usize)>,
    perms: u128,
    len: u128,
    next: u128,
}

impl<'a> Candidates<'a> {
    pub fn len(&self) -> u128 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The `idx`-th candidate.
    pub fn get(&self, idx: u128) -> Assignment {
        assert!(idx < self.len, "candidate index out of range");
        let inst = self.inst;
        let n = inst.num_tasks();
        let m = inst.num_cores() as u128;
        let bits = self.free.len();

        let mut accelerated: Vec<Vec<bool>> = inst
            .tasks
            .iter()
            .map(|t| t.segments.iter().map(|s| s.forced_accel()).collect())
            .collect();
        let acc_idx = idx & ((1u128 << bits) - 1);
        for (b, &(i, j)) in self.free.iter().enumerate() {
            accelerated[i][j] = (acc_idx >> (bits - 1 - b)) & 1 == 1;
        }

        let rest = idx >> bits;
        let mut perm_idx = rest % self.perms;
        let mut core_idx = rest / self.perms;

        let mut core_of = vec![0; n];
        for slot in core_of.iter_mut().rev() {
            *slot = (core_idx % m) as usize;
            core_idx /= m;
        }

        // Lehmer decoding of the permutation of 1..=n.
        let mut pool: Vec<u32> = (1..=n as u32).collect();
        let mut priority_of = Vec::with_capacity(n);
        for k in (0..n).rev() {
            let f: u128 = (1..=k as u128).product();
            let pick = (perm_idx / f) as usize;
            perm_idx %= f;
            priority_of.push(pool.remove(pick));
        }

        Assignment { core_of, priority_of, accelerated }
    }
}

impl Iterator for Candidates<'_> {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        (self.next < self.len).then(|| {
            self.next += 1;
            self.get(self.next - 1)
        })
    }
}

pub fn enumerate_candidates<'a>(
    inst: &'a ProblemInstance,
    budget: &EnumerationBudget,
) -> Result<Candidates<'a>, OracleError> {
    let free = free_segments(inst);
    let accelerable: usize = inst.tasks.iter().map(|t| t.accelerable_segments().count()).sum();
    let refuse = |why: String| Err(OracleError::BudgetExceeded(why));
    if inst.num_tasks() > budget.max_tasks {
        return refuse(format!("{} tasks > {}", inst.num_tasks(), budget.max_tasks));
    }
    if inst.num_cores() > budget.max_cores {
        return refuse(format!("{} cores > {}", inst.num_cores(), budget.max_cores));
    }
    if accelerable > budget.max_accelerable_segments {
        return refuse(format!(
            "{accelerable} accelerable segments > {}",
            budget.max_accelerable_segments
        ));
    }
    let len = candidate_count(inst);
    if len > budget.hard_cap {
        return refuse(format!("{len} candidates > {}", budget.hard_cap));
    }
    let perms = (1..=inst.num_tasks() as u128).product();
    Ok(Candidates { inst, free, perms, len, next: 0 })
}

/// Objective value of analyzed bounds, or `None` if a task is unschedulable.
pub fn objective_of(inst: &ProblemInstance, bounds: &TaskBounds, objective: ObjectiveKind) -> Option<ObjectiveValue> {
    if !bounds.schedulable() {
        return None;
    }
    let r = |i: usize| bounds.wcrt[i].expect("schedulable") as i128;
    let ratio = |i: usize| Ratio::new(r(i), inst.tasks[i].deadline as i128);
    let lat = || {
        inst.chains
            .iter()
            .map(|c| chain_latency(inst, &bounds.wcrt, c).ok().flatten().unwrap_or(0) as i128)
    };
    let n = inst.num_tasks();
    Some(match objective {
        ObjectiveKind::MinMaxLat => Ratio::from_integer(lat().max().unwrap_or(0)),
        ObjectiveKind::MinSumLat => Ratio::from_integer(lat().sum()),
        ObjectiveKind::MinMaxRt => (0..n).map(ratio).max().unwrap_or_else(|| Ratio::from_integer(0)),
        ObjectiveKind::MinSumRt => (0..n).map(ratio).sum(),
    })
}

/// Scores one design point with the conservative checkpoint analysis.
pub fn evaluate(
    inst: &ProblemInstance,
    assign: &Assignment,
    policy: AccelPolicy,
    objective: ObjectiveKind,
) -> Option<ObjectiveValue> {
    let bounds = checkpoint_wcrt(inst, assign, policy, JitterMode::Conservative);
    objective_of(inst, &bounds, objective)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOptimum {
    pub assignment: Assignment,
    pub value: ObjectiveValue,
    /// Position of the winner in the candidate order.
    pub index: u128,
    pub candidates: u128,
    pub feasible_candidates: u128,
}

/// Best design point by exhaustive search, ties broken by candidate order.
/// `Ok(None)` means no candidate is schedulable.
pub fn optimal_by_enumeration(
    inst: &ProblemInstance,
    policy: AccelPolicy,
    objective: ObjectiveKind,
    budget: &EnumerationBudget,
) -> Result<Option<OracleOptimum>, OracleError> {
    let cands = enumerate_candidates(inst, budget)?;
    let len = cands.len() as u64;
    let scored: Vec<(ObjectiveValue, u128)> = (0..len)
        .into_par_iter()
        .filter_map(|k| {
            let idx = k as u128;
            evaluate(inst, &cands.get(idx), policy, objective).map(|v| (v, idx))
        })
        .collect();
    let feasible = scored.len() as u128;
    Ok(scored.into_iter().min().map(|(value, index)| OracleOptimum {
        assignment: cands.get(index),
        value,
        index,
        candidates: cands.len(),
        feasible_candidates: feasible,
    }))
}

/// Oracle optimum next to the solver's, for one instance, policy and
/// objective.
#[derive(Debug, Clone)]
pub struct CrossCheck {
    pub oracle: Option<OracleOptimum>,
    pub milp_status: SolveStatus,
    pub milp_objective: Option<f64>,
    /// Exact objective of the solver's assignment under the analysis.
    pub milp_evaluated: Option<ObjectiveValue>,
    pub verify_error: Option<String>,
}

impl CrossCheck {
    /// Both sides infeasible, or the solver is optimal, its assignment
    /// verifies, scores exactly the oracle optimum under the analysis and
    /// its own objective value is within 1e-6 (relative) of it.
    pub fn agrees(&self) -> bool {
        match (&self.oracle, self.milp_status) {
            (None, SolveStatus::Infeasible) => true,
            (Some(o), SolveStatus::Optimal) => {
                let exact = self.milp_evaluated.as_ref() == Some(&o.value);
                let ov = ratio_to_f64(&o.value);
                let close = self
                    .milp_objective
                    .is_some_and(|v| (v - ov).abs() <= 1e-6 * ov.abs().max(1.0));
                exact && close && self.verify_error.is_none()
            }
            _ => false,
        }
    }

    /// One-line description of a disagreement.
    pub fn diff(&self) -> String {
        let oracle = match &self.oracle {
            Some(o) => format!("{} ({})", o.value, ratio_to_f64(&o.value)),
            None => "infeasible".into(),
        };
        let evaluated = self.milp_evaluated.map_or("-".into(), |v| v.to_string());
        let verify = self.verify_error.as_deref().unwrap_or("ok");
        format!(
            "oracle {oracle}; milp {} objective {:?}, re-analyzed {evaluated}, verification {verify}",
            self.milp_status, self.milp_objective
        )
    }
}

pub fn ratio_to_f64(v: &ObjectiveValue) -> f64 {
    *v.numer() as f64 / *v.denom() as f64
}

/// Solves `inst` both by enumeration and with the MILP backend.
pub fn cross_check(
    inst: &ProblemInstance,
    policy: AccelPolicy,
    objective: ObjectiveKind,
    budget: &EnumerationBudget,
    backend: &dyn SolverBackend,
    timeout_s: f64,
) -> Result<CrossCheck, CrossCheckError> {
    let oracle = optimal_by_enumeration(inst, policy, objective, budget)?;
    let (_, out) = optimize(inst, policy, objective, backend, timeout_s)?;
    let (milp_evaluated, verify_error) = match &out.verified {
        Some(Ok((d, _))) => (evaluate(inst, &d.assignment, policy, objective), None),
        Some(Err(e)) => (None, Some(e.to_string())),
        None => (None, None),
    };
    Ok(CrossCheck {
        oracle,
        milp_status: out.status,
        milp_objective: out.objective_value,
        milp_evaluated,
        verify_error,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum CrossCheckError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Milp(#[from] MilpError),
}
