use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::chain::chain_latency;
use super::SuspensionBounds;
use crate::model::ProblemInstance;
use crate::Time;

/// Raw per-task analysis results, indexed like `inst.tasks`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskBounds {
    /// `None` when the task misses its deadline or a bound diverged.
    pub wcrt: Vec<Option<Time>>,
    pub suspension: SuspensionBounds,
    /// Core-side WCET on the assigned core.
    pub exec: Vec<Time>,
}

impl TaskBounds {
    pub fn schedulable(&self) -> bool {
        self.wcrt.iter().all(Option::is_some)
    }
}

/// Analysis outcome keyed by task and chain ids. `null` marks a task
/// without a bound within its deadline (and chains containing one).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub wcrt_us: IndexMap<String, Option<Time>>,
    pub suspension_us: IndexMap<String, Option<Time>>,
    pub chain_latency_us: IndexMap<String, Option<Time>>,
    pub schedulable: bool,
    #[serde(skip)]
    pub bounds: Option<TaskBounds>,
}

impl AnalysisReport {
    pub fn from_bounds(inst: &ProblemInstance, bounds: TaskBounds) -> Self {
        let ids = || inst.tasks.iter().map(|t| t.id.clone());
        let wcrt_us = ids().zip(bounds.wcrt.iter().copied()).collect();
        let suspension_us = ids().zip(bounds.suspension.per_task.iter().copied()).collect();
        let chain_latency_us = inst
            .chains
            .iter()
            .map(|c| (c.id.clone(), chain_latency(inst, &bounds.wcrt, c).ok().flatten()))
            .collect();
        AnalysisReport {
            wcrt_us,
            suspension_us,
            chain_latency_us,
            schedulable: bounds.schedulable(),
            bounds: Some(bounds),
        }
    }

    pub fn wcrt(&self, task_id: &str) -> Option<Time> {
        self.wcrt_us.get(task_id).copied().flatten()
    }

    pub fn max_chain_latency(&self) -> Option<Time> {
        self.chain_latency_us.values().copied().try_fold(0, |m, l| l.map(|l| m.max(l)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
