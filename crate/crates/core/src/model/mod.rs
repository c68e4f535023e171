//! Platform, task and chain descriptions.
//!
//! A [`ProblemInstance`] is the complete input of every analysis and
//! optimization in this crate. It serializes to a JSON document whose
//! layout is fixed (unknown keys are rejected):
//!
//! ```json
//! {
//!   "platform": {"core_types": ["A57"], "cores": [{"id": "0", "type": "A57"}], "accelerator": true},
//!   "tasks": [{"id": "t", "period_us": 10000, "deadline_us": 10000,
//!              "segments": [{"impl": "cpu_hwa", "exec_us": {"A57": 900},
//!                            "offload_us": {"A57": 100}, "finalize_us": {"A57": 50},
//!                            "accel_us": 300}]}],
//!   "chains": [{"id": "c", "tasks": ["t"]}]
//! }
//! ```

mod assignment;
mod scale;
mod validate;
mod waters;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Time;

pub use assignment::{Assignment, AssignmentDoc, AssignmentError};
pub use scale::{parse_factor, scale_wcets, Factor};
pub use validate::{validate_instance, validation_warnings, Violation};
pub use waters::{builtin_instance, builtin_waters, builtin_waters_p15, BUILTIN_NAMES, WATERS_CHAINS, WATERS_PUBLISHED_RR};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed instance document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid instance:\n{}", fmt_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("scaling factor must be positive, got {0}")]
    NonPositiveFactor(String),
    #[error("cannot parse scaling factor {0:?}")]
    BadFactor(String),
}

fn fmt_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Where a segment may run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplType {
    /// Only a core implementation exists.
    Cpu,
    /// Only an accelerator implementation exists.
    Hwa,
    /// Both implementations exist; the designer picks one.
    CpuHwa,
}

impl ImplType {
    pub fn has_cpu_impl(self) -> bool {
        matches!(self, ImplType::Cpu | ImplType::CpuHwa)
    }

    pub fn has_accel_impl(self) -> bool {
        matches!(self, ImplType::Hwa | ImplType::CpuHwa)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Core {
    pub id: String,
    #[serde(rename = "type")]
    pub core_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformSpec {
    pub core_types: Vec<String>,
    pub cores: Vec<Core>,
    /// Whether the platform houses the (single) hardware accelerator.
    pub accelerator: bool,
}

/// One sequential code fragment of a task.
///
/// WCET maps are keyed by core type name. Which maps must be populated
/// depends on [`ImplType`]; see [`validate_instance`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    #[serde(rename = "impl")]
    pub impl_type: ImplType,
    /// Processing phase on a core, when not accelerated.
    #[serde(rename = "exec_us", default, skip_serializing_if = "BTreeMap::is_empty")]
    pub exec: BTreeMap<String, Time>,
    /// Offloading phase on a core, when accelerated.
    #[serde(rename = "offload_us", default, skip_serializing_if = "BTreeMap::is_empty")]
    pub offload: BTreeMap<String, Time>,
    /// Finalization phase on a core, when accelerated.
    #[serde(rename = "finalize_us", default, skip_serializing_if = "BTreeMap::is_empty")]
    pub finalize: BTreeMap<String, Time>,
    /// Processing phase on the accelerator.
    #[serde(rename = "accel_us", default, skip_serializing_if = "Option::is_none")]
    pub accel: Option<Time>,
}

impl SegmentSpec {
    pub fn cpu(exec: impl IntoIterator<Item = (String, Time)>) -> Self {
        SegmentSpec {
            impl_type: ImplType::Cpu,
            exec: exec.into_iter().collect(),
            offload: BTreeMap::new(),
            finalize: BTreeMap::new(),
            accel: None,
        }
    }

    // Missing map entries read as zero. Callers are expected to run
    // `validate_instance` first.

    pub fn exec_on(&self, core_type: &str) -> Time {
        self.exec.get(core_type).copied().unwrap_or(0)
    }

    pub fn offload_on(&self, core_type: &str) -> Time {
        self.offload.get(core_type).copied().unwrap_or(0)
    }

    pub fn finalize_on(&self, core_type: &str) -> Time {
        self.finalize.get(core_type).copied().unwrap_or(0)
    }

    /// Core-side WCET when accelerated: offloading plus finalization.
    pub fn accel_side_on(&self, core_type: &str) -> Time {
        self.offload_on(core_type) + self.finalize_on(core_type)
    }

    /// WCET of the segment on a core of the given type.
    pub fn core_wcet(&self, core_type: &str, accelerated: bool) -> Time {
        if accelerated {
            self.accel_side_on(core_type)
        } else {
            self.exec_on(core_type)
        }
    }

    pub fn accel_wcet(&self) -> Time {
        self.accel.unwrap_or(0)
    }

    pub fn accelerable(&self) -> bool {
        self.impl_type.has_accel_impl()
    }

    pub fn forced_accel(&self) -> bool {
        self.impl_type == ImplType::Hwa
    }

    /// Smallest core-side WCET over the allowed implementations.
    pub fn min_core_wcet(&self, core_type: &str) -> Time {
        match self.impl_type {
            ImplType::Cpu => self.exec_on(core_type),
            ImplType::Hwa => self.accel_side_on(core_type),
            ImplType::CpuHwa => self.exec_on(core_type).min(self.accel_side_on(core_type)),
        }
    }

    /// Largest core-side WCET over the allowed implementations.
    pub fn max_core_wcet(&self, core_type: &str) -> Time {
        match self.impl_type {
            ImplType::Cpu => self.exec_on(core_type),
            ImplType::Hwa => self.accel_side_on(core_type),
            ImplType::CpuHwa => self.exec_on(core_type).max(self.accel_side_on(core_type)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: String,
    #[serde(rename = "period_us")]
    pub period: Time,
    #[serde(rename = "deadline_us")]
    pub deadline: Time,
    pub segments: Vec<SegmentSpec>,
}

impl TaskSpec {
    pub fn accelerable(&self) -> bool {
        self.segments.iter().any(SegmentSpec::accelerable)
    }

    pub fn accelerable_segments(&self) -> impl Iterator<Item = usize> + '_ {
        self.segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.accelerable())
            .map(|(j, _)| j)
    }

    /// Smallest accelerator-side WCET the task can have when at least one
    /// segment is offloaded: the forced segments if any exist, otherwise
    /// the cheapest optional one. `None` when nothing is accelerable.
    pub fn min_accel_wcet(&self) -> Option<Time> {
        let forced: Vec<Time> = self
            .segments
            .iter()
            .filter(|s| s.forced_accel())
            .map(SegmentSpec::accel_wcet)
            .collect();
        if !forced.is_empty() {
            return Some(forced.iter().sum());
        }
        self.segments
            .iter()
            .filter(|s| s.accelerable())
            .map(SegmentSpec::accel_wcet)
            .min()
    }

    /// Sum of accelerator WCETs of all accelerable segments.
    pub fn max_accel_wcet(&self) -> Time {
        self.segments
            .iter()
            .filter(|s| s.accelerable())
            .map(SegmentSpec::accel_wcet)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub id: String,
    pub tasks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInstance {
    pub platform: PlatformSpec,
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub chains: Vec<ChainSpec>,
}

impl ProblemInstance {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }

    /// Reads and validates an instance document.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let inst = Self::from_json(&text)?;
        inst.check()?;
        Ok(inst)
    }

    /// `validate_instance` as a `Result`.
    pub fn check(&self) -> Result<(), ModelError> {
        let violations = validate_instance(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(violations))
        }
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn num_cores(&self) -> usize {
        self.platform.cores.len()
    }

    pub fn task_index(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    pub fn core_index(&self, id: &str) -> Option<usize> {
        self.platform.cores.iter().position(|c| c.id == id)
    }

    pub fn core_type(&self, core: usize) -> &str {
        &self.platform.cores[core].core_type
    }

    /// Core types that at least one core actually has, in declaration order.
    pub fn used_core_types(&self) -> Vec<&str> {
        self.platform
            .core_types
            .iter()
            .filter(|t| self.platform.cores.iter().any(|c| &c.core_type == *t))
            .map(String::as_str)
            .collect()
    }

    /// Chain members as task indices. Unknown ids are skipped.
    pub fn chain_tasks(&self, chain: usize) -> Vec<usize> {
        self.chains[chain]
            .tasks
            .iter()
            .filter_map(|id| self.task_index(id))
            .collect()
    }

    /// Smallest core-side WCET of a task over every core type present
    /// and every allowed acceleration choice.
    pub fn min_wcet(&self, task: usize) -> Time {
        let t = &self.tasks[task];
        self.used_core_types()
            .into_iter()
            .map(|ty| t.segments.iter().map(|s| s.min_core_wcet(ty)).sum())
            .min()
            .unwrap_or(0)
    }

    /// Largest core-side WCET of a task over every core type present and
    /// every allowed acceleration choice.
    pub fn max_wcet(&self, task: usize) -> Time {
        let t = &self.tasks[task];
        self.used_core_types()
            .into_iter()
            .map(|ty| t.segments.iter().map(|s| s.max_core_wcet(ty)).sum())
            .max()
            .unwrap_or(0)
    }

    /// Release jitter assumed for a task when its configuration is not yet
    /// known: `D - C_min` for tasks that may suspend, zero otherwise.
    pub fn conservative_jitter(&self, task: usize) -> Time {
        let t = &self.tasks[task];
        if t.accelerable() {
            t.deadline.saturating_sub(self.min_wcet(task))
        } else {
            0
        }
    }

    /// Accelerator-side counterpart of [`Self::conservative_jitter`]:
    /// `D - C_min^H` for accelerable tasks.
    pub fn conservative_accel_jitter(&self, task: usize) -> Option<Time> {
        let t = &self.tasks[task];
        t.min_accel_wcet().map(|c| t.deadline.saturating_sub(c))
    }

    pub fn hyperperiod(&self) -> Option<Time> {
        self.tasks.iter().try_fold(1u64, |acc, t| {
            let g = num_integer::gcd(acc, t.period);
            (acc / g).checked_mul(t.period)
        })
    }
}
