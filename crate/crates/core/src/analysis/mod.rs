//! Response-time analysis for a fixed [`Assignment`](crate::Assignment).
//!
//! Each task is first viewed as a self-suspending task whose suspensions
//! are the accelerator processing phases ([`map_to_self_suspending`]).
//! Suspension lengths are bounded per accelerator policy
//! ([`suspension_bounds`]), and the per-core response time then follows
//! either from the classic fixed-point iteration ([`rta_fixed_point`]) or
//! from the checkpoint-based demand test ([`checkpoint_rta`]) that the
//! optimization model linearizes.

mod chain;
mod checkpoint;
mod mapping;
mod report;
mod rta;
mod suspension;

use serde::{Deserialize, Serialize};

pub use chain::chain_latency;
pub use checkpoint::{checkpoints, demand, demand_test, CheckpointSet, DemandPass};
pub use mapping::{map_to_self_suspending, self_suspending_view, Region, SelfSuspendingView};
pub use report::{AnalysisReport, TaskBounds};
pub use rta::{checkpoint_rta, checkpoint_wcrt, fixed_point_wcrt, rta_fixed_point};
pub use suspension::{
    npfp_blocking, npfp_phi, npfp_suspension_checkpointed, suspension_bounds, SuspensionBounds,
};

use crate::model::AssignmentError;

/// Arbitration policy of the shared accelerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AccelPolicy {
    /// Cyclic service, one segment per task per round.
    #[serde(rename = "rr")]
    RoundRobin,
    /// Non-preemptive, by task priority.
    #[serde(rename = "npfp")]
    NonPreemptiveFp,
    /// Baseline where requests never wait for each other.
    #[serde(rename = "nocontention")]
    NoContention,
}

impl AccelPolicy {
    pub const ALL: [AccelPolicy; 3] = [
        AccelPolicy::RoundRobin,
        AccelPolicy::NonPreemptiveFp,
        AccelPolicy::NoContention,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AccelPolicy::RoundRobin => "rr",
            AccelPolicy::NonPreemptiveFp => "npfp",
            AccelPolicy::NoContention => "nocontention",
        }
    }
}

impl std::fmt::Display for AccelPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AccelPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rr" => Ok(AccelPolicy::RoundRobin),
            "npfp" => Ok(AccelPolicy::NonPreemptiveFp),
            "nocontention" => Ok(AccelPolicy::NoContention),
            other => Err(format!("unknown policy {other:?} (expected rr, npfp or nocontention)")),
        }
    }
}

/// Release jitter attributed to suspending interferers in [`checkpoint_rta`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterMode {
    /// `R_h - C_h` from the analysis itself for the higher-priority tasks
    /// on the same core. Checkpoints are those of the conservative mode plus
    /// the ones these jitters add.
    Exact,
    /// `D_s - C_s^min` for every task that could suspend, independent of
    /// the assignment. This is the form the optimization model uses.
    Conservative,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("chain {chain:?} references unknown task {task:?}")]
    MissingTask { chain: String, task: String },
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
}
