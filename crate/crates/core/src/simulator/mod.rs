//! Discrete-event execution of a fixed assignment.
//!
//! Cores run partitioned preemptive fixed priority. Offloaded segments run
//! their offloading phase on the core, wait for and run on the shared
//! accelerator while the task is suspended, then finalize on the core.
//! Under [`AccelPolicy::NoContention`] every request is served at once, as
//! if each task had its own accelerator.
//!
//! The simulator can show that an analytical bound is wrong; it cannot show
//! that one is right.

mod engine;
mod trace;

use serde::{Deserialize, Serialize};

use crate::analysis::AccelPolicy;
use crate::model::{AssignmentError, ProblemInstance};
use crate::Time;

pub use engine::simulate;
pub use trace::{check_trace, EventKind, JobRecord, SimTrace, TraceEvent, TraceViolation};

/// Default horizon cap when the hyperperiod is longer (or overflows).
pub const DEFAULT_HORIZON_CAP: Time = 20_000_000;

/// Upper bound on released jobs in one run.
pub const MAX_JOBS: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReleasePattern {
    /// All tasks release at 0 and every phase runs for its WCET.
    Synchronous,
    /// Random first-release offsets in `[0, T)` and phase lengths drawn
    /// uniformly from `[ceil(WCET / 2), WCET]`.
    Jittered { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Jobs are released in `[0, horizon)` and then run to completion.
    /// `None` is the hyperperiod capped at [`DEFAULT_HORIZON_CAP`].
    pub horizon: Option<Time>,
    pub release: ReleasePattern,
    pub policy: AccelPolicy,
    pub trace_enabled: bool,
}

impl SimConfig {
    pub fn new(policy: AccelPolicy) -> Self {
        SimConfig { horizon: None, release: ReleasePattern::Synchronous, policy, trace_enabled: true }
    }

    pub fn effective_horizon(&self, inst: &ProblemInstance) -> Time {
        self.horizon
            .unwrap_or_else(|| inst.hyperperiod().map_or(DEFAULT_HORIZON_CAP, |h| h.min(DEFAULT_HORIZON_CAP)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("horizon overflow: {0}")]
    HorizonOverflow(String),
}
