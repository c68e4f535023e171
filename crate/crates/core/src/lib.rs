/*!
# accelsched

Timing analysis and design-space optimization for periodic real-time
applications running on a heterogeneous multicore with one shared
hardware accelerator.

Tasks are partitioned onto cores and scheduled with preemptive fixed
priorities. Segments of a task may be offloaded to the accelerator
synchronously: the task prepares the request on its core, suspends while
the accelerator processes it, then finalizes on its core again. The
accelerator arbitrates requests round-robin, non-preemptively by task
priority, or (as a baseline) without contention.

The crate is organized as follows:

- [`model`]: platform, task, segment and chain descriptions, validation,
  WCET scaling, and the bundled WATERS 2019 instance.
- [`analysis`]: mapping to self-suspending tasks, accelerator suspension
  bounds, fixed-point and checkpoint-based response-time analysis, and
  end-to-end chain latency.
- [`milp`]: the joint mapping / priority / acceleration optimization
  problem as a mixed-integer linear program, LP-file emission, solver
  adapters, and solution decoding and verification.
- [`oracle`]: brute-force enumeration of all design points for small
  instances, used to cross-check the MILP encoding.
- [`simulator`]: a discrete-event simulator used to falsify analytical
  bounds.
- [`random`]: seeded random instance generation for property tests.

All times are integer microseconds ([`Time`]).
*/

pub mod analysis;
pub mod milp;
pub mod model;
pub mod oracle;
pub mod random;
pub mod simulator;

/// Time in integer microseconds.
pub type Time = u64;

pub use analysis::{AccelPolicy, AnalysisReport, JitterMode};
pub use milp::{MilpModel, ObjectiveKind};
pub use model::{Assignment, ProblemInstance};

/// `ceil(a / b)` for non-negative integers.
#[inline]
pub(crate) fn ceil_div(a: Time, b: Time) -> Time {
    debug_assert!(b > 0);
    a.div_ceil(b)
}
