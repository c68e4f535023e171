use super::{build_model, decode, solve, verify_solution, DecodedSolution, MilpError, MilpModel, ObjectiveKind};
use super::{SolveStatus, SolverBackend, VerifyError};
use crate::analysis::{AccelPolicy, AnalysisReport};
use crate::model::ProblemInstance;

/// Result of build, solve, decode and verify.
#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub status: SolveStatus,
    pub objective_value: Option<f64>,
    pub wall_time_s: f64,
    pub num_vars: usize,
    pub num_rows: usize,
    /// `None` when the solver returned no solution.
    pub verified: Option<Result<(DecodedSolution, AnalysisReport), VerifyError>>,
}

impl OptimizeOutcome {
    /// Decoded solution and its analysis, if one exists and passed
    /// verification.
    pub fn accepted(&self) -> Option<&(DecodedSolution, AnalysisReport)> {
        self.verified.as_ref().and_then(|v| v.as_ref().ok())
    }
}

/// Builds the model, solves it and checks any solution with the analysis.
pub fn optimize(
    inst: &ProblemInstance,
    policy: AccelPolicy,
    objective: ObjectiveKind,
    backend: &dyn SolverBackend,
    timeout_s: f64,
) -> Result<(MilpModel, OptimizeOutcome), MilpError> {
    let model = build_model(inst, policy, objective)?;
    let sol = solve(&model, backend, timeout_s)?;
    let verified = if sol.status.has_solution() {
        let d = decode(&model, &sol)?;
        Some(verify_solution(inst, policy, &d).map(|r| (d, r)))
    } else {
        None
    };
    let outcome = OptimizeOutcome {
        status: sol.status,
        objective_value: sol.objective_value,
        wall_time_s: sol.wall_time_s,
        num_vars: model.num_vars(),
        num_rows: model.num_rows(),
        verified,
    };
    Ok((model, outcome))
}
