use accelsched::analysis::AnalysisReport;
use accelsched::milp::{emit_lp, optimize, SolveStatus, SolverBackend};
use accelsched::model::AssignmentDoc;
use accelsched::{AccelPolicy, Assignment, ObjectiveKind, ProblemInstance};
use anyhow::{Context, Result};
use serde::Serialize;

use super::{accelerated_names, assignment_table, chain_table, Exit};
use crate::manifest::RunManifest;
use crate::output::{ms, Rendered, Table};

#[derive(Debug, Clone, Serialize)]
pub struct SolverInfo {
    pub backend: String,
    pub status: SolveStatus,
    pub objective_value: Option<f64>,
    pub wall_time_s: f64,
    pub timeout_s: f64,
    pub num_vars: usize,
    pub num_rows: usize,
}

/// One verified (or rejected) optimization run.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizeRun {
    pub instance: String,
    pub policy: AccelPolicy,
    pub objective: ObjectiveKind,
    pub scale: String,
    pub solver: SolverInfo,
    /// `passed`, or the reason the solution was rejected; absent without a
    /// solution.
    pub verification: Option<String>,
    pub accelerated: Vec<String>,
    pub assignment: Option<AssignmentDoc>,
    pub analysis: Option<AnalysisReport>,
    #[serde(skip)]
    pub decoded: Option<Assignment>,
}

impl OptimizeRun {
    pub fn exit(&self) -> Exit {
        match &self.verification {
            Some(v) if v != "passed" => Exit::VerificationFailed,
            _ => Exit::from_status(self.solver.status),
        }
    }

    pub fn verified(&self) -> bool {
        self.verification.as_deref() == Some("passed")
    }
}

/// Objective value for display: latency objectives in ms, ratios as is.
pub fn objective_text(objective: ObjectiveKind, v: Option<f64>) -> String {
    match v {
        None => "-".into(),
        Some(v) if objective.is_latency() => ms(v.round().max(0.0) as u64),
        Some(v) => format!("{v:.6}"),
    }
}

pub fn status_text(s: SolveStatus) -> String {
    match s {
        SolveStatus::Optimal => "optimal".into(),
        SolveStatus::FeasibleWithGap { gap } => format!("gap {:.2}%", gap * 100.0),
        SolveStatus::Infeasible => "infeasible".into(),
        SolveStatus::Timeout => "no solution".into(),
    }
}

pub fn solve_one(
    m: &RunManifest,
    inst: &ProblemInstance,
    policy: AccelPolicy,
    objective: ObjectiveKind,
    backend: &dyn SolverBackend,
) -> Result<OptimizeRun> {
    let (_, out) = optimize(inst, policy, objective, backend, m.timeout)?;
    let (verification, decoded, analysis) = match out.verified {
        None => (None, None, None),
        Some(Ok((d, report))) => (Some("passed".to_string()), Some(d.assignment), Some(report)),
        Some(Err(e)) => (Some(e.to_string()), None, None),
    };
    Ok(OptimizeRun {
        instance: m.instance.clone(),
        policy,
        objective,
        scale: m.scale_text.clone(),
        solver: SolverInfo {
            backend: backend.name().to_string(),
            status: out.status,
            objective_value: out.objective_value,
            wall_time_s: out.wall_time_s,
            timeout_s: m.timeout,
            num_vars: out.num_vars,
            num_rows: out.num_rows,
        },
        verification,
        accelerated: decoded.as_ref().map(|a| accelerated_names(inst, a)).unwrap_or_default(),
        assignment: decoded.as_ref().map(|a| a.to_doc(inst)),
        analysis,
        decoded,
    })
}

pub fn solver_table(runs: &[&OptimizeRun]) -> Table {
    let mut t = Table::new(
        "solver",
        "Solver",
        &["Policy", "Objective", "Status", "Objective value", "Time (s)", "Variables", "Rows", "Verification"],
    );
    for r in runs {
        t.row(vec![
            r.policy.to_string(),
            r.objective.to_string(),
            status_text(r.solver.status),
            objective_text(r.objective, r.solver.objective_value),
            format!("{:.2}", r.solver.wall_time_s),
            r.solver.num_vars.to_string(),
            r.solver.num_rows.to_string(),
            r.verification.clone().unwrap_or_else(|| "-".into()),
        ]);
    }
    t
}

pub fn run(m: &RunManifest) -> Result<Exit> {
    let inst = m.load()?;
    if let Some(path) = &m.emit_lp {
        let model = accelsched::milp::build_model(&inst, m.policy, m.objective)?;
        std::fs::write(path, emit_lp(&model)).with_context(|| format!("writing {}", path.display()))?;
    }
    let backend = m.backend()?;
    let run = solve_one(m, &inst, m.policy, m.objective, backend.as_ref())?;

    let mut tables = Vec::new();
    let mut messages = Vec::new();
    if let (Some(a), Some(report)) = (&run.decoded, &run.analysis) {
        tables.push(assignment_table(&inst, a, Some(report)));
        tables.push(chain_table(&inst, report));
        messages.push(format!("accelerated: {}", run.accelerated.join(", ")));
    }
    tables.push(solver_table(&[&run]));
    if let Some(v) = run.verification.as_deref().filter(|v| *v != "passed") {
        eprintln!("error: solver solution rejected: {v}");
    }
    if let (Some(dir), Some(doc)) = (&m.out, &run.assignment) {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("assignment.json"), serde_json::to_string_pretty(doc)? + "\n")?;
    }
    Rendered { stem: "optimize", json: &run, tables, messages }.emit(m.format, m.out.as_deref())?;
    Ok(run.exit())
}
