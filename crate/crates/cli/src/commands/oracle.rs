use accelsched::analysis::checkpoint_rta;
use accelsched::model::AssignmentDoc;
use accelsched::oracle::{cross_check, optimal_by_enumeration, ratio_to_f64, EnumerationBudget, OracleOptimum};
use accelsched::{AccelPolicy, JitterMode, ObjectiveKind};
use anyhow::Result;
use serde::Serialize;

use super::optimize::{objective_text, status_text};
use super::{accelerated_names, assignment_table, chain_table, Exit};
use crate::manifest::RunManifest;
use crate::output::{Rendered, Table};

#[derive(Serialize)]
struct OracleReport {
    instance: String,
    policy: AccelPolicy,
    objective: ObjectiveKind,
    scale: String,
    candidates: Option<String>,
    feasible_candidates: Option<String>,
    /// Exact optimum as a reduced fraction, e.g. `761584` or `37/40`.
    optimum: Option<String>,
    optimum_value: Option<f64>,
    assignment: Option<AssignmentDoc>,
    accelerated: Vec<String>,
    cross_check: Option<CrossCheckReport>,
}

#[derive(Serialize)]
struct CrossCheckReport {
    agrees: bool,
    milp_status: String,
    milp_objective: Option<f64>,
    milp_reanalyzed: Option<String>,
    diff: Option<String>,
}

pub fn run(m: &RunManifest, with_milp: bool, budget: &EnumerationBudget) -> Result<Exit> {
    let inst = m.load()?;
    let (best, check) = if with_milp {
        let backend = m.backend()?;
        let cc = cross_check(&inst, m.policy, m.objective, budget, backend.as_ref(), m.timeout)?;
        let report = CrossCheckReport {
            agrees: cc.agrees(),
            milp_status: status_text(cc.milp_status),
            milp_objective: cc.milp_objective,
            milp_reanalyzed: cc.milp_evaluated.map(|v| v.to_string()),
            diff: (!cc.agrees()).then(|| cc.diff()),
        };
        (cc.oracle, Some(report))
    } else {
        (optimal_by_enumeration(&inst, m.policy, m.objective, budget)?, None)
    };

    let mut tables = Vec::new();
    let mut summary = Table::new("oracle", "Enumeration", &["Policy", "Objective", "Candidates", "Feasible", "Optimum"]);
    let cand = |f: fn(&OracleOptimum) -> u128| best.as_ref().map(|b| f(b).to_string());
    summary.row(vec![
        m.policy.to_string(),
        m.objective.to_string(),
        cand(|b| b.candidates).unwrap_or_else(|| "-".into()),
        cand(|b| b.feasible_candidates).unwrap_or_else(|| "0".into()),
        objective_text(m.objective, best.as_ref().map(|b| ratio_to_f64(&b.value))),
    ]);
    if let Some(c) = &check {
        summary.note(format!(
            "solver: {} objective {}; {}",
            c.milp_status,
            objective_text(m.objective, c.milp_objective),
            if c.agrees { "matches the enumeration" } else { "MISMATCH" }
        ));
    }
    tables.push(summary);
    if let Some(b) = &best {
        let report = checkpoint_rta(&inst, &b.assignment, m.policy, JitterMode::Conservative);
        tables.insert(0, assignment_table(&inst, &b.assignment, Some(&report)));
        tables.insert(1, chain_table(&inst, &report));
    }

    let exit = match (&best, &check) {
        (_, Some(c)) if !c.agrees => {
            eprintln!("error: oracle and solver disagree: {}", c.diff.as_deref().unwrap_or(""));
            Exit::OracleMismatch
        }
        (None, _) => Exit::NoSolution,
        _ => Exit::Ok,
    };
    let report = OracleReport {
        instance: m.instance.clone(),
        policy: m.policy,
        objective: m.objective,
        scale: m.scale_text.clone(),
        candidates: best.as_ref().map(|b| b.candidates.to_string()),
        feasible_candidates: best.as_ref().map(|b| b.feasible_candidates.to_string()),
        optimum: best.as_ref().map(|b| b.value.to_string()),
        optimum_value: best.as_ref().map(|b| ratio_to_f64(&b.value)),
        assignment: best.as_ref().map(|b| b.assignment.to_doc(&inst)),
        accelerated: best.as_ref().map(|b| accelerated_names(&inst, &b.assignment)).unwrap_or_default(),
        cross_check: check,
    };
    Rendered { stem: "oracle", json: &report, tables, messages: vec![] }.emit(m.format, m.out.as_deref())?;
    Ok(exit)
}
