pub mod analyze;
pub mod optimize;
pub mod oracle;
pub mod report;
pub mod simulate;
pub mod validate;

use accelsched::analysis::AnalysisReport;
use accelsched::milp::SolveStatus;
use accelsched::model::AssignmentDoc;
use accelsched::{Assignment, ProblemInstance};
use anyhow::{Context, Result};

use crate::output::{ms_opt, yes_no, Table};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Ok = 0,
    Error = 1,
    Gap = 2,
    /// Infeasible, or no solution before the time limit.
    NoSolution = 3,
    VerificationFailed = 4,
    OracleMismatch = 5,
}

impl Exit {
    pub fn from_status(status: SolveStatus) -> Exit {
        match status {
            SolveStatus::Optimal => Exit::Ok,
            SolveStatus::FeasibleWithGap { .. } => Exit::Gap,
            SolveStatus::Infeasible | SolveStatus::Timeout => Exit::NoSolution,
        }
    }

    /// Severity order used when one command runs several solves.
    fn rank(self) -> u8 {
        match self {
            Exit::Ok => 0,
            Exit::Gap => 1,
            Exit::NoSolution => 2,
            Exit::VerificationFailed => 3,
            Exit::OracleMismatch => 4,
            Exit::Error => 5,
        }
    }

    pub fn worst(self, other: Exit) -> Exit {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }
}

pub const PRIORITY_LEGEND: &str = "PRIO: larger number = higher priority. CPU: core index. ID: task position, 1-based.";

/// `--assignment` value: a JSON assignment document or `published-rr`
/// for the bundled WATERS instances.
pub fn load_assignment(inst: &ProblemInstance, spec: &str) -> Result<Assignment> {
    if spec == "published-rr" {
        return Assignment::waters_published_rr(inst).context("published-rr needs a WATERS instance");
    }
    let doc = AssignmentDoc::load(spec)?;
    Ok(Assignment::from_doc(inst, &doc)?)
}

/// `9 - 5 - 2` style chain description with 1-based task positions.
pub fn chain_members(inst: &ProblemInstance, chain: usize) -> String {
    inst.chain_tasks(chain)
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(" - ")
}

pub fn accelerated_names(inst: &ProblemInstance, a: &Assignment) -> Vec<String> {
    a.accelerated_task_ids(inst).into_iter().map(String::from).collect()
}

/// Design point with the resulting response times, in the column layout
/// of the published solution table.
pub fn assignment_table(inst: &ProblemInstance, a: &Assignment, report: Option<&AnalysisReport>) -> Table {
    let mut t = Table::new(
        "assignment",
        "Assignment",
        &["ID", "Task", "T (ms)", "PRIO", "CPU", "Core type", "ACC", "R (ms)", "D (ms)"],
    );
    for (i, task) in inst.tasks.iter().enumerate() {
        let k = a.core_of[i];
        t.row(vec![
            (i + 1).to_string(),
            task.id.clone(),
            crate::output::ms(task.period),
            a.priority_of[i].to_string(),
            inst.platform.cores[k].id.clone(),
            inst.core_type(k).to_string(),
            yes_no(a.uses_accel(i)),
            ms_opt(report.and_then(|r| r.wcrt(&task.id))),
            crate::output::ms(task.deadline),
        ]);
    }
    t.note(PRIORITY_LEGEND);
    t
}

pub fn chain_table(inst: &ProblemInstance, report: &AnalysisReport) -> Table {
    let mut t = Table::new("chains", "Chain latencies", &["ID", "Tasks", "Latency (ms)"]);
    for (x, c) in inst.chains.iter().enumerate() {
        let l = report.chain_latency_us.get(&c.id).copied().flatten();
        t.row(vec![c.id.clone(), chain_members(inst, x), ms_opt(l)]);
    }
    t
}
