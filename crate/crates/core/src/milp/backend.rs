use std::ffi::CString;
use std::process::Command;
use std::time::Instant;

use highs::{RowProblem, Sense};

use super::{emit_lp, parse_solution_text, MilpError, MilpModel, RowSense, SolveStatus, SolverSolution, VarKind};

/// Shell command template for [`CommandBackend`]. `{lp}`, `{sol}` and
/// `{timeout}` are substituted before the command runs under `sh -c`.
pub const SOLVER_CMD_ENV: &str = "ACCELSCHED_SOLVER_CMD";

pub trait SolverBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Whether two solves may run at the same time.
    fn reentrant(&self) -> bool;

    fn solve(&self, model: &MilpModel, timeout_s: f64) -> Result<SolverSolution, MilpError>;
}

/// HiGHS linked into the process.
#[derive(Debug, Clone, Default)]
pub struct HighsBackend {
    pub threads: Option<u32>,
}

fn int_info(ptr: *const std::ffi::c_void, key: &str) -> Option<i32> {
    let name = CString::new(key).ok()?;
    let mut v: highs_sys::HighsInt = 0;
    let rc = unsafe { highs_sys::Highs_getIntInfoValue(ptr, name.as_ptr(), &mut v) };
    (rc == highs_sys::STATUS_OK).then_some(v as i32)
}

fn double_info(ptr: *const std::ffi::c_void, key: &str) -> Option<f64> {
    let name = CString::new(key).ok()?;
    let mut v = 0.0;
    let rc = unsafe { highs_sys::Highs_getDoubleInfoValue(ptr, name.as_ptr(), &mut v) };
    (rc == highs_sys::STATUS_OK).then_some(v)
}

impl SolverBackend for HighsBackend {
    fn name(&self) -> &str {
        "highs"
    }

    fn reentrant(&self) -> bool {
        true
    }

    fn solve(&self, model: &MilpModel, timeout_s: f64) -> Result<SolverSolution, MilpError> {
        let start = Instant::now();
        let mut pb = RowProblem::default();
        let cost: Vec<f64> = {
            let mut c = vec![0.0; model.num_vars()];
            for &(v, k) in &model.objective {
                c[v] += k;
            }
            c
        };
        let cols: Vec<_> = model
            .variables
            .iter()
            .zip(&cost)
            .map(|(v, &c)| {
                let upper = v.upper.unwrap_or(f64::INFINITY);
                match v.kind {
                    VarKind::Continuous => pb.add_column(c, v.lower..=upper),
                    VarKind::Binary | VarKind::Integer => pb.add_integer_column(c, v.lower..=upper),
                }
            })
            .collect();
        for row in &model.rows {
            let terms: Vec<_> = row.terms.iter().map(|&(v, c)| (cols[v], c)).collect();
            match row.sense {
                RowSense::Le => pb.add_row(..=row.rhs, terms),
                RowSense::Ge => pb.add_row(row.rhs.., terms),
                RowSense::Eq => pb.add_row(row.rhs..=row.rhs, terms),
            }
        }
        let mut m = pb.try_optimise(Sense::Minimise).map_err(|s| MilpError::SolverFailed {
            message: format!("HiGHS rejected the model: {s:?}"),
            stderr: String::new(),
        })?;
        m.make_quiet();
        m.set_option("time_limit", timeout_s);
        m.set_option("mip_rel_gap", 1e-9);
        // Latency objectives are sums of integer response times and constant
        // periods, so an absolute gap below one already proves optimality.
        let abs_gap = if model.objective_kind.is_some_and(|o| o.is_latency()) { 0.5 } else { 1e-6 };
        m.set_option("mip_abs_gap", abs_gap);
        m.set_option("mip_feasibility_tolerance", 1e-9);
        m.set_option("primal_feasibility_tolerance", 1e-9);
        if let Some(t) = self.threads {
            m.set_option("threads", t as i32);
        }
        let solved = m.try_solve().map_err(|s| MilpError::SolverFailed {
            message: format!("HiGHS run failed: {s:?}"),
            stderr: String::new(),
        })?;
        let ptr = solved.as_ptr();
        let model_status = unsafe { highs_sys::Highs_getModelStatus(ptr) };
        let has_primal = int_info(ptr, "primal_solution_status") == Some(highs_sys::SOLUTION_STATUS_FEASIBLE as i32);
        let status = match model_status {
            highs_sys::MODEL_STATUS_OPTIMAL => SolveStatus::Optimal,
            highs_sys::MODEL_STATUS_INFEASIBLE | highs_sys::MODEL_STATUS_UNBOUNDED_OR_INFEASIBLE => {
                SolveStatus::Infeasible
            }
            highs_sys::MODEL_STATUS_REACHED_TIME_LIMIT
            | highs_sys::MODEL_STATUS_REACHED_ITERATION_LIMIT
            | highs_sys::MODEL_STATUS_REACHED_SOLUTION_LIMIT
            | highs_sys::MODEL_STATUS_REACHED_INTERRUPT
            | highs_sys::MODEL_STATUS_REACHED_MEMORY_LIMIT => {
                if has_primal {
                    SolveStatus::FeasibleWithGap { gap: double_info(ptr, "mip_gap").unwrap_or(f64::INFINITY) }
                } else {
                    SolveStatus::Timeout
                }
            }
            other => {
                return Err(MilpError::SolverFailed {
                    message: format!("HiGHS ended with model status {other}"),
                    stderr: String::new(),
                })
            }
        };
        let wall_time_s = start.elapsed().as_secs_f64();
        if !status.has_solution() {
            return Ok(SolverSolution { status, values: Vec::new(), objective_value: None, wall_time_s });
        }
        let values = solved.get_solution().columns().to_vec();
        Ok(SolverSolution { status, values, objective_value: Some(solved.objective_value()), wall_time_s })
    }
}

/// External solver driven through an LP file and a solution file.
#[derive(Debug, Clone)]
pub struct CommandBackend {
    pub template: String,
}

impl CommandBackend {
    pub fn from_env() -> Result<Self, MilpError> {
        std::env::var(SOLVER_CMD_ENV)
            .map(|template| CommandBackend { template })
            .map_err(|_| MilpError::BackendMissing("command".into(), format!("{SOLVER_CMD_ENV} is not set")))
    }
}

impl SolverBackend for CommandBackend {
    fn name(&self) -> &str {
        "command"
    }

    fn reentrant(&self) -> bool {
        true
    }

    fn solve(&self, model: &MilpModel, timeout_s: f64) -> Result<SolverSolution, MilpError> {
        let start = Instant::now();
        let dir = tempfile::tempdir()?;
        let lp = dir.path().join("model.lp");
        let sol = dir.path().join("model.sol");
        std::fs::write(&lp, emit_lp(model))?;
        let cmd = self
            .template
            .replace("{lp}", &lp.display().to_string())
            .replace("{sol}", &sol.display().to_string())
            .replace("{timeout}", &format!("{timeout_s}"));
        let out = Command::new("sh").arg("-c").arg(&cmd).output().map_err(|e| {
            MilpError::BackendMissing("command".into(), format!("cannot run {cmd:?}: {e}"))
        })?;
        let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
        if !out.status.success() {
            return Err(MilpError::SolverFailed { message: format!("{cmd:?} exited with {}", out.status), stderr });
        }
        let text = std::fs::read_to_string(&sol).map_err(|e| MilpError::SolverFailed {
            message: format!("no solution file written: {e}"),
            stderr: stderr.clone(),
        })?;
        let mut solution = parse_solution_text(model, &text)?;
        solution.wall_time_s = start.elapsed().as_secs_f64();
        Ok(solution)
    }
}

/// `highs` or `command`.
pub fn backend_by_name(name: &str) -> Result<Box<dyn SolverBackend>, MilpError> {
    match name {
        "highs" => Ok(Box::new(HighsBackend::default())),
        "command" => Ok(Box::new(CommandBackend::from_env()?)),
        other => Err(MilpError::BackendMissing(other.into(), "known backends are highs and command".into())),
    }
}

pub fn solve(model: &MilpModel, backend: &dyn SolverBackend, timeout_s: f64) -> Result<SolverSolution, MilpError> {
    backend.solve(model, timeout_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::BigM;

    fn tiny() -> MilpModel {
        // min y  s.t.  y >= 2.5 x,  x >= 1 - z,  z <= 0
        let mut m = MilpModel::new(BigM::default());
        let x = m.binary("x");
        let z = m.binary("z");
        let y = m.continuous("y");
        m.add_row("r1", vec![(y, 1.0), (x, -2.5)], RowSense::Ge, 0.0);
        m.add_row("r2", vec![(x, 1.0), (z, 1.0)], RowSense::Ge, 1.0);
        m.add_row("r3", vec![(z, 1.0)], RowSense::Le, 0.0);
        m.objective = vec![(y, 1.0)];
        m
    }

    #[test]
    fn highs_tiny() {
        let s = HighsBackend::default().solve(&tiny(), 10.0).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective_value.unwrap() - 2.5).abs() < 1e-9);
        assert!((s.values[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn highs_infeasible() {
        let mut m = tiny();
        let x = m.var("x").unwrap();
        m.add_row("r4", vec![(x, 1.0)], RowSense::Le, 0.0);
        let s = HighsBackend::default().solve(&m, 10.0).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert!(s.values.is_empty());
    }

    #[test]
    fn command_backend_with_fake_solver() {
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("fake.sh");
        std::fs::write(&script, "#!/bin/sh\ntest -s \"$1\" || exit 9\nprintf 'x 1\\nz 0\\ny 2.5\\n' > \"$2\"\n").unwrap();
        let backend = CommandBackend { template: format!("sh {} {{lp}} {{sol}}", script.display()) };
        let s = backend.solve(&tiny(), 5.0).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.values, [1.0, 0.0, 2.5]);
        assert_eq!(s.objective_value, Some(2.5));
    }

    #[test]
    fn command_backend_failure_keeps_stderr() {
        let backend = CommandBackend { template: "echo boom >&2; exit 3".into() };
        match backend.solve(&tiny(), 5.0) {
            Err(MilpError::SolverFailed { stderr, .. }) => assert!(stderr.contains("boom")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_backend() {
        assert!(matches!(backend_by_name("cplex"), Err(MilpError::BackendMissing(..))));
    }
}
