//! Joint mapping, priority and acceleration optimization as a MILP.
//!
//! [`build_model`] turns an instance into a solver-agnostic [`MilpModel`];
//! [`emit_lp`] writes it in CPLEX-LP syntax; [`solve`] hands it to a
//! [`SolverBackend`]; [`decode`] and [`verify_solution`] turn the solver's
//! answer back into an [`Assignment`](crate::Assignment) and check it with
//! the analysis module.
//!
//! Row names are `c<constraint>_<task>[_<segment>][_<peer>]`, with extra
//! discriminators for cores (`k3`), checkpoints (`g2`) and the individual
//! inequalities of a group (`a`, `b`, `c`). Objective rows start with `obj_`.

mod backend;
mod bigm;
mod decode;
mod encode;
mod lp;
mod pipeline;
mod solution;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis::AccelPolicy;
use crate::model::ModelError;

pub use backend::{backend_by_name, solve, CommandBackend, HighsBackend, SolverBackend, SOLVER_CMD_ENV};
pub use bigm::{big_m, BigM};
pub use decode::{decode, verify_solution, DecodedSolution, VerifyError};
pub use encode::build_model;
pub use lp::emit_lp;
pub use pipeline::{optimize, OptimizeOutcome};
pub use solution::{parse_solution_text, SolutionFormat};

/// Default solver time limit in seconds.
pub const DEFAULT_TIMEOUT_S: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveKind {
    #[serde(rename = "minmax-lat")]
    MinMaxLat,
    #[serde(rename = "minsum-lat")]
    MinSumLat,
    #[serde(rename = "minmax-rt")]
    MinMaxRt,
    #[serde(rename = "minsum-rt")]
    MinSumRt,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 4] = [
        ObjectiveKind::MinMaxLat,
        ObjectiveKind::MinSumLat,
        ObjectiveKind::MinMaxRt,
        ObjectiveKind::MinSumRt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::MinMaxLat => "minmax-lat",
            ObjectiveKind::MinSumLat => "minsum-lat",
            ObjectiveKind::MinMaxRt => "minmax-rt",
            ObjectiveKind::MinSumRt => "minsum-rt",
        }
    }

    /// Latency objectives are integer microseconds; the others are ratios.
    pub fn is_latency(self) -> bool {
        matches!(self, ObjectiveKind::MinMaxLat | ObjectiveKind::MinSumLat)
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObjectiveKind::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown objective {s:?} (expected minmax-lat, minsum-lat, minmax-rt or minsum-rt)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    /// `None` is unbounded above.
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// Variable handles the decoder needs, indexed by task (and core,
/// priority level or segment).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelIndex {
    pub x: Vec<Vec<VarId>>,
    pub pr: Vec<Vec<VarId>>,
    pub a: Vec<Vec<VarId>>,
    pub r: Vec<VarId>,
    pub s: Vec<VarId>,
    pub objective: Option<VarId>,
}

/// A linear model with named variables and rows. Always a minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    pub objective: Vec<(VarId, f64)>,
    pub objective_kind: Option<ObjectiveKind>,
    pub policy: Option<AccelPolicy>,
    pub big_m: BigM,
    pub index: ModelIndex,
    by_name: HashMap<String, VarId>,
}

impl MilpModel {
    pub fn new(big_m: BigM) -> Self {
        MilpModel {
            variables: Vec::new(),
            rows: Vec::new(),
            objective: Vec::new(),
            objective_kind: None,
            policy: None,
            big_m,
            index: ModelIndex::default(),
            by_name: HashMap::new(),
        }
    }

    fn add_var(&mut self, name: String, kind: VarKind, lower: f64, upper: Option<f64>) -> VarId {
        assert!(!self.by_name.contains_key(&name), "duplicate variable {name}");
        let id = self.variables.len();
        self.by_name.insert(name.clone(), id);
        self.variables.push(Variable { name, kind, lower, upper });
        id
    }

    pub fn binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name.into(), VarKind::Binary, 0.0, Some(1.0))
    }

    pub fn integer(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name.into(), VarKind::Integer, lower, Some(upper))
    }

    /// Non-negative continuous variable.
    pub fn continuous(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name.into(), VarKind::Continuous, 0.0, None)
    }

    pub fn add_row(&mut self, name: impl Into<String>, terms: Vec<(VarId, f64)>, sense: RowSense, rhs: f64) {
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(slot) => slot.1 += c,
                None => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        self.rows.push(Row { name: name.into(), terms: merged, sense, rhs });
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn count_vars_with_prefix(&self, prefix: &str) -> usize {
        self.variables.iter().filter(|v| v.name.starts_with(prefix)).count()
    }

    pub fn count_rows_with_prefix(&self, prefix: &str) -> usize {
        self.rows.iter().filter(|r| r.name.starts_with(prefix)).count()
    }

    /// Value of the objective for a full assignment of variable values.
    pub fn objective_at(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    FeasibleWithGap { gap: f64 },
    Infeasible,
    Timeout,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::FeasibleWithGap { .. })
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Optimal => f.write_str("optimal"),
            SolveStatus::FeasibleWithGap { gap } => write!(f, "feasible (gap {:.4}%)", gap * 100.0),
            SolveStatus::Infeasible => f.write_str("infeasible"),
            SolveStatus::Timeout => f.write_str("timeout without solution"),
        }
    }
}

/// Solver answer. `values` is indexed like `model.variables` and empty
/// when there is no solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSolution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective_value: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum MilpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("backend {0:?} is not available: {1}")]
    BackendMissing(String, String),
    #[error("solver failed: {message}\n{stderr}")]
    SolverFailed { message: String, stderr: String },
    #[error("cannot parse solver output: {0}")]
    BadSolution(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
