use accelsched::model::{validate_instance, validation_warnings, Violation};
use anyhow::Result;
use serde::Serialize;

use super::{chain_members, Exit};
use crate::manifest::RunManifest;
use crate::output::{ms, Rendered, Table};

#[derive(Serialize)]
struct ValidateReport {
    instance: String,
    scale: String,
    valid: bool,
    tasks: usize,
    cores: usize,
    chains: usize,
    hyperperiod_us: Option<u64>,
    violations: Vec<Violation>,
    warnings: Vec<Violation>,
}

pub fn run(m: &RunManifest) -> Result<Exit> {
    let inst = m.load_unchecked()?;
    let violations = validate_instance(&inst);
    let warnings = if violations.is_empty() { validation_warnings(&inst) } else { Vec::new() };
    let report = ValidateReport {
        instance: m.instance.clone(),
        scale: m.scale_text.clone(),
        valid: violations.is_empty(),
        tasks: inst.num_tasks(),
        cores: inst.num_cores(),
        chains: inst.chains.len(),
        hyperperiod_us: inst.hyperperiod(),
        violations,
        warnings,
    };

    let mut summary = Table::new("summary", "Instance", &["Tasks", "Cores", "Chains", "Hyperperiod (ms)", "Valid"]);
    summary.row(vec![
        report.tasks.to_string(),
        report.cores.to_string(),
        report.chains.to_string(),
        report.hyperperiod_us.map_or_else(|| "overflow".into(), ms),
        report.valid.to_string(),
    ]);
    let mut tables = vec![summary];
    if report.valid {
        let mut tasks = Table::new("tasks", "Tasks", &["ID", "Task", "T (ms)", "D (ms)", "Segments", "Accelerable"]);
        for (i, t) in inst.tasks.iter().enumerate() {
            tasks.row(vec![
                (i + 1).to_string(),
                t.id.clone(),
                ms(t.period),
                ms(t.deadline),
                t.segments.len().to_string(),
                t.accelerable_segments().count().to_string(),
            ]);
        }
        let mut chains = Table::new("chains", "Chains", &["ID", "Tasks"]);
        for (x, c) in inst.chains.iter().enumerate() {
            chains.row(vec![c.id.clone(), chain_members(&inst, x)]);
        }
        tables.extend([tasks, chains]);
    }
    for (name, title, list) in [
        ("violations", "Violations", &report.violations),
        ("warnings", "Warnings", &report.warnings),
    ] {
        if !list.is_empty() {
            let mut t = Table::new(name, title, &["Path", "Message"]);
            for v in list {
                t.row(vec![v.path.clone(), v.message.clone()]);
            }
            tables.push(t);
        }
    }
    for v in &report.violations {
        eprintln!("error: {v}");
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Rendered { stem: "validate", json: &report, tables, messages: vec![] }.emit(m.format, m.out.as_deref())?;
    Ok(if report.valid { Exit::Ok } else { Exit::Error })
}
