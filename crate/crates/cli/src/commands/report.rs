use accelsched::{AccelPolicy, ObjectiveKind};
use anyhow::Result;
use serde::Serialize;

use super::optimize::{objective_text, solve_one, solver_table, status_text, OptimizeRun};
use super::{chain_members, Exit};
use crate::manifest::RunManifest;
use crate::output::{ms_opt, Rendered, Table};

#[derive(Serialize)]
struct FullReport {
    instance: String,
    scale: String,
    runs: Vec<OptimizeRun>,
}

/// Solves every requested policy/objective pair and lays the results out
/// as a running-time table, one chain-latency table per policy and the
/// accelerated sets.
pub fn run(m: &RunManifest) -> Result<Exit> {
    let inst = m.load()?;
    let backend = m.backend()?;
    let policies: Vec<AccelPolicy> = if m.policy_given { vec![m.policy] } else { AccelPolicy::ALL.to_vec() };
    let objectives: Vec<ObjectiveKind> =
        if m.objective_given { vec![m.objective] } else { ObjectiveKind::ALL.to_vec() };

    let mut runs = Vec::new();
    let mut exit = Exit::Ok;
    for &p in &policies {
        for &o in &objectives {
            let r = solve_one(m, &inst, p, o, backend.as_ref())?;
            eprintln!("{p} {o}: {} in {:.2}s", status_text(r.solver.status), r.solver.wall_time_s);
            exit = exit.worst(r.exit());
            runs.push(r);
        }
    }
    let find = |p: AccelPolicy, o: ObjectiveKind| runs.iter().find(|r| r.policy == p && r.objective == o);

    let mut heads = vec!["Policy".to_string()];
    heads.extend(objectives.iter().map(|o| o.to_string()));
    let head_refs: Vec<&str> = heads.iter().map(String::as_str).collect();

    let mut times = Table::new("running_times", "Running times", &head_refs);
    let mut accel = Table::new("accelerated", "Accelerated tasks", &head_refs);
    for &p in &policies {
        let mut trow = vec![p.to_string()];
        let mut arow = vec![p.to_string()];
        for &o in &objectives {
            let r = find(p, o).expect("every pair was solved");
            trow.push(format!("{:.2}s {}", r.solver.wall_time_s, status_text(r.solver.status)));
            arow.push(if r.verified() { r.accelerated.join(" + ") } else { "-".into() });
        }
        times.row(trow);
        accel.row(arow);
    }

    let mut tables = vec![times, accel];
    for &p in &policies {
        let mut ch = vec!["ID".to_string(), "Tasks".to_string()];
        ch.extend(objectives.iter().map(|o| o.to_string()));
        let ch_refs: Vec<&str> = ch.iter().map(String::as_str).collect();
        let mut t = Table::new(&format!("chains_{p}"), &format!("Chain latencies in ms ({p})"), &ch_refs);
        for (x, c) in inst.chains.iter().enumerate() {
            let mut row = vec![c.id.clone(), chain_members(&inst, x)];
            for &o in &objectives {
                let r = find(p, o).expect("every pair was solved");
                let l = r.analysis.as_ref().filter(|_| r.verified()).and_then(|a| a.chain_latency_us[&c.id]);
                row.push(ms_opt(l));
            }
            t.row(row);
        }
        let mut objective_row = vec!["".to_string(), "objective".to_string()];
        for &o in &objectives {
            let r = find(p, o).expect("every pair was solved");
            objective_row.push(objective_text(o, r.solver.objective_value));
        }
        t.row(objective_row);
        tables.push(t);
    }
    tables.push(solver_table(&runs.iter().collect::<Vec<_>>()));

    let report = FullReport { instance: m.instance.clone(), scale: m.scale_text.clone(), runs };
    Rendered { stem: "report", json: &report, tables, messages: vec![] }.emit(m.format, m.out.as_deref())?;
    Ok(exit)
}
