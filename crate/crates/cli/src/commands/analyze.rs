use accelsched::analysis::{checkpoint_rta, rta_fixed_point, AnalysisReport};
use accelsched::model::AssignmentDoc;
use accelsched::{AccelPolicy, JitterMode};
use anyhow::Result;
use indexmap::IndexMap;
use serde::Serialize;

use super::{chain_members, load_assignment, Exit, PRIORITY_LEGEND};
use crate::manifest::RunManifest;
use crate::output::{delta_ms, ms, ms_opt, yes_no, Rendered, Table};

#[derive(Serialize)]
struct AnalyzeReport {
    instance: String,
    policy: AccelPolicy,
    scale: String,
    jitter_mode: JitterMode,
    assignment: AssignmentDoc,
    fixed_point: AnalysisReport,
    checkpoint: AnalysisReport,
    /// Checkpoint bound minus fixed-point bound per task.
    wcrt_delta_us: IndexMap<String, Option<i64>>,
}

fn delta(a: Option<u64>, b: Option<u64>) -> Option<i64> {
    Some(b? as i64 - a? as i64)
}

pub fn run(m: &RunManifest, assignment: &str, mode: JitterMode) -> Result<Exit> {
    let inst = m.load()?;
    let a = load_assignment(&inst, assignment)?;
    let fp = rta_fixed_point(&inst, &a, m.policy);
    let cp = checkpoint_rta(&inst, &a, m.policy, mode);

    let mut tasks = Table::new(
        "tasks",
        &format!("Response times ({}, checkpoint jitter {})", m.policy, mode_name(mode)),
        &[
            "ID", "Task", "PRIO", "CPU", "ACC", "C (ms)", "D (ms)", "S fp (ms)", "R fp (ms)", "S cp (ms)", "R cp (ms)",
            "Delta (ms)",
        ],
    );
    for (i, t) in inst.tasks.iter().enumerate() {
        let (rf, rc) = (fp.wcrt(&t.id), cp.wcrt(&t.id));
        let susp = |r: &AnalysisReport| r.suspension_us.get(&t.id).copied().flatten();
        tasks.row(vec![
            (i + 1).to_string(),
            t.id.clone(),
            a.priority_of[i].to_string(),
            inst.platform.cores[a.core_of[i]].id.clone(),
            yes_no(a.uses_accel(i)),
            ms(a.core_wcet(&inst, i)),
            ms(t.deadline),
            ms_opt(susp(&fp)),
            ms_opt(rf),
            ms_opt(susp(&cp)),
            ms_opt(rc),
            delta_ms(rf, rc),
        ]);
    }
    tasks.note(PRIORITY_LEGEND);
    tasks.note("fp: fixed-point iteration; cp: checkpoint test. Delta = R cp - R fp. '-' marks a missed deadline.");

    let mut chains = Table::new("chains", "Chain latencies", &["ID", "Tasks", "L fp (ms)", "L cp (ms)", "Delta (ms)"]);
    for (x, c) in inst.chains.iter().enumerate() {
        let lf = fp.chain_latency_us.get(&c.id).copied().flatten();
        let lc = cp.chain_latency_us.get(&c.id).copied().flatten();
        chains.row(vec![c.id.clone(), chain_members(&inst, x), ms_opt(lf), ms_opt(lc), delta_ms(lf, lc)]);
    }

    let messages = vec![format!(
        "schedulable: fixed point {}, checkpoint {}",
        fp.schedulable, cp.schedulable
    )];
    let report = AnalyzeReport {
        instance: m.instance.clone(),
        policy: m.policy,
        scale: m.scale_text.clone(),
        jitter_mode: mode,
        assignment: a.to_doc(&inst),
        wcrt_delta_us: inst.tasks.iter().map(|t| (t.id.clone(), delta(fp.wcrt(&t.id), cp.wcrt(&t.id)))).collect(),
        fixed_point: fp,
        checkpoint: cp,
    };
    Rendered { stem: "analyze", json: &report, tables: vec![tasks, chains], messages }.emit(m.format, m.out.as_deref())?;
    Ok(Exit::Ok)
}

fn mode_name(mode: JitterMode) -> &'static str {
    match mode {
        JitterMode::Exact => "exact",
        JitterMode::Conservative => "conservative",
    }
}
