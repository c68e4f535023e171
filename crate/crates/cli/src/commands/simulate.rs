use std::path::PathBuf;

use accelsched::analysis::{checkpoint_rta, rta_fixed_point};
use accelsched::simulator::{check_trace, simulate, ReleasePattern, SimConfig};
use accelsched::{AccelPolicy, JitterMode, Time};
use anyhow::{Context, Result};
use indexmap::IndexMap;
use serde::Serialize;

use super::{load_assignment, Exit};
use crate::manifest::RunManifest;
use crate::output::{ms, ms_opt, Rendered, Table};

pub struct SimOpts {
    pub assignment: String,
    pub runs: u32,
    pub horizon: Option<Time>,
    pub trace_out: Option<PathBuf>,
    pub jobs_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunSummary {
    run: u32,
    release: ReleasePattern,
    horizon_us: Time,
    jobs: usize,
    trace_violations: Vec<String>,
}

#[derive(Serialize)]
struct TaskSummary {
    observed_max_us: Option<Time>,
    fixed_point_us: Option<Time>,
    checkpoint_us: Option<Time>,
    exceeds_bound: bool,
}

#[derive(Serialize)]
struct SimulateReport {
    instance: String,
    policy: AccelPolicy,
    scale: String,
    seed: u64,
    runs: Vec<RunSummary>,
    tasks: IndexMap<String, TaskSummary>,
    bound_violations: usize,
    trace_violations: usize,
}

/// Run 0 releases synchronously; run k > 0 uses jittered releases seeded
/// with `seed + k`.
fn pattern(seed: u64, run: u32) -> ReleasePattern {
    if run == 0 {
        ReleasePattern::Synchronous
    } else {
        ReleasePattern::Jittered { seed: seed.wrapping_add(run as u64) }
    }
}

pub fn run(m: &RunManifest, opts: &SimOpts) -> Result<Exit> {
    let inst = m.load()?;
    let a = load_assignment(&inst, &opts.assignment)?;
    let fp = rta_fixed_point(&inst, &a, m.policy);
    let cp = checkpoint_rta(&inst, &a, m.policy, JitterMode::Conservative);

    let mut observed: Vec<Option<Time>> = vec![None; inst.num_tasks()];
    let mut runs = Vec::new();
    for k in 0..opts.runs.max(1) {
        let cfg = SimConfig {
            horizon: opts.horizon,
            release: pattern(m.seed, k),
            policy: m.policy,
            trace_enabled: true,
        };
        let trace = simulate(&inst, &a, &cfg)?;
        if k == 0 {
            if let Some(p) = &opts.trace_out {
                std::fs::write(p, trace.events_jsonl()).with_context(|| format!("writing {}", p.display()))?;
            }
            if let Some(p) = &opts.jobs_out {
                std::fs::write(p, trace.jobs_csv()).with_context(|| format!("writing {}", p.display()))?;
            }
        }
        for (i, t) in inst.tasks.iter().enumerate() {
            observed[i] = observed[i].max(trace.observed_wcrt[&t.id]);
        }
        runs.push(RunSummary {
            run: k,
            release: cfg.release,
            horizon_us: trace.horizon,
            jobs: trace.jobs.len(),
            trace_violations: check_trace(&trace).into_iter().map(|v| format!("{} us: {}", v.time, v.message)).collect(),
        });
    }

    let mut tasks = IndexMap::new();
    let mut table = Table::new(
        "tasks",
        &format!("Observed vs analytical response times ({})", m.policy),
        &["ID", "Task", "Observed max (ms)", "R fp (ms)", "R cp (ms)", "Within bounds"],
    );
    for (i, t) in inst.tasks.iter().enumerate() {
        let (f, c) = (fp.wcrt(&t.id), cp.wcrt(&t.id));
        let exceeds = observed[i].is_some_and(|o| f.is_some_and(|f| o > f) || c.is_some_and(|c| o > c));
        table.row(vec![
            (i + 1).to_string(),
            t.id.clone(),
            ms_opt(observed[i]),
            ms_opt(f),
            ms_opt(c),
            if exceeds { "NO".into() } else { "yes".into() },
        ]);
        tasks.insert(
            t.id.clone(),
            TaskSummary { observed_max_us: observed[i], fixed_point_us: f, checkpoint_us: c, exceeds_bound: exceeds },
        );
    }
    table.note("Bounds are only checked where the analysis gives one ('-' marks a missed deadline).");
    let mut run_table = Table::new("runs", "Runs", &["Run", "Release", "Horizon (ms)", "Jobs", "Trace violations"]);
    for r in &runs {
        run_table.row(vec![
            r.run.to_string(),
            match r.release {
                ReleasePattern::Synchronous => "synchronous".into(),
                ReleasePattern::Jittered { seed } => format!("jittered (seed {seed})"),
            },
            ms(r.horizon_us),
            r.jobs.to_string(),
            r.trace_violations.len().to_string(),
        ]);
    }

    let bound_violations = tasks.values().filter(|t| t.exceeds_bound).count();
    let trace_violations = runs.iter().map(|r| r.trace_violations.len()).sum();
    for r in &runs {
        for v in &r.trace_violations {
            eprintln!("trace violation (run {}): {v}", r.run);
        }
    }
    let report = SimulateReport {
        instance: m.instance.clone(),
        policy: m.policy,
        scale: m.scale_text.clone(),
        seed: m.seed,
        runs,
        tasks,
        bound_violations,
        trace_violations,
    };
    let messages = vec![format!("bound violations: {bound_violations}, trace violations: {trace_violations}")];
    Rendered { stem: "simulate", json: &report, tables: vec![table, run_table], messages }
        .emit(m.format, m.out.as_deref())?;
    Ok(if bound_violations + trace_violations == 0 { Exit::Ok } else { Exit::VerificationFailed })
}
