use super::bigm::big_m;
use super::{MilpError, MilpModel, ObjectiveKind, RowSense, VarId};
use crate::analysis::{checkpoints, AccelPolicy};
use crate::model::{ImplType, ProblemInstance};
use crate::{ceil_div, Time};

use RowSense::{Eq, Ge, Le};

/// Builds the optimization model for `inst` under the given accelerator
/// policy and objective.
pub fn build_model(
    inst: &ProblemInstance,
    policy: AccelPolicy,
    objective: ObjectiveKind,
) -> Result<MilpModel, MilpError> {
    inst.check()?;
    let n = inst.num_tasks();
    let m = inst.num_cores();
    let bm = big_m(inst);
    let mp = bm.priority as f64;
    let mut md = MilpModel::new(bm);
    md.policy = Some(policy);
    md.objective_kind = Some(objective);
    let tasks = &inst.tasks;
    let pairs = || (0..n).flat_map(move |i| (0..n).filter(move |&s| s != i).map(move |s| (i, s)));

    // Mapping and priorities.
    let x: Vec<Vec<VarId>> = (0..n)
        .map(|i| (0..m).map(|k| md.binary(format!("x_{i}_{k}"))).collect())
        .collect();
    let mut spk = vec![vec![Vec::new(); n]; n];
    let mut sp = vec![vec![usize::MAX; n]; n];
    for (i, s) in pairs() {
        spk[i][s] = (0..m).map(|k| md.binary(format!("spk_{i}_{s}_{k}"))).collect();
        sp[i][s] = md.binary(format!("sp_{i}_{s}"));
    }
    let pr: Vec<Vec<VarId>> = (0..n)
        .map(|i| (1..=n).map(|p| md.binary(format!("pr_{i}_{p}"))).collect())
        .collect();
    let mut hp = vec![vec![usize::MAX; n]; n];
    for (i, s) in pairs() {
        hp[i][s] = md.binary(format!("hp_{i}_{s}"));
    }
    let prio: Vec<VarId> = (0..n).map(|i| md.integer(format!("P_{i}"), 1.0, n as f64)).collect();
    let a: Vec<Vec<VarId>> = (0..n)
        .map(|i| (0..tasks[i].segments.len()).map(|j| md.binary(format!("a_{i}_{j}"))).collect())
        .collect();

    // WCETs, interference, response times, suspensions.
    let w_seg: Vec<Vec<VarId>> = (0..n)
        .map(|i| (0..tasks[i].segments.len()).map(|j| md.continuous(format!("w_{i}_{j}"))).collect())
        .collect();
    let w: Vec<VarId> = (0..n).map(|i| md.continuous(format!("w_{i}"))).collect();
    let mut interf = vec![vec![usize::MAX; n]; n];
    for (i, s) in pairs() {
        interf[i][s] = md.continuous(format!("I_{i}_{s}"));
    }
    let r: Vec<VarId> = (0..n).map(|i| md.continuous(format!("R_{i}"))).collect();
    let susp: Vec<VarId> = (0..n).map(|i| md.continuous(format!("s_{i}"))).collect();
    let accelerable: Vec<Vec<usize>> = tasks.iter().map(|t| t.accelerable_segments().collect()).collect();
    let mut s_seg = vec![vec![usize::MAX; 0]; n];
    for i in 0..n {
        s_seg[i] = vec![usize::MAX; tasks[i].segments.len()];
        for &j in &accelerable[i] {
            s_seg[i][j] = md.continuous(format!("s_{i}_{j}"));
        }
    }

    // 1: each task on exactly one core.
    for i in 0..n {
        md.add_row(format!("c1_{i}"), x[i].iter().map(|&v| (v, 1.0)).collect(), Eq, 1.0);
    }
    // Cores of one type are interchangeable: order them by the smallest
    // task index they host, so core k takes task i only if the previous
    // core of its type hosts a task before i.
    for k in 1..m {
        let Some(prev) = (0..k).rev().find(|&q| inst.core_type(q) == inst.core_type(k)) else {
            continue;
        };
        for i in 0..n {
            let mut terms = vec![(x[i][k], 1.0)];
            terms.extend((0..i).map(|e| (x[e][prev], -1.0)));
            md.add_row(format!("c1_sym_{i}_k{k}"), terms, Le, 0.0);
        }
    }
    // 2: same-core indicators.
    for (i, s) in pairs() {
        for k in 0..m {
            let v = spk[i][s][k];
            md.add_row(format!("c2_{i}_{s}_k{k}_a"), vec![(v, 1.0), (x[i][k], -1.0), (x[s][k], -1.0)], Ge, -1.0);
            md.add_row(format!("c2_{i}_{s}_k{k}_b"), vec![(v, 1.0), (x[i][k], -1.0)], Le, 0.0);
            md.add_row(format!("c2_{i}_{s}_k{k}_c"), vec![(v, 1.0), (x[s][k], -1.0)], Le, 0.0);
        }
        let mut terms = vec![(sp[i][s], 1.0)];
        terms.extend(spk[i][s].iter().map(|&v| (v, -1.0)));
        md.add_row(format!("c2_{i}_{s}"), terms, Eq, 0.0);
    }
    // 3: one priority per task, one task per priority.
    for i in 0..n {
        md.add_row(format!("c3_{i}"), pr[i].iter().map(|&v| (v, 1.0)).collect(), Eq, 1.0);
    }
    for p in 0..n {
        md.add_row(format!("c3_p{}", p + 1), (0..n).map(|i| (pr[i][p], 1.0)).collect(), Eq, 1.0);
    }
    // 4: priority index.
    for i in 0..n {
        let mut terms = vec![(prio[i], 1.0)];
        terms.extend((0..n).map(|p| (pr[i][p], -((p + 1) as f64))));
        md.add_row(format!("c4_{i}"), terms, Eq, 0.0);
    }
    // 5: exactly one of each pair is higher.
    for (i, s) in pairs().filter(|&(i, s)| i < s) {
        md.add_row(format!("c5_{i}_{s}"), vec![(hp[i][s], 1.0), (hp[s][i], 1.0)], Eq, 1.0);
    }
    // 6: relative vs absolute priority; a larger index is a higher priority.
    for (i, s) in pairs() {
        let terms = vec![(prio[s], 1.0), (prio[i], -1.0), (hp[i][s], mp)];
        md.add_row(format!("c6_{i}_{s}_a"), terms.clone(), Ge, 0.0);
        md.add_row(format!("c6_{i}_{s}_b"), terms, Le, mp);
    }
    // 7: implementation type fixes some acceleration flags.
    for i in 0..n {
        for (j, seg) in tasks[i].segments.iter().enumerate() {
            match seg.impl_type {
                ImplType::Cpu => md.add_row(format!("c7_{i}_{j}"), vec![(a[i][j], 1.0)], Eq, 0.0),
                ImplType::Hwa => md.add_row(format!("c7_{i}_{j}"), vec![(a[i][j], 1.0)], Eq, 1.0),
                ImplType::CpuHwa => {}
            }
        }
    }
    // Row-local big-M values: each is the largest value the guarded side
    // can take in a minimal solution, so the integer points do not change.
    let types = inst.used_core_types();
    let max_over_types = |f: &dyn Fn(&str) -> Time| types.iter().map(|ty| f(ty)).max().unwrap_or(0) as f64;
    let max_wcet: Vec<f64> = (0..n).map(|i| inst.max_wcet(i) as f64).collect();

    // 8: segment WCET on the chosen core.
    for i in 0..n {
        for (j, seg) in tasks[i].segments.iter().enumerate() {
            let m_cpu = max_over_types(&|ty| seg.exec_on(ty));
            let m_acc = max_over_types(&|ty| seg.accel_side_on(ty));
            let on = |f: &dyn Fn(&str) -> Time| -> Vec<(VarId, f64)> {
                (0..m).map(|k| (x[i][k], -(f(inst.core_type(k)) as f64))).collect()
            };
            let mut cpu = vec![(w_seg[i][j], 1.0)];
            cpu.extend(on(&|ty| seg.exec_on(ty)));
            let mut acc = vec![(w_seg[i][j], 1.0)];
            acc.extend(on(&|ty| seg.accel_side_on(ty)));
            match seg.impl_type {
                ImplType::Cpu => md.add_row(format!("c8_{i}_{j}_a"), cpu, Ge, 0.0),
                ImplType::Hwa => md.add_row(format!("c8_{i}_{j}_b"), acc, Ge, 0.0),
                ImplType::CpuHwa => {
                    cpu.push((a[i][j], m_cpu));
                    md.add_row(format!("c8_{i}_{j}_a"), cpu, Ge, 0.0);
                    acc.push((a[i][j], -m_acc));
                    md.add_row(format!("c8_{i}_{j}_b"), acc, Ge, -m_acc);
                }
            }
        }
    }
    // 9: task WCET.
    for i in 0..n {
        let mut terms = vec![(w[i], 1.0)];
        terms.extend(w_seg[i].iter().map(|&v| (v, -1.0)));
        md.add_row(format!("c9_{i}"), terms, Ge, 0.0);
    }
    // 10: interference of i on s when i is higher priority on the same core.
    for (i, s) in pairs() {
        md.add_row(
            format!("c10_{i}_{s}"),
            vec![(interf[i][s], 1.0), (w[i], -1.0), (hp[i][s], -max_wcet[i]), (sp[i][s], -max_wcet[i])],
            Ge,
            -2.0 * max_wcet[i],
        );
    }
    let eh = |i: usize, j: usize| tasks[i].segments[j].accel_wcet() as f64;
    let max_eh: Vec<f64> =
        (0..n).map(|i| accelerable[i].iter().map(|&j| eh(i, j)).fold(0.0, f64::max)).collect();
    let sum_eh: Vec<f64> = (0..n).map(|i| accelerable[i].iter().map(|&j| eh(i, j)).sum()).collect();
    // Largest minimal suspension of one offloaded segment, excluding its own
    // accelerator time.
    let wait_bound = |i: usize| -> f64 {
        match policy {
            AccelPolicy::NoContention => 0.0,
            AccelPolicy::RoundRobin => (0..n).filter(|&s| s != i).map(|s| max_eh[s]).sum(),
            AccelPolicy::NonPreemptiveFp => tasks[i].deadline as f64,
        }
    };
    let susp_bound: Vec<f64> =
        (0..n).map(|i| sum_eh[i] + accelerable[i].len() as f64 * wait_bound(i)).collect();

    // 11: response-time candidates at each checkpoint.
    let jitter: Vec<Time> = (0..n).map(|s| inst.conservative_jitter(s)).collect();
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&s| s != i).collect();
        let pts = checkpoints(
            tasks[i].deadline,
            &others.iter().map(|&s| (tasks[s].period, jitter[s])).collect::<Vec<_>>(),
        );
        let mut sel = Vec::new();
        for (g, &nu) in pts.points.iter().enumerate() {
            let rho = md.continuous(format!("rho_{i}_{g}"));
            let y = md.binary(format!("y_{i}_{g}"));
            sel.push((y, 1.0));
            let mut terms = vec![(rho, 1.0), (w[i], -1.0), (susp[i], -1.0)];
            terms.extend(
                others
                    .iter()
                    .map(|&s| (interf[s][i], -(ceil_div(nu + jitter[s], tasks[s].period) as f64))),
            );
            md.add_row(format!("c11_{i}_g{g}_a"), terms, Ge, 0.0);
            let mt = max_wcet[i]
                + susp_bound[i]
                + others
                    .iter()
                    .map(|&s| ceil_div(nu + jitter[s], tasks[s].period) as f64 * max_wcet[s])
                    .sum::<f64>();
            md.add_row(format!("c11_{i}_g{g}_b"), vec![(rho, 1.0), (y, mt)], Le, nu as f64 + mt);
            md.add_row(format!("c11_{i}_g{g}_c"), vec![(r[i], 1.0), (rho, -1.0), (y, -mt)], Ge, -mt);
        }
        md.add_row(format!("c11_{i}_sel"), sel, Eq, 1.0);
    }
    // 12: schedulability.
    for i in 0..n {
        md.add_row(format!("c12_{i}"), vec![(r[i], 1.0)], Le, tasks[i].deadline as f64);
    }

    // Accelerator side.
    let total_susp = |md: &mut MilpModel, label: String, i: usize| {
        if accelerable[i].is_empty() {
            md.add_row(label, vec![(susp[i], 1.0)], Eq, 0.0);
        } else {
            let mut terms = vec![(susp[i], 1.0)];
            terms.extend(accelerable[i].iter().map(|&j| (s_seg[i][j], -1.0)));
            md.add_row(label, terms, Ge, 0.0);
        }
    };
    match policy {
        AccelPolicy::NoContention => {
            for i in 0..n {
                if accelerable[i].is_empty() {
                    md.add_row(format!("c15_{i}"), vec![(susp[i], 1.0)], Eq, 0.0);
                } else {
                    let mut terms = vec![(susp[i], 1.0)];
                    terms.extend(accelerable[i].iter().map(|&j| (a[i][j], -eh(i, j))));
                    md.add_row(format!("c15_{i}"), terms, Ge, 0.0);
                }
            }
        }
        AccelPolicy::RoundRobin => {
            let la: Vec<Option<VarId>> = (0..n)
                .map(|i| (!accelerable[i].is_empty()).then(|| md.continuous(format!("la_{i}"))))
                .collect();
            // 13: longest offloaded segment.
            for i in 0..n {
                for &j in &accelerable[i] {
                    md.add_row(
                        format!("c13_{i}_{j}"),
                        vec![(la[i].unwrap(), 1.0), (a[i][j], -eh(i, j))],
                        Ge,
                        0.0,
                    );
                }
            }
            // 14: one round of every other task.
            for i in 0..n {
                for &j in &accelerable[i] {
                    let ms = eh(i, j) + wait_bound(i);
                    let mut terms = vec![(s_seg[i][j], 1.0), (a[i][j], -ms)];
                    terms.extend((0..n).filter(|&s| s != i).filter_map(|s| la[s]).map(|v| (v, -1.0)));
                    md.add_row(format!("c14_{i}_{j}"), terms, Ge, eh(i, j) - ms);
                }
            }
            // 15: task suspension.
            for i in 0..n {
                total_susp(&mut md, format!("c15_{i}"), i);
            }
        }
        AccelPolicy::NonPreemptiveFp => {
            let acc_tasks: Vec<usize> = (0..n).filter(|&i| !accelerable[i].is_empty()).collect();
            let mut b = vec![usize::MAX; n];
            for &i in &acc_tasks {
                b[i] = md.continuous(format!("b_{i}"));
            }
            // 16: blocking by one lower-priority offloaded segment.
            for &i in &acc_tasks {
                for &s in acc_tasks.iter().filter(|&&s| s != i) {
                    for &f in &accelerable[s] {
                        md.add_row(
                            format!("c16_{i}_{s}_{f}"),
                            vec![(b[i], 1.0), (a[s][f], -eh(s, f)), (hp[i][s], -eh(s, f))],
                            Ge,
                            -eh(s, f),
                        );
                    }
                }
            }
            // 17: accelerator demand of i on lower-priority s.
            let mut hacc = vec![vec![usize::MAX; n]; n];
            for &i in &acc_tasks {
                for &s in acc_tasks.iter().filter(|&&s| s != i) {
                    hacc[i][s] = md.continuous(format!("H_{i}_{s}"));
                    let mut sum = vec![(hacc[i][s], 1.0)];
                    for &j in &accelerable[i] {
                        let v = md.continuous(format!("ha_{i}_{j}_{s}"));
                        md.add_row(
                            format!("c17_{i}_{j}_{s}"),
                            vec![(v, 1.0), (a[i][j], -eh(i, j)), (hp[i][s], -eh(i, j))],
                            Ge,
                            -eh(i, j),
                        );
                        sum.push((v, -1.0));
                    }
                    md.add_row(format!("c17_{i}_{s}"), sum, Ge, 0.0);
                }
            }
            // 18: suspension candidates at accelerator checkpoints.
            let acc_jitter: Vec<Time> = (0..n).map(|s| inst.conservative_accel_jitter(s).unwrap_or(0)).collect();
            for &i in &acc_tasks {
                let others: Vec<usize> = acc_tasks.iter().copied().filter(|&s| s != i).collect();
                let max_block = others.iter().map(|&s| max_eh[s]).fold(0.0, f64::max);
                let pts = checkpoints(
                    tasks[i].deadline,
                    &others.iter().map(|&s| (tasks[s].period, acc_jitter[s])).collect::<Vec<_>>(),
                );
                for &j in &accelerable[i] {
                    let mut sel = Vec::new();
                    for (g, &nu) in pts.points.iter().enumerate() {
                        let sig = md.continuous(format!("sig_{i}_{j}_g{g}"));
                        let del = md.binary(format!("del_{i}_{j}_g{g}"));
                        sel.push((del, 1.0));
                        let mut terms = vec![(sig, 1.0), (b[i], -1.0)];
                        terms.extend(others.iter().map(|&s| {
                            (hacc[s][i], -(ceil_div(nu + acc_jitter[s], tasks[s].period) as f64))
                        }));
                        md.add_row(format!("c18_{i}_{j}_g{g}_a"), terms, Ge, 0.0);
                        let ms = eh(i, j)
                            + max_block
                            + others
                                .iter()
                                .map(|&s| ceil_div(nu + acc_jitter[s], tasks[s].period) as f64 * sum_eh[s])
                                .sum::<f64>();
                        md.add_row(format!("c18_{i}_{j}_g{g}_b"), vec![(sig, 1.0), (del, ms)], Le, nu as f64 + ms);
                        md.add_row(
                            format!("c18_{i}_{j}_g{g}_c"),
                            vec![(s_seg[i][j], 1.0), (sig, -1.0), (del, -ms)],
                            Ge,
                            eh(i, j) - ms,
                        );
                    }
                    sel.push((a[i][j], -1.0));
                    md.add_row(format!("c18_{i}_{j}_sel"), sel, Eq, 0.0);
                }
            }
            // 19: task suspension.
            for i in 0..n {
                total_susp(&mut md, format!("c19_{i}"), i);
            }
        }
    }

    // Objective.
    let chain_vars = |md: &mut MilpModel| -> Vec<VarId> {
        inst.chains
            .iter()
            .enumerate()
            .map(|(cx, _)| {
                let l = md.continuous(format!("L_{cx}"));
                let members = inst.chain_tasks(cx);
                let mut terms = vec![(l, 1.0)];
                terms.extend(members.iter().map(|&i| (r[i], -1.0)));
                let periods: Time = members.iter().map(|&i| tasks[i].period).sum::<Time>()
                    - members.first().map_or(0, |&f| tasks[f].period);
                md.add_row(format!("obj_lat_{cx}"), terms, Ge, periods as f64);
                l
            })
            .collect()
    };
    match objective {
        ObjectiveKind::MinMaxLat => {
            let lmax = md.continuous("LMAX");
            for (cx, l) in chain_vars(&mut md).into_iter().enumerate() {
                md.add_row(format!("obj_max_{cx}"), vec![(lmax, 1.0), (l, -1.0)], Ge, 0.0);
            }
            md.objective = vec![(lmax, 1.0)];
            md.index.objective = Some(lmax);
        }
        ObjectiveKind::MinSumLat => {
            md.objective = chain_vars(&mut md).into_iter().map(|l| (l, 1.0)).collect();
        }
        ObjectiveKind::MinMaxRt => {
            let rtmax = md.continuous("RTMAX");
            for i in 0..n {
                md.add_row(
                    format!("obj_rt_{i}"),
                    vec![(rtmax, tasks[i].deadline as f64), (r[i], -1.0)],
                    Ge,
                    0.0,
                );
            }
            md.objective = vec![(rtmax, 1.0)];
            md.index.objective = Some(rtmax);
        }
        ObjectiveKind::MinSumRt => {
            md.objective = (0..n).map(|i| (r[i], 1.0 / tasks[i].deadline as f64)).collect();
        }
    }

    md.index.x = x;
    md.index.pr = pr;
    md.index.a = a;
    md.index.r = r;
    md.index.s = susp;
    Ok(md)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_waters;

    #[test]
    fn waters_counts() {
        let w = builtin_waters();
        for p in AccelPolicy::ALL {
            let md = build_model(&w, p, ObjectiveKind::MinMaxLat).unwrap();
            assert_eq!(md.count_vars_with_prefix("x_"), 54);
            assert_eq!(md.count_vars_with_prefix("pr_"), 81);
            assert_eq!(md.count_vars_with_prefix("hp_"), 72);
            assert_eq!(md.count_rows_with_prefix("c2_"), 1_368);
        }
    }

    #[test]
    fn no_products_of_variables() {
        // Every row is a plain list of (variable, constant) pairs, so the
        // audit reduces to: each variable appears at most once per row and
        // every referenced variable exists.
        let w = builtin_waters();
        let md = build_model(&w, AccelPolicy::NonPreemptiveFp, ObjectiveKind::MinSumLat).unwrap();
        for row in &md.rows {
            let mut seen = std::collections::HashSet::new();
            for &(v, c) in &row.terms {
                assert!(v < md.num_vars());
                assert!(c.is_finite());
                assert!(seen.insert(v), "{}", row.name);
            }
            assert!(row.name.starts_with('c') || row.name.starts_with("obj_"), "{}", row.name);
        }
    }

    #[test]
    fn row_names_unique() {
        let w = builtin_waters();
        for p in AccelPolicy::ALL {
            for o in ObjectiveKind::ALL {
                let md = build_model(&w, p, o).unwrap();
                let names: std::collections::HashSet<_> = md.rows.iter().map(|r| &r.name).collect();
                assert_eq!(names.len(), md.rows.len());
            }
        }
    }

    #[test]
    fn policy_specific_rows() {
        let w = builtin_waters();
        let rr = build_model(&w, AccelPolicy::RoundRobin, ObjectiveKind::MinMaxLat).unwrap();
        assert!(rr.count_rows_with_prefix("c13_") > 0 && rr.count_rows_with_prefix("c16_") == 0);
        let fp = build_model(&w, AccelPolicy::NonPreemptiveFp, ObjectiveKind::MinMaxLat).unwrap();
        assert!(fp.count_rows_with_prefix("c18_") > 0 && fp.count_rows_with_prefix("c13_") == 0);
        let nc = build_model(&w, AccelPolicy::NoContention, ObjectiveKind::MinMaxLat).unwrap();
        assert_eq!(nc.count_rows_with_prefix("c13_") + nc.count_rows_with_prefix("c18_"), 0);
    }
}
