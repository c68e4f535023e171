use accelsched::analysis::{checkpoint_wcrt, demand, demand_test, checkpoints, fixed_point_wcrt, suspension_bounds};
use accelsched::model::{scale_wcets, Factor};
use accelsched::oracle::{evaluate, optimal_by_enumeration, EnumerationBudget};
use accelsched::random::{random_assignment, random_instance, RandomSpec};
use accelsched::simulator::{check_trace, simulate, ReleasePattern, SimConfig};
use accelsched::{AccelPolicy, Assignment, JitterMode, ObjectiveKind, ProblemInstance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sample(seed: u64, spec: &RandomSpec) -> (ProblemInstance, Assignment) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = random_instance(&mut rng, spec);
    let a = random_assignment(&mut rng, &inst);
    (inst, a)
}

fn wide() -> RandomSpec {
    RandomSpec { max_tasks: 5, max_cores: 3, max_accelerable: 3, ..RandomSpec::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let (inst, a) = sample(seed, &wide());
        prop_assert_eq!(ProblemInstance::from_json(&inst.to_json()).unwrap(), inst.clone());
        let doc = a.to_doc(&inst);
        prop_assert_eq!(Assignment::from_doc(&inst, &doc).unwrap(), a);
    }

    #[test]
    fn conservative_dominates_exact_dominates_fixed_point(seed in any::<u64>()) {
        let (inst, a) = sample(seed, &wide());
        for p in AccelPolicy::ALL {
            let cons = checkpoint_wcrt(&inst, &a, p, JitterMode::Conservative);
            let exact = checkpoint_wcrt(&inst, &a, p, JitterMode::Exact);
            let fp = fixed_point_wcrt(&inst, &a, p);
            if cons.schedulable() {
                prop_assert!(exact.schedulable());
            }
            if exact.schedulable() {
                prop_assert!(fp.schedulable());
            }
            for i in 0..inst.num_tasks() {
                if let (Some(c), Some(e)) = (cons.wcrt[i], exact.wcrt[i]) {
                    prop_assert!(e <= c, "{p} task {i}: exact {e} > conservative {c}");
                }
                if let (Some(e), Some(f)) = (exact.wcrt[i], fp.wcrt[i]) {
                    prop_assert!(f <= e, "{p} task {i}: fixed point {f} > exact {e}");
                }
            }
        }
    }

    #[test]
    fn no_contention_suspends_least(seed in any::<u64>()) {
        let (inst, a) = sample(seed, &wide());
        let nc = suspension_bounds(&inst, &a, AccelPolicy::NoContention);
        for p in [AccelPolicy::RoundRobin, AccelPolicy::NonPreemptiveFp] {
            let other = suspension_bounds(&inst, &a, p);
            for (i, segs) in nc.per_segment.iter().enumerate() {
                for (j, s) in segs {
                    if let Some(o) = other.per_segment[i][j] {
                        prop_assert!(s.unwrap() <= o);
                    }
                }
            }
        }
    }

    #[test]
    fn no_contention_objective_is_lowest(seed in any::<u64>()) {
        let (inst, a) = sample(seed, &wide());
        for o in ObjectiveKind::ALL {
            let nc = evaluate(&inst, &a, AccelPolicy::NoContention, o);
            for p in [AccelPolicy::RoundRobin, AccelPolicy::NonPreemptiveFp] {
                if let Some(v) = evaluate(&inst, &a, p, o) {
                    prop_assert!(nc.is_some_and(|n| n <= v));
                }
            }
        }
    }

    #[test]
    fn demand_is_monotone(c in 0u64..1000, s in 0u64..1000, t in 1u64..20_000, bump in 1u64..500,
                          hp in prop::collection::vec((1u64..500, 100u64..5000, 0u64..3000), 0..4)) {
        let base = demand(c, s, t, &hp);
        prop_assert!(demand(c + bump, s, t, &hp) >= base);
        prop_assert!(demand(c, s + bump, t, &hp) >= base);
        for k in 0..hp.len() {
            let mut more = hp.clone();
            more[k].0 += bump;
            prop_assert!(demand(c, s, t, &more) >= base);
            let mut jit = hp.clone();
            jit[k].2 += bump;
            prop_assert!(demand(c, s, t, &jit) >= base);
        }
        let mut extra = hp.clone();
        extra.push((bump, 1000, 0));
        prop_assert!(demand(c, s, t, &extra) >= base);
    }

    #[test]
    fn passing_checkpoint_bounds_the_fixed_point(c in 1u64..2000, s in 0u64..2000, d in 1000u64..30_000,
                          hp in prop::collection::vec((1u64..800, 500u64..8000, 0u64..3000), 0..4)) {
        let pts = checkpoints(d, &hp.iter().map(|&(_, t, j)| (t, j)).collect::<Vec<_>>());
        if let Some(pass) = demand_test(c, s, &pts, &hp) {
            let mut r = c + s;
            while r <= pass.checkpoint {
                let next = demand(c, s, r, &hp);
                if next <= r {
                    break;
                }
                r = next;
            }
            prop_assert!(r <= pass.checkpoint && r <= pass.demand);
        }
    }

    #[test]
    fn scaling_down_keeps_oracle_feasibility(seed in any::<u64>(), num in 1u64..10) {
        let (inst, _) = sample(seed, &RandomSpec::default());
        let scaled = scale_wcets(&inst, Factor::new(num, 10)).unwrap();
        let budget = EnumerationBudget::default();
        for p in AccelPolicy::ALL {
            let before = optimal_by_enumeration(&inst, p, ObjectiveKind::MinSumRt, &budget).unwrap();
            if before.is_some() {
                let after = optimal_by_enumeration(&scaled, p, ObjectiveKind::MinSumRt, &budget).unwrap();
                prop_assert!(after.is_some(), "{p}: feasible at 1, infeasible at {num}/10");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulation_never_beats_the_bounds(seed in any::<u64>()) {
        let (inst, a) = sample(seed, &wide());
        for p in AccelPolicy::ALL {
            let cons = checkpoint_wcrt(&inst, &a, p, JitterMode::Conservative);
            let fp = fixed_point_wcrt(&inst, &a, p);
            if !fp.schedulable() {
                continue;
            }
            for release in [ReleasePattern::Synchronous, ReleasePattern::Jittered { seed }] {
                let mut cfg = SimConfig::new(p);
                cfg.release = release;
                cfg.horizon = Some(cfg.effective_horizon(&inst).min(2_000_000));
                let trace = simulate(&inst, &a, &cfg).unwrap();
                prop_assert_eq!(check_trace(&trace), vec![]);
                prop_assert!(work_conserving(&inst, &a, &trace));
                for (i, t) in inst.tasks.iter().enumerate() {
                    let Some(obs) = trace.observed_wcrt[&t.id] else { continue };
                    prop_assert!(obs <= fp.wcrt[i].unwrap(), "{p} {}: {obs} > {:?}", t.id, fp.wcrt[i]);
                    if let Some(c) = cons.wcrt[i] {
                        prop_assert!(obs <= c);
                    }
                }
            }
        }
    }
}

/// A core never idles while a job mapped to it can run.
fn work_conserving(inst: &ProblemInstance, a: &Assignment, trace: &accelsched::simulator::SimTrace) -> bool {
    use accelsched::simulator::EventKind::*;
    use std::collections::HashMap;
    let mut ready: HashMap<(String, u64), bool> = HashMap::new();
    let mut running: HashMap<usize, (String, u64)> = HashMap::new();
    let events = &trace.events;
    let mut k = 0;
    while k < events.len() {
        let now = events[k].time;
        while k < events.len() && events[k].time == now {
            let e = &events[k];
            let key = (e.task.clone(), e.job);
            match e.kind {
                Release | AccelDone => {
                    ready.insert(key, true);
                }
                Offload | Finish => {
                    ready.insert(key, false);
                    if let Some(c) = e.core {
                        running.remove(&c);
                    }
                }
                Preempt => {
                    if let Some(c) = e.core {
                        running.remove(&c);
                    }
                }
                Start | Resume => {
                    running.insert(e.core.unwrap(), key);
                }
                AccelStart => {}
            }
            k += 1;
        }
        for ((task, _), &r) in &ready {
            let core = a.core_of[inst.task_index(task).unwrap()];
            if r && !running.contains_key(&core) {
                return false;
            }
        }
    }
    true
}
