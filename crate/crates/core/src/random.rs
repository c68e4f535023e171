//! Seeded random instances and assignments for property tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{
    Assignment, ChainSpec, Core, ImplType, PlatformSpec, ProblemInstance, SegmentSpec, TaskSpec,
};
use crate::Time;

/// Shape of generated instances.
#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub max_tasks: usize,
    pub max_cores: usize,
    /// Upper bound on segments with an accelerator implementation, over
    /// the whole instance.
    pub max_accelerable: usize,
    pub max_segments_per_task: usize,
    /// Per-core utilization range; the total is this times the core count.
    pub utilization: (f64, f64),
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            max_tasks: 3,
            max_cores: 2,
            max_accelerable: 2,
            max_segments_per_task: 2,
            utilization: (0.3, 0.9),
        }
    }
}

// Divisors of 200 ms keep hyperperiods short enough to simulate.
const PERIODS_MS: [Time; 8] = [5, 8, 10, 20, 25, 40, 50, 100];

/// UUniFast split of `total` into `n` shares.
fn uunifast(rng: &mut impl Rng, n: usize, total: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut sum = total;
    for k in 1..n {
        let next = sum * rng.gen::<f64>().powf(1.0 / (n - k) as f64);
        out.push(sum - next);
        sum = next;
    }
    out.push(sum);
    out
}

fn split(rng: &mut impl Rng, total: f64, parts: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..parts).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| total * x / s).collect()
}

pub fn random_instance(rng: &mut impl Rng, spec: &RandomSpec) -> ProblemInstance {
    let n = rng.gen_range(1..=spec.max_tasks);
    let m = rng.gen_range(1..=spec.max_cores);
    let num_types = rng.gen_range(1..=m);
    let core_types: Vec<String> = (0..num_types).map(|k| format!("T{k}")).collect();
    let cores = (0..m)
        .map(|k| Core { id: k.to_string(), core_type: core_types[k % num_types].clone() })
        .collect();
    // Relative speed of each core type.
    let speed: Vec<f64> = (0..num_types)
        .map(|k| if k == 0 { 1.0 } else { rng.gen_range(0.6..1.4) })
        .collect();

    let u_total = rng.gen_range(spec.utilization.0..=spec.utilization.1) * m as f64;
    let shares = uunifast(rng, n, u_total);
    let mut accel_left = spec.max_accelerable;
    let mut tasks = Vec::with_capacity(n);
    for (i, &u) in shares.iter().enumerate() {
        let period = PERIODS_MS[rng.gen_range(0..PERIODS_MS.len())] * 1000;
        let deadline = if rng.gen_bool(0.25) {
            (rng.gen_range(0.6..1.0) * period as f64 / 1000.0).ceil() as Time * 1000
        } else {
            period
        };
        let k = rng.gen_range(1..=spec.max_segments_per_task);
        let mut segments = Vec::with_capacity(k);
        for c in split(rng, u * period as f64, k) {
            let impl_type = if accel_left > 0 && rng.gen_bool(0.5) {
                accel_left -= 1;
                if rng.gen_bool(0.25) {
                    ImplType::Hwa
                } else {
                    ImplType::CpuHwa
                }
            } else {
                ImplType::Cpu
            };
            let off_frac = rng.gen_range(0.05..0.4);
            let fin_frac = rng.gen_range(0.0..0.2);
            let mut seg = SegmentSpec::cpu([]);
            seg.impl_type = impl_type;
            for (ty, s) in core_types.iter().zip(&speed) {
                let base = (c * s).max(1.0);
                let at = |f: f64| ((base * f).round() as Time).max(1);
                if impl_type.has_cpu_impl() {
                    seg.exec.insert(ty.clone(), at(1.0));
                }
                if impl_type.has_accel_impl() {
                    seg.offload.insert(ty.clone(), at(off_frac));
                    seg.finalize.insert(ty.clone(), (base * fin_frac).round() as Time);
                }
            }
            if impl_type.has_accel_impl() {
                seg.accel = Some(((c * rng.gen_range(0.1..0.8)).round() as Time).max(1));
            }
            segments.push(seg);
        }
        tasks.push(TaskSpec { id: format!("t{i}"), period, deadline, segments });
    }

    let num_chains = rng.gen_range(1..=2);
    let chains = (0..num_chains)
        .map(|x| {
            let mut ids: Vec<String> = tasks.iter().map(|t| t.id.clone()).collect();
            ids.shuffle(rng);
            ids.truncate(rng.gen_range(1..=n));
            ChainSpec { id: format!("c{x}"), tasks: ids }
        })
        .collect();

    ProblemInstance {
        platform: PlatformSpec { core_types, cores, accelerator: true },
        tasks,
        chains,
    }
}

/// Uniformly random valid assignment.
pub fn random_assignment(rng: &mut impl Rng, inst: &ProblemInstance) -> Assignment {
    let n = inst.num_tasks();
    let mut priority_of: Vec<u32> = (1..=n as u32).collect();
    priority_of.shuffle(rng);
    Assignment {
        core_of: (0..n).map(|_| rng.gen_range(0..inst.num_cores())).collect(),
        priority_of,
        accelerated: inst
            .tasks
            .iter()
            .map(|t| {
                t.segments
                    .iter()
                    .map(|s| match s.impl_type {
                        ImplType::Cpu => false,
                        ImplType::Hwa => true,
                        ImplType::CpuHwa => rng.gen_bool(0.5),
                    })
                    .collect()
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = RandomSpec::default();
        for _ in 0..500 {
            let inst = random_instance(&mut rng, &spec);
            assert_eq!(validate_instance(&inst), vec![]);
            assert!(inst.num_tasks() <= 3 && inst.num_cores() <= 2);
            let acc: usize = inst.tasks.iter().map(|t| t.accelerable_segments().count()).sum();
            assert!(acc <= 2);
            let a = random_assignment(&mut rng, &inst);
            a.validate(&inst).unwrap();
            assert!(inst.hyperperiod().unwrap() <= 200_000);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = RandomSpec::default();
        let a = random_instance(&mut ChaCha8Rng::seed_from_u64(3), &spec);
        let b = random_instance(&mut ChaCha8Rng::seed_from_u64(3), &spec);
        assert_eq!(a, b);
    }
}
