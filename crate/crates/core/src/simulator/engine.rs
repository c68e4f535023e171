use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::trace::{EventKind, JobRecord, SimTrace, TraceEvent};
use super::{ReleasePattern, SimConfig, SimError, MAX_JOBS};
use crate::analysis::AccelPolicy;
use crate::model::{Assignment, ProblemInstance};
use crate::Time;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Where {
    Core,
    Accel,
}

#[derive(Debug, Clone, Copy)]
struct Phase {
    at: Where,
    len: Time,
    segment: usize,
    /// Last core phase before an accelerator phase.
    offload: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Ready,
    Running,
    Waiting,
    OnAccel,
    Done,
}

#[derive(Debug)]
struct Job {
    task: usize,
    seq: u64,
    release: Time,
    phases: Vec<Phase>,
    pc: usize,
    remaining: Time,
    state: State,
    started: bool,
    request_time: Time,
    accel_end: Time,
}

struct Sim<'a> {
    inst: &'a ProblemInstance,
    assign: &'a Assignment,
    policy: AccelPolicy,
    trace_enabled: bool,
    rng: Option<ChaCha8Rng>,
    now: Time,
    jobs: Vec<Job>,
    running: Vec<Option<usize>>,
    /// Per core, jobs that want the core (ready or running).
    ready: Vec<Vec<usize>>,
    /// Job indices waiting for the accelerator.
    waiting: Vec<usize>,
    in_service: Vec<usize>,
    rr_next: usize,
    events: Vec<TraceEvent>,
    records: Vec<JobRecord>,
}

impl Sim<'_> {
    fn draw(&mut self, wcet: Time) -> Time {
        match &mut self.rng {
            None => wcet,
            Some(rng) if wcet > 1 => rng.gen_range(wcet.div_ceil(2)..=wcet),
            Some(_) => wcet,
        }
    }

    fn emit(&mut self, job: usize, kind: EventKind, core: Option<usize>, segment: Option<usize>) {
        if self.trace_enabled {
            let j = &self.jobs[job];
            self.events.push(TraceEvent {
                time: self.now,
                task: self.inst.tasks[j.task].id.clone(),
                job: j.seq,
                kind,
                core,
                segment,
            });
        }
    }

    fn release(&mut self, task: usize, seq: u64) {
        let t = &self.inst.tasks[task];
        let ty = self.inst.core_type(self.assign.core_of[task]).to_string();
        let mut phases = Vec::new();
        for (j, seg) in t.segments.iter().enumerate() {
            if self.assign.accelerated[task][j] {
                let o = self.draw(seg.offload_on(&ty));
                let e = self.draw(seg.accel_wcet());
                let f = self.draw(seg.finalize_on(&ty));
                phases.push(Phase { at: Where::Core, len: o, segment: j, offload: true });
                phases.push(Phase { at: Where::Accel, len: e, segment: j, offload: false });
                phases.push(Phase { at: Where::Core, len: f, segment: j, offload: false });
            } else {
                let c = self.draw(seg.exec_on(&ty));
                phases.push(Phase { at: Where::Core, len: c, segment: j, offload: false });
            }
        }
        let id = self.jobs.len();
        self.jobs.push(Job {
            task,
            seq,
            release: self.now,
            phases,
            pc: 0,
            remaining: 0,
            state: State::Ready,
            started: false,
            request_time: 0,
            accel_end: 0,
        });
        self.emit(id, EventKind::Release, None, None);
        self.enter_phase(id, None);
    }

    /// Moves a job into phase `pc`, skipping zero-length core phases.
    /// `core` is the core the job holds, if any.
    fn enter_phase(&mut self, id: usize, core: Option<usize>) {
        loop {
            let job = &self.jobs[id];
            let Some(&ph) = job.phases.get(job.pc) else {
                self.jobs[id].state = State::Done;
                self.leave_core(id);
                if let Some(k) = core {
                    self.running[k] = None;
                }
                self.emit(id, EventKind::Finish, core, None);
                let j = &self.jobs[id];
                self.records.push(JobRecord {
                    task: self.inst.tasks[j.task].id.clone(),
                    job: j.seq,
                    release: j.release,
                    finish: self.now,
                    response: self.now - j.release,
                });
                return;
            };
            match ph.at {
                Where::Core if ph.len == 0 => {
                    if ph.offload {
                        // The request goes out without needing the core.
                        self.jobs[id].pc += 1;
                        if let Some(k) = core {
                            self.running[k] = None;
                        }
                        self.submit(id, core, ph.segment);
                        return;
                    }
                    self.jobs[id].pc += 1;
                }
                Where::Core => {
                    let j = &mut self.jobs[id];
                    j.remaining = ph.len;
                    j.state = if core.is_some() { State::Running } else { State::Ready };
                    let k = self.assign.core_of[j.task];
                    if !self.ready[k].contains(&id) {
                        self.ready[k].push(id);
                    }
                    return;
                }
                Where::Accel => {
                    self.submit(id, core, ph.segment);
                    return;
                }
            }
        }
    }

    fn leave_core(&mut self, id: usize) {
        let k = self.assign.core_of[self.jobs[id].task];
        self.ready[k].retain(|&x| x != id);
    }

    /// Job leaves its core (if any) and queues for the accelerator. Its `pc`
    /// must point at the accelerator phase.
    fn submit(&mut self, id: usize, core: Option<usize>, segment: usize) {
        self.leave_core(id);
        if let Some(k) = core {
            self.running[k] = None;
        }
        self.emit(id, EventKind::Offload, core, Some(segment));
        let j = &mut self.jobs[id];
        j.state = State::Waiting;
        j.request_time = self.now;
        self.waiting.push(id);
    }

    fn core_phase_done(&mut self, id: usize, core: usize) {
        let ph = self.jobs[id].phases[self.jobs[id].pc];
        self.jobs[id].pc += 1;
        if ph.offload {
            self.submit(id, Some(core), ph.segment);
        } else {
            self.enter_phase(id, Some(core));
        }
    }

    fn accel_done(&mut self, id: usize) {
        let seg = self.jobs[id].phases[self.jobs[id].pc].segment;
        self.in_service.retain(|&x| x != id);
        self.emit(id, EventKind::AccelDone, None, Some(seg));
        self.jobs[id].pc += 1;
        self.enter_phase(id, None);
    }

    fn pick_request(&mut self) -> Option<usize> {
        if self.waiting.is_empty() {
            return None;
        }
        let pos = match self.policy {
            AccelPolicy::NoContention => 0,
            AccelPolicy::NonPreemptiveFp => {
                let key = |&id: &usize| {
                    let j = &self.jobs[id];
                    (std::cmp::Reverse(self.assign.priority_of[j.task]), j.request_time, j.release, id)
                };
                (0..self.waiting.len()).min_by_key(|&p| key(&self.waiting[p]))?
            }
            AccelPolicy::RoundRobin => {
                let n = self.inst.num_tasks();
                let key = |&id: &usize| {
                    let j = &self.jobs[id];
                    ((j.task + n - self.rr_next) % n, j.request_time, j.release, id)
                };
                let p = (0..self.waiting.len()).min_by_key(|&p| key(&self.waiting[p]))?;
                self.rr_next = (self.jobs[self.waiting[p]].task + 1) % n;
                p
            }
        };
        Some(self.waiting.remove(pos))
    }

    fn dispatch_accel(&mut self) {
        let parallel = self.policy == AccelPolicy::NoContention;
        while parallel || self.in_service.is_empty() {
            let Some(id) = self.pick_request() else { break };
            let ph = self.jobs[id].phases[self.jobs[id].pc];
            self.emit(id, EventKind::AccelStart, None, Some(ph.segment));
            let j = &mut self.jobs[id];
            j.state = State::OnAccel;
            j.accel_end = self.now + ph.len;
            self.in_service.push(id);
        }
    }

    fn dispatch_cores(&mut self) {
        for k in 0..self.running.len() {
            let best = self.ready[k].iter().copied().min_by_key(|&id| {
                let j = &self.jobs[id];
                (std::cmp::Reverse(self.assign.priority_of[j.task]), j.release, id)
            });
            if best == self.running[k] {
                continue;
            }
            if let Some(old) = self.running[k] {
                self.jobs[old].state = State::Ready;
                self.emit(old, EventKind::Preempt, Some(k), None);
            }
            self.running[k] = best;
            if let Some(id) = best {
                let kind = if self.jobs[id].started { EventKind::Resume } else { EventKind::Start };
                self.jobs[id].started = true;
                self.jobs[id].state = State::Running;
                self.emit(id, kind, Some(k), None);
            }
        }
    }
}

/// Runs the assignment and records observed response times.
pub fn simulate(inst: &ProblemInstance, assign: &Assignment, config: &SimConfig) -> Result<SimTrace, SimError> {
    assign.validate(inst)?;
    let horizon = config.effective_horizon(inst);
    if horizon == 0 {
        return Err(SimError::ZeroHorizon);
    }
    let n = inst.num_tasks();
    let total_jobs: u64 = inst.tasks.iter().map(|t| horizon.div_ceil(t.period)).sum();
    if total_jobs > MAX_JOBS {
        return Err(SimError::HorizonOverflow(format!(
            "{total_jobs} jobs in {horizon} us exceeds {MAX_JOBS}"
        )));
    }
    let mut rng = match config.release {
        ReleasePattern::Synchronous => None,
        ReleasePattern::Jittered { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut next_release: Vec<Time> = inst
        .tasks
        .iter()
        .map(|t| rng.as_mut().map_or(0, |r| r.gen_range(0..t.period)))
        .collect();
    let mut next_seq = vec![0u64; n];
    let mut sim = Sim {
        inst,
        assign,
        policy: config.policy,
        trace_enabled: config.trace_enabled,
        rng,
        now: 0,
        jobs: Vec::new(),
        running: vec![None; inst.num_cores()],
        ready: vec![Vec::new(); inst.num_cores()],
        waiting: Vec::new(),
        in_service: Vec::new(),
        rr_next: 0,
        events: Vec::new(),
        records: Vec::new(),
    };
    let overflow = || SimError::HorizonOverflow("time exceeds the representable range".into());

    loop {
        let mut next: Option<Time> = None;
        let mut consider = |t: Time| next = Some(next.map_or(t, |n: Time| n.min(t)));
        for &r in next_release.iter().filter(|&&r| r < horizon) {
            consider(r);
        }
        for id in sim.running.iter().flatten() {
            consider(sim.now.checked_add(sim.jobs[*id].remaining).ok_or_else(overflow)?);
        }
        for &id in &sim.in_service {
            consider(sim.jobs[id].accel_end);
        }
        let Some(t) = next else { break };
        let dt = t - sim.now;
        for id in sim.running.iter().flatten() {
            sim.jobs[*id].remaining -= dt;
        }
        sim.now = t;

        let mut done: Vec<usize> = sim.in_service.iter().copied().filter(|&id| sim.jobs[id].accel_end == t).collect();
        done.sort_unstable();
        for id in done {
            sim.accel_done(id);
        }
        for k in 0..sim.running.len() {
            if let Some(id) = sim.running[k] {
                if sim.jobs[id].remaining == 0 {
                    sim.core_phase_done(id, k);
                }
            }
        }
        for i in 0..n {
            if next_release[i] == t && t < horizon {
                sim.release(i, next_seq[i]);
                next_seq[i] += 1;
                next_release[i] = t.checked_add(inst.tasks[i].period).ok_or_else(overflow)?;
            }
        }
        // Dispatching can itself finish zero-length work, so repeat until
        // nothing changes at this instant.
        loop {
            let before = (sim.events.len(), sim.records.len(), sim.in_service.len(), sim.running.clone());
            sim.dispatch_accel();
            sim.dispatch_cores();
            let mut progressed = false;
            for k in 0..sim.running.len() {
                if let Some(id) = sim.running[k] {
                    if sim.jobs[id].remaining == 0 {
                        sim.core_phase_done(id, k);
                        progressed = true;
                    }
                }
            }
            let after = (sim.events.len(), sim.records.len(), sim.in_service.len(), sim.running.clone());
            if !progressed && before == after {
                break;
            }
        }
    }

    let mut observed: IndexMap<String, Option<Time>> = inst.tasks.iter().map(|t| (t.id.clone(), None)).collect();
    for r in &sim.records {
        let slot = observed.get_mut(&r.task).expect("known task");
        *slot = Some(slot.map_or(r.response, |m| m.max(r.response)));
    }
    Ok(SimTrace {
        horizon,
        events: sim.events,
        observed_wcrt: observed,
        jobs: sim.records,
        serialized_accel: config.policy != AccelPolicy::NoContention,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Core, ImplType, PlatformSpec, SegmentSpec, TaskSpec};
    use crate::simulator::check_trace;
    use std::collections::BTreeMap;

    fn x(v: Time) -> BTreeMap<String, Time> {
        BTreeMap::from([("X".to_string(), v)])
    }

    fn platform(cores: usize) -> PlatformSpec {
        PlatformSpec {
            core_types: vec!["X".into()],
            cores: (0..cores).map(|k| Core { id: k.to_string(), core_type: "X".into() }).collect(),
            accelerator: true,
        }
    }

    fn hwa(o: Time, e: Time, f: Time) -> SegmentSpec {
        SegmentSpec { impl_type: ImplType::Hwa, exec: BTreeMap::new(), offload: x(o), finalize: x(f), accel: Some(e) }
    }

    fn task(id: &str, period: Time, segments: Vec<SegmentSpec>) -> TaskSpec {
        TaskSpec { id: id.into(), period, deadline: period, segments }
    }

    fn assign(inst: &ProblemInstance, cores: Vec<usize>, prio: Vec<u32>) -> Assignment {
        Assignment {
            core_of: cores,
            priority_of: prio,
            accelerated: inst.tasks.iter().map(|t| t.segments.iter().map(|s| s.forced_accel()).collect()).collect(),
        }
    }

    #[test]
    fn single_cpu_task() {
        let inst = ProblemInstance {
            platform: platform(1),
            tasks: vec![task("a", 10_000, vec![SegmentSpec::cpu(x(2_000))])],
            chains: vec![],
        };
        let a = assign(&inst, vec![0], vec![1]);
        let tr = simulate(&inst, &a, &SimConfig::new(AccelPolicy::RoundRobin)).unwrap();
        assert_eq!(tr.observed_wcrt["a"], Some(2_000));
        assert_eq!(check_trace(&tr), vec![]);
    }

    #[test]
    fn three_segments_third_accelerated() {
        let inst = ProblemInstance {
            platform: platform(1),
            tasks: vec![task(
                "a",
                100_000,
                vec![SegmentSpec::cpu(x(1_000)), SegmentSpec::cpu(x(2_000)), hwa(300, 4_000, 200)],
            )],
            chains: vec![],
        };
        let a = assign(&inst, vec![0], vec![1]);
        for p in AccelPolicy::ALL {
            let tr = simulate(&inst, &a, &SimConfig::new(p)).unwrap();
            assert_eq!(tr.observed_wcrt["a"], Some(1_000 + 2_000 + 300 + 4_000 + 200));
            assert_eq!(check_trace(&tr), vec![]);
        }
    }

    #[test]
    fn preemption_on_shared_core() {
        let inst = ProblemInstance {
            platform: platform(1),
            tasks: vec![task("hi", 5_000, vec![SegmentSpec::cpu(x(1_000))]), task("lo", 20_000, vec![SegmentSpec::cpu(x(5_000))])],
            chains: vec![],
        };
        let a = assign(&inst, vec![0, 0], vec![2, 1]);
        let tr = simulate(&inst, &a, &SimConfig::new(AccelPolicy::RoundRobin)).unwrap();
        // lo runs 1000..5000 then is preempted at 5000, finishes at 7000.
        assert_eq!(tr.observed_wcrt["lo"], Some(7_000));
        assert_eq!(tr.observed_wcrt["hi"], Some(1_000));
        assert!(tr.events.iter().any(|e| e.kind == EventKind::Preempt));
        assert_eq!(check_trace(&tr), vec![]);
    }

    #[test]
    fn accelerator_is_shared() {
        let inst = ProblemInstance {
            platform: platform(2),
            tasks: vec![task("a", 50_000, vec![hwa(0, 4_000, 0)]), task("b", 50_000, vec![hwa(0, 3_000, 0)])],
            chains: vec![],
        };
        let a = assign(&inst, vec![0, 1], vec![1, 2]);
        let rr = simulate(&inst, &a, &SimConfig::new(AccelPolicy::RoundRobin)).unwrap();
        // Round-robin starts at task 0.
        assert_eq!(rr.observed_wcrt["a"], Some(4_000));
        assert_eq!(rr.observed_wcrt["b"], Some(7_000));
        let fp = simulate(&inst, &a, &SimConfig::new(AccelPolicy::NonPreemptiveFp)).unwrap();
        assert_eq!(fp.observed_wcrt["b"], Some(3_000));
        assert_eq!(fp.observed_wcrt["a"], Some(7_000));
        let nc = simulate(&inst, &a, &SimConfig::new(AccelPolicy::NoContention)).unwrap();
        assert_eq!(nc.observed_wcrt["a"], Some(4_000));
        assert_eq!(nc.observed_wcrt["b"], Some(3_000));
        for tr in [rr, fp, nc] {
            assert_eq!(check_trace(&tr), vec![]);
        }
    }

    #[test]
    fn jittered_is_deterministic_per_seed() {
        let inst = crate::model::builtin_waters();
        let a = Assignment::waters_published_rr(&inst).unwrap();
        let cfg = SimConfig {
            horizon: Some(1_000_000),
            release: ReleasePattern::Jittered { seed: 9 },
            policy: AccelPolicy::RoundRobin,
            trace_enabled: true,
        };
        let t1 = simulate(&inst, &a, &cfg).unwrap();
        let t2 = simulate(&inst, &a, &cfg).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(check_trace(&t1), vec![]);
    }

    #[test]
    fn horizon_errors() {
        let inst = ProblemInstance {
            platform: platform(1),
            tasks: vec![task("a", 1, vec![SegmentSpec::cpu(x(1))])],
            chains: vec![],
        };
        let a = assign(&inst, vec![0], vec![1]);
        let mut cfg = SimConfig::new(AccelPolicy::RoundRobin);
        cfg.horizon = Some(0);
        assert_eq!(simulate(&inst, &a, &cfg), Err(SimError::ZeroHorizon));
        cfg.horizon = Some(u64::MAX);
        assert!(matches!(simulate(&inst, &a, &cfg), Err(SimError::HorizonOverflow(_))));
    }
}
