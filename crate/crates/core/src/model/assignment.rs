use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{ModelError, ProblemInstance, WATERS_PUBLISHED_RR};
use crate::Time;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssignmentError {
    #[error("assignment covers {got} tasks, instance has {expected}")]
    TaskCount { expected: usize, got: usize },
    #[error("task {task:?}: core index {core} out of range")]
    CoreOutOfRange { task: String, core: usize },
    #[error("priorities are not a permutation of 1..={0}")]
    NotAPermutation(usize),
    #[error("task {task:?}: expected {expected} acceleration flags, got {got}")]
    SegmentCount { task: String, expected: usize, got: usize },
    #[error("task {task:?} segment {segment}: acceleration flag contradicts implementation type")]
    ImplMismatch { task: String, segment: usize },
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("unknown core {0:?}")]
    UnknownCore(String),
    #[error("task {0:?} missing from assignment document")]
    MissingTask(String),
}

/// One design point: where each task runs, its priority, and which
/// segments are offloaded. Vectors are indexed by task position in the
/// instance; a larger priority value means a higher priority.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub core_of: Vec<usize>,
    pub priority_of: Vec<u32>,
    pub accelerated: Vec<Vec<bool>>,
}

impl Assignment {
    pub fn validate(&self, inst: &ProblemInstance) -> Result<(), AssignmentError> {
        let n = inst.num_tasks();
        for got in [self.core_of.len(), self.priority_of.len(), self.accelerated.len()] {
            if got != n {
                return Err(AssignmentError::TaskCount { expected: n, got });
            }
        }
        for (i, &k) in self.core_of.iter().enumerate() {
            if k >= inst.num_cores() {
                return Err(AssignmentError::CoreOutOfRange {
                    task: inst.tasks[i].id.clone(),
                    core: k,
                });
            }
        }
        let mut seen = vec![false; n];
        for &p in &self.priority_of {
            let slot = (p as usize).checked_sub(1).filter(|&s| s < n);
            match slot {
                Some(s) if !seen[s] => seen[s] = true,
                _ => return Err(AssignmentError::NotAPermutation(n)),
            }
        }
        for (i, task) in inst.tasks.iter().enumerate() {
            let flags = &self.accelerated[i];
            if flags.len() != task.segments.len() {
                return Err(AssignmentError::SegmentCount {
                    task: task.id.clone(),
                    expected: task.segments.len(),
                    got: flags.len(),
                });
            }
            for (j, (seg, &a)) in task.segments.iter().zip(flags).enumerate() {
                let ok = match seg.impl_type {
                    super::ImplType::Cpu => !a,
                    super::ImplType::Hwa => a,
                    super::ImplType::CpuHwa => true,
                };
                if !ok {
                    return Err(AssignmentError::ImplMismatch {
                        task: task.id.clone(),
                        segment: j,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn higher_priority(&self, a: usize, b: usize) -> bool {
        self.priority_of[a] > self.priority_of[b]
    }

    /// Tasks sharing `task`'s core with a higher priority.
    pub fn hp_on_core(&self, task: usize) -> Vec<usize> {
        (0..self.core_of.len())
            .filter(|&s| s != task && self.core_of[s] == self.core_of[task] && self.higher_priority(s, task))
            .collect()
    }

    /// Task indices sorted from highest to lowest priority.
    pub fn by_decreasing_priority(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.priority_of.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(self.priority_of[i]));
        order
    }

    pub fn uses_accel(&self, task: usize) -> bool {
        self.accelerated[task].iter().any(|&a| a)
    }

    /// Core-side WCET of a task (C_i) on its assigned core.
    pub fn core_wcet(&self, inst: &ProblemInstance, task: usize) -> Time {
        let ty = inst.core_type(self.core_of[task]);
        inst.tasks[task]
            .segments
            .iter()
            .zip(&self.accelerated[task])
            .map(|(s, &a)| s.core_wcet(ty, a))
            .sum()
    }

    /// Accelerator-side WCET of the offloaded segments of a task.
    pub fn accel_wcet(&self, inst: &ProblemInstance, task: usize) -> Time {
        self.accelerated_segments(task)
            .map(|j| inst.tasks[task].segments[j].accel_wcet())
            .sum()
    }

    /// Longest accelerator-side WCET among a task's offloaded segments.
    pub fn longest_accel_segment(&self, inst: &ProblemInstance, task: usize) -> Time {
        self.accelerated_segments(task)
            .map(|j| inst.tasks[task].segments[j].accel_wcet())
            .max()
            .unwrap_or(0)
    }

    pub fn accelerated_segments(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        self.accelerated[task]
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(j, _)| j)
    }

    /// Ids of tasks with at least one offloaded segment, in instance order.
    pub fn accelerated_task_ids<'a>(&self, inst: &'a ProblemInstance) -> Vec<&'a str> {
        (0..inst.num_tasks())
            .filter(|&i| self.uses_accel(i))
            .map(|i| inst.tasks[i].id.as_str())
            .collect()
    }

    /// Every task on core 0, priorities by position, acceleration only
    /// where forced.
    pub fn trivial(inst: &ProblemInstance) -> Self {
        Assignment {
            core_of: vec![0; inst.num_tasks()],
            priority_of: (1..=inst.num_tasks() as u32).rev().collect(),
            accelerated: inst
                .tasks
                .iter()
                .map(|t| t.segments.iter().map(|s| s.forced_accel()).collect())
                .collect(),
        }
    }

    /// The published round-robin min-max-latency design point for the
    /// bundled WATERS instance. The published priority column starts at 0;
    /// it is shifted by one and read with larger values winning.
    pub fn waters_published_rr(inst: &ProblemInstance) -> Result<Self, AssignmentError> {
        let mut out = Assignment {
            core_of: vec![0; inst.num_tasks()],
            priority_of: vec![0; inst.num_tasks()],
            accelerated: inst.tasks.iter().map(|t| vec![false; t.segments.len()]).collect(),
        };
        for (id, prio, core, acc) in WATERS_PUBLISHED_RR {
            let i = inst
                .task_index(id)
                .ok_or_else(|| AssignmentError::UnknownTask(id.to_string()))?;
            out.core_of[i] = core;
            out.priority_of[i] = prio + 1;
            out.accelerated[i].iter_mut().for_each(|a| *a = acc);
        }
        out.validate(inst)?;
        Ok(out)
    }

    pub fn to_doc(&self, inst: &ProblemInstance) -> AssignmentDoc {
        let ids = inst.tasks.iter().map(|t| t.id.clone());
        AssignmentDoc {
            core_of: ids
                .clone()
                .zip(&self.core_of)
                .map(|(id, &k)| (id, inst.platform.cores[k].id.clone()))
                .collect(),
            priority_of: ids.clone().zip(self.priority_of.iter().copied()).collect(),
            accelerated: ids.zip(self.accelerated.iter().cloned()).collect(),
        }
    }

    pub fn from_doc(inst: &ProblemInstance, doc: &AssignmentDoc) -> Result<Self, AssignmentError> {
        for id in doc.core_of.keys().chain(doc.priority_of.keys()).chain(doc.accelerated.keys()) {
            if inst.task_index(id).is_none() {
                return Err(AssignmentError::UnknownTask(id.clone()));
            }
        }
        let mut out = Assignment {
            core_of: Vec::with_capacity(inst.num_tasks()),
            priority_of: Vec::with_capacity(inst.num_tasks()),
            accelerated: Vec::with_capacity(inst.num_tasks()),
        };
        for task in &inst.tasks {
            let missing = || AssignmentError::MissingTask(task.id.clone());
            let core_id = doc.core_of.get(&task.id).ok_or_else(missing)?;
            let k = inst
                .core_index(core_id)
                .ok_or_else(|| AssignmentError::UnknownCore(core_id.clone()))?;
            out.core_of.push(k);
            out.priority_of.push(*doc.priority_of.get(&task.id).ok_or_else(missing)?);
            let flags = match doc.accelerated.get(&task.id) {
                Some(f) => f.clone(),
                // Omitted flags default to the forced choice.
                None => task.segments.iter().map(|s| s.forced_accel()).collect(),
            };
            out.accelerated.push(flags);
        }
        out.validate(inst)?;
        Ok(out)
    }
}

/// JSON form of an [`Assignment`], keyed by task and core ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentDoc {
    pub core_of: IndexMap<String, String>,
    pub priority_of: IndexMap<String, u32>,
    #[serde(default)]
    pub accelerated: IndexMap<String, Vec<bool>>,
}

impl AssignmentDoc {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_waters;

    #[test]
    fn published_rr_is_valid() {
        let w = builtin_waters();
        let a = Assignment::waters_published_rr(&w).unwrap();
        assert_eq!(a.accelerated_task_ids(&w), ["Detection"]);
        // Lidar Grabber carries the largest published value.
        assert_eq!(a.by_decreasing_priority()[0], 0);
    }

    #[test]
    fn doc_round_trip() {
        let w = builtin_waters();
        let a = Assignment::waters_published_rr(&w).unwrap();
        let doc = a.to_doc(&w);
        let text = serde_json::to_string(&doc).unwrap();
        let back: AssignmentDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(Assignment::from_doc(&w, &back).unwrap(), a);
    }

    #[test]
    fn rejections() {
        let w = builtin_waters();
        let good = Assignment::waters_published_rr(&w).unwrap();

        let mut a = good.clone();
        a.priority_of[0] = a.priority_of[1];
        assert_eq!(a.validate(&w), Err(AssignmentError::NotAPermutation(9)));

        let mut a = good.clone();
        a.accelerated[8][0] = false;
        assert!(matches!(a.validate(&w), Err(AssignmentError::ImplMismatch { .. })));

        let mut a = good.clone();
        a.accelerated[0][0] = true;
        assert!(matches!(a.validate(&w), Err(AssignmentError::ImplMismatch { .. })));

        let mut a = good;
        a.core_of[3] = 6;
        assert!(matches!(a.validate(&w), Err(AssignmentError::CoreOutOfRange { .. })));
    }

    #[test]
    fn wcets_follow_core_type() {
        let w = builtin_waters();
        let a = Assignment::waters_published_rr(&w).unwrap();
        // Detection on core 0 (A57), accelerated.
        assert_eq!(a.core_wcet(&w, 8), 4_958);
        assert_eq!(a.accel_wcet(&w, 8), 116_000);
        // Localization on core 4 (Denver), not accelerated.
        assert_eq!(a.core_wcet(&w, 6), 294_808);
        assert_eq!(a.accel_wcet(&w, 6), 0);
    }
}
