use super::AnalysisError;
use crate::model::{ChainSpec, ProblemInstance};
use crate::Time;

/// End-to-end latency of a time-triggered chain:
/// `sum (R_i + T_i) - T_first` over its members.
///
/// `wcrt` is indexed like `inst.tasks`. Returns `Ok(None)` when a member
/// has no bound.
pub fn chain_latency(
    inst: &ProblemInstance,
    wcrt: &[Option<Time>],
    chain: &ChainSpec,
) -> Result<Option<Time>, AnalysisError> {
    let mut members = Vec::with_capacity(chain.tasks.len());
    for id in &chain.tasks {
        let i = inst.task_index(id).ok_or_else(|| AnalysisError::MissingTask {
            chain: chain.id.clone(),
            task: id.clone(),
        })?;
        members.push(i);
    }
    let Some(&first) = members.first() else {
        return Ok(Some(0));
    };
    let mut total: Time = 0;
    for &i in &members {
        let Some(r) = wcrt.get(i).copied().flatten() else {
            return Ok(None);
        };
        total += r + inst.tasks[i].period;
    }
    Ok(Some(total - inst.tasks[first].period))
}
