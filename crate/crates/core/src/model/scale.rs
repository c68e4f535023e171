use num_rational::Ratio;
use num_traits::Zero;

use super::{ModelError, ProblemInstance};
use crate::Time;

/// Exact positive scaling factor.
pub type Factor = Ratio<u64>;

/// Parses `"0.8"`, `"4/5"` or `"1"` into an exact ratio.
pub fn parse_factor(text: &str) -> Result<Factor, ModelError> {
    let text = text.trim();
    let bad = || ModelError::BadFactor(text.to_string());
    let factor = if let Some((num, den)) = text.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Ratio::new(num, den)
    } else if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let frac: u64 = frac.parse().map_err(|_| bad())?;
        let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
        Ratio::new(num, den)
    } else {
        Ratio::from_integer(text.parse().map_err(|_| bad())?)
    };
    if factor.is_zero() {
        return Err(ModelError::NonPositiveFactor(text.to_string()));
    }
    Ok(factor)
}

fn scale_time(value: Time, factor: Factor) -> Time {
    let num = value as u128 * *factor.numer() as u128;
    let den = *factor.denom() as u128;
    num.div_ceil(den) as Time
}

/// Multiplies every WCET (core phases and accelerator) by `factor`,
/// rounding up to whole microseconds. Periods, deadlines and chains are
/// left untouched.
pub fn scale_wcets(inst: &ProblemInstance, factor: Factor) -> Result<ProblemInstance, ModelError> {
    if factor.is_zero() {
        return Err(ModelError::NonPositiveFactor(factor.to_string()));
    }
    let mut out = inst.clone();
    for seg in out.tasks.iter_mut().flat_map(|t| t.segments.iter_mut()) {
        for v in seg
            .exec
            .values_mut()
            .chain(seg.offload.values_mut())
            .chain(seg.finalize.values_mut())
        {
            *v = scale_time(*v, factor);
        }
        if let Some(a) = seg.accel.as_mut() {
            *a = scale_time(*a, factor);
        }
    }
    Ok(out)
}
