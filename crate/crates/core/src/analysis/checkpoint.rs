use crate::{ceil_div, Time};

/// Sorted, deduplicated instants at which the demand test is evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointSet {
    pub points: Vec<Time>,
}

/// Checkpoints for deadline `d` against interferers `(T_h, J_h)`: the
/// last activation of each interferer that still fits before `d`, plus `d`.
pub fn checkpoints(d: Time, interferers: &[(Time, Time)]) -> CheckpointSet {
    let mut points = vec![d];
    for &(t, j) in interferers {
        // T - J < D  <=>  T < D + J
        if t < d + j {
            let v = ((d + j) / t) * t;
            if v > j {
                points.push(v - j);
            }
        }
    }
    points.retain(|&p| p > 0 && p <= d);
    points.sort_unstable();
    points.dedup();
    CheckpointSet { points }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemandPass {
    pub checkpoint: Time,
    pub demand: Time,
}

/// `C + S + sum ceil((t + J_h) / T_h) * C_h` over interferers `(C_h, T_h, J_h)`.
pub fn demand(c: Time, s: Time, t: Time, interferers: &[(Time, Time, Time)]) -> Time {
    c + s
        + interferers
            .iter()
            .map(|&(ch, th, jh)| ceil_div(t + jh, th) * ch)
            .sum::<Time>()
}

/// First checkpoint (in increasing order) where the demand fits.
pub fn demand_test(
    c: Time,
    s: Time,
    points: &CheckpointSet,
    interferers: &[(Time, Time, Time)],
) -> Option<DemandPass> {
    points.points.iter().find_map(|&t| {
        let w = demand(c, s, t, interferers);
        (w <= t).then_some(DemandPass { checkpoint: t, demand: w })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn no_interferers() {
        assert_eq!(checkpoints(10_000, &[]).points, [10_000]);
    }

    #[test]
    fn last_activation_before_deadline() {
        assert_eq!(checkpoints(10_000, &[(4_000, 1_000)]).points, [7_000, 10_000]);
    }

    #[test]
    fn long_period_filtered() {
        assert_eq!(checkpoints(10_000, &[(12_000, 1_000)]).points, [10_000]);
    }

    #[test]
    fn deduplicated_and_positive() {
        let set = checkpoints(10_000, &[(5_000, 0), (2_500, 0), (10_000, 10_000)]);
        assert_eq!(set.points, [10_000]);
        let set = checkpoints(10_000, &[(3_000, 0), (6_000, 0), (3_000, 0)]);
        assert_eq!(set.points, [6_000, 9_000, 10_000]);
    }

    #[test]
    fn demand_examples() {
        let pts = CheckpointSet { points: vec![8_000, 10_000] };
        assert_eq!(
            demand_test(2_000, 0, &pts, &[(1_000, 4_000, 0)]),
            Some(DemandPass { checkpoint: 8_000, demand: 4_000 })
        );
        let pts = CheckpointSet { points: vec![2_000] };
        assert_eq!(
            demand_test(2_000, 0, &pts, &[]),
            Some(DemandPass { checkpoint: 2_000, demand: 2_000 })
        );
        let pts = CheckpointSet { points: vec![10_000] };
        assert_eq!(demand_test(9_000, 2_000, &pts, &[]), None);
    }

    fn interferer() -> impl Strategy<Value = (Time, Time, Time)> {
        (0u64..3_000, 1_000u64..20_000, 0u64..10_000)
    }

    proptest! {
        #[test]
        fn checkpoint_set_invariants(d in 1u64..50_000,
                                     ints in prop::collection::vec((1u64..30_000, 0u64..30_000), 0..5)) {
            let set = checkpoints(d, &ints);
            prop_assert!(set.points.contains(&d));
            prop_assert!(set.points.iter().all(|&p| p > 0 && p <= d));
            prop_assert!(set.points.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn demand_monotone(c in 0u64..5_000, s in 0u64..5_000, t in 1u64..50_000,
                           ints in prop::collection::vec(interferer(), 0..4),
                           bump in 1u64..1_000, which in 0usize..4) {
            let base = demand(c, s, t, &ints);
            prop_assert!(demand(c + bump, s, t, &ints) >= base);
            prop_assert!(demand(c, s + bump, t, &ints) >= base);
            if !ints.is_empty() {
                let k = which % ints.len();
                let mut more = ints.clone();
                more[k].0 += bump;
                prop_assert!(demand(c, s, t, &more) >= base);
                let mut more = ints.clone();
                more[k].2 += bump;
                prop_assert!(demand(c, s, t, &more) >= base);
            }
        }

        // Same checkpoint set on both sides: a new interferer also adds its
        // own checkpoint, and a sparse set can then pass where it failed.
        #[test]
        fn extra_interferer_never_helps(c in 0u64..5_000, d in 1_000u64..50_000,
                                        ints in prop::collection::vec(interferer(), 0..4),
                                        extra in interferer()) {
            let pts = checkpoints(d, &ints.iter().map(|&(_, t, j)| (t, j)).collect::<Vec<_>>());
            let mut more = ints.clone();
            more.push(extra);
            if demand_test(c, 0, &pts, &ints).is_none() {
                prop_assert!(demand_test(c, 0, &pts, &more).is_none());
            }
        }
    }
}
