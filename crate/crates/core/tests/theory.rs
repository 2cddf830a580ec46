use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use pegasus_core::rng;
use pegasus_core::theory::{
    capacity_log_bound, covering_bound, find_evading_union, index_of_union, reference, sample_size_bound,
    sample_size_real, union_from_index, BoundInputs, IntervalUnion,
};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn half() -> BigRational {
    q(1, 2)
}

#[test]
fn index_round_trip() {
    for i in 1u32..=200 {
        let i = BigUint::from(i);
        let u = union_from_index(&i).unwrap();
        assert_eq!(u.measure(), half());
        assert_eq!(index_of_union(&u).unwrap(), i);
    }
    assert!(union_from_index(&BigUint::from(0u32)).is_err());
}

#[test]
fn known_unions_round_trip() {
    for u in [
        vec![(q(1, 3), q(5, 6))],
        vec![(q(0, 1), q(1, 4)), (q(3, 4), q(1, 1))],
        vec![(q(1, 10), q(2, 10)), (q(3, 10), q(5, 10)), (q(7, 10), q(9, 10))],
    ] {
        let u = IntervalUnion::new(u).unwrap();
        let i = index_of_union(&u).unwrap();
        assert_eq!(union_from_index(&i).unwrap(), u);
    }
    let short = IntervalUnion::new(vec![(q(0, 1), q(1, 3))]).unwrap();
    assert!(index_of_union(&short).is_err());
}

#[test]
fn evades_ten_thousand_points() {
    let mut gen = rng::stream(2024, 0);
    let points: Vec<f64> = (0..10_000).map(|_| rng::uniform01(&mut gen)).collect();
    let (u, index) = find_evading_union(&points).unwrap();
    assert_eq!(u.measure(), half());
    assert!(points.iter().all(|&p| !u.contains_f64(p)));
    assert_eq!(union_from_index(&index).unwrap(), u);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evading_union_contract(points in prop::collection::vec(0.0f64..=1.0, 0..60)) {
        let (u, index) = find_evading_union(&points).unwrap();
        prop_assert_eq!(u.measure(), half());
        prop_assert!(points.iter().all(|&p| !u.contains_f64(p)));
        prop_assert_eq!(union_from_index(&index).unwrap(), u);
    }

    #[test]
    fn union_measure_is_additive(cuts in prop::collection::btree_set(1u32..1000, 2..12)) {
        let cuts: Vec<u32> = cuts.into_iter().collect();
        let pieces: Vec<_> = cuts.chunks_exact(2).map(|c| (q(c[0] as i64, 1000), q(c[1] as i64, 1000))).collect();
        let total: i64 = cuts.chunks_exact(2).map(|c| (c[1] - c[0]) as i64).sum();
        let u = IntervalUnion::new(pieces).unwrap();
        prop_assert_eq!(u.measure(), q(total, 1000));
    }
}

/// Largest `d` such that some `d` of `points` are pseudo-shattered by `class`:
/// thresholds `r` exist so that every sign pattern of `f(x_i) >= r_i` is realised.
fn pseudo_dimension(class: &[Box<dyn Fn(f64) -> f64>], points: &[f64]) -> usize {
    let n = points.len();
    let mut best = 0;
    for mask in 1u32..(1 << n) {
        let subset: Vec<f64> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| points[i]).collect();
        let d = subset.len();
        if d <= best {
            continue;
        }
        let values: Vec<Vec<f64>> = class.iter().map(|f| subset.iter().map(|&x| f(x)).collect()).collect();
        // candidate thresholds: the distinct attained values at each point
        let candidates: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut c: Vec<f64> = values.iter().map(|v| v[i]).collect();
                c.sort_by(f64::total_cmp);
                c.dedup();
                c
            })
            .collect();
        let mut r = vec![0usize; d];
        'thresholds: loop {
            let patterns: std::collections::HashSet<u32> = values
                .iter()
                .map(|v| (0..d).fold(0, |acc, i| acc | ((v[i] >= candidates[i][r[i]]) as u32) << i))
                .collect();
            if patterns.len() == 1 << d {
                best = d;
                break;
            }
            for i in 0..d {
                r[i] += 1;
                if r[i] < candidates[i].len() {
                    continue 'thresholds;
                }
                r[i] = 0;
            }
            break;
        }
    }
    best
}

#[test]
fn threshold_class_has_pseudo_dimension_one() {
    let class: Vec<Box<dyn Fn(f64) -> f64>> = (0..=10)
        .map(|k| {
            let t = k as f64 / 10.0;
            Box::new(move |p: f64| if p <= t { 1.0 } else { 0.0 }) as Box<dyn Fn(f64) -> f64>
        })
        .collect();
    assert_eq!(pseudo_dimension(&class, &[0.05, 0.35, 0.65, 0.95]), 1);
    // intervals pick out any two points, so the checker is not stuck at 1
    let intervals: Vec<Box<dyn Fn(f64) -> f64>> = (0..=10)
        .flat_map(|a| (a..=10).map(move |b| (a as f64 / 10.0, b as f64 / 10.0)))
        .map(|(a, b)| Box::new(move |p: f64| if a <= p && p <= b { 1.0 } else { 0.0 }) as Box<dyn Fn(f64) -> f64>)
        .collect();
    assert_eq!(pseudo_dimension(&intervals, &[0.05, 0.35, 0.65, 0.95]), 2);
}

fn unit(h_eps: u32, epsilon: f64) -> BoundInputs {
    BoundInputs { epsilon, delta: 0.1, d: 1, d_s: 1, d_p: 1, b: 1.0, b_r: 1.0, h_eps, m_big: 1.0 }
}

#[test]
fn frozen_sample_size_oracle() {
    // evaluated at 50 digits with mpmath
    let inputs = unit(3, 0.5);
    let real = sample_size_real(&inputs).unwrap();
    assert!((real / 6_040_675.545_300_823 - 1.0).abs() < 1e-12, "{real}");
    assert_eq!(sample_size_bound(&inputs).unwrap(), 6_040_676);
    let cap = capacity_log_bound(&BoundInputs { epsilon: 0.5 / 8.0 / 16.0, ..inputs }).unwrap();
    assert!((cap - 87.098_220_125_513_6).abs() < 1e-10, "{cap}");
}

fn grid() -> Vec<BoundInputs> {
    let mut out = Vec::new();
    for (k, eps) in [0.01, 0.1, 0.5, 1.0].into_iter().enumerate() {
        for d in [1, 3, 10] {
            for h in [1, 5, 30] {
                for (b, b_r) in [(1.0, 1.0), (2.5, 10.0), (10.0, 1.5)] {
                    if out.len() < 100 {
                        let d_s = 1 + (k as u32 + d) % 3;
                        out.push(BoundInputs {
                            epsilon: eps,
                            delta: 0.05,
                            d,
                            d_s,
                            d_p: 1 + d % 2,
                            b,
                            b_r,
                            h_eps: h,
                            m_big: 1.0,
                        });
                    }
                }
            }
        }
    }
    out
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs())
}

#[test]
fn calculators_match_reference_on_grid() {
    let grid = grid();
    assert_eq!(grid.len(), 100);
    for x in &grid {
        let c = covering_bound(x.epsilon, x.m_big, x.d).unwrap();
        let r = reference::covering_bound(x.epsilon, x.m_big, x.d);
        assert!(agree(c, r), "covering {x:?}: {c} vs {r}");
        let c = capacity_log_bound(x).unwrap();
        let r = reference::capacity_log_bound(x);
        assert!(agree(c, r), "capacity {x:?}: {c} vs {r}");
        let c = sample_size_real(x).unwrap();
        let r = reference::sample_size_real(x);
        assert!(agree(c, r), "sample {x:?}: {c} vs {r}");
        if let Ok(m) = sample_size_bound(x) {
            assert_eq!(m, c.ceil() as u64);
        }
    }
}

#[test]
fn bounds_are_monotone() {
    for x in grid() {
        let cap = capacity_log_bound(&x).unwrap();
        let m = sample_size_real(&x).unwrap();
        let cov = covering_bound(x.epsilon, 1.0, x.d).unwrap();

        let finer = BoundInputs { epsilon: x.epsilon * 0.9, ..x };
        assert!(capacity_log_bound(&finer).unwrap() > cap);
        assert!(sample_size_real(&finer).unwrap() > m);
        assert!(covering_bound(finer.epsilon, 1.0, x.d).unwrap() > cov);

        let surer = BoundInputs { delta: x.delta * 0.5, ..x };
        assert!(sample_size_real(&surer).unwrap() > m);
        assert_eq!(capacity_log_bound(&surer).unwrap(), cap);

        let longer = BoundInputs { h_eps: x.h_eps + 1, ..x };
        assert!(capacity_log_bound(&longer).unwrap() > cap);
        assert!(sample_size_real(&longer).unwrap() > m);

        let richer = BoundInputs { d: x.d + 1, ..x };
        assert!(capacity_log_bound(&richer).unwrap() > cap);
        assert!(sample_size_real(&richer).unwrap() > m);
        assert!(covering_bound(x.epsilon, 1.0, x.d + 1).unwrap() > cov);
    }
}
