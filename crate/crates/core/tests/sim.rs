use num_rational::BigRational;
use num_traits::One;
use pegasus_core::gridworld::{build_gridworld, policy_from_index, Cell};
use pegasus_core::sim::{
    draw_scenarios, estimate_value, exact_value_tabular, horizon_time, read_scenarios, write_scenarios, DiscountMode,
};
use proptest::prelude::*;

fn tail_within(h: usize, epsilon: f64, gamma: f64, r_max: f64) -> bool {
    let q = |x: f64| BigRational::from_float(x).unwrap();
    let (e, g, r) = (q(epsilon), q(gamma), q(r_max));
    let tail = num_traits::pow(g.clone(), h) * r / (BigRational::one() - g);
    tail * BigRational::from_integer(2.into()) <= e
}

#[test]
fn horizon_grid() {
    for epsilon in [0.01, 0.1, 1.0] {
        for gamma in [0.5, 0.9, 0.99] {
            for r_max in [1.0, 10.0] {
                let h = horizon_time(epsilon, gamma, r_max).unwrap();
                assert!(tail_within(h, epsilon, gamma, r_max));
                assert!(h == 0 || !tail_within(h - 1, epsilon, gamma, r_max));
            }
        }
    }
    assert_eq!(horizon_time(1.0, 0.0, 1.0).unwrap(), 1);
    assert!(horizon_time(0.1, 1.0, 1.0).is_err());
}

proptest! {
    #[test]
    fn horizon_is_minimal(epsilon in 1e-3f64..10.0, gamma in 0.0f64..0.999, r_max in 0.1f64..100.0) {
        let h = horizon_time(epsilon, gamma, r_max).unwrap();
        prop_assert!(tail_within(h, epsilon, gamma, r_max));
        prop_assert!(h == 0 || !tail_within(h - 1, epsilon, gamma, r_max));
    }
}

#[test]
fn scenarios_are_reproducible_and_nested() {
    let model = build_gridworld();
    let a = draw_scenarios(&model, 10, 50, 42).unwrap();
    let b = draw_scenarios(&model, 25, 50, 42).unwrap();
    assert_eq!(a, b[..10]);
    assert_ne!(a, draw_scenarios(&model, 10, 50, 43).unwrap());
    assert!(a.iter().all(|s| *s.initial_state() == Cell::START));
    assert!(a.iter().flat_map(|s| s.noise()).all(|p| (0.0..1.0).contains(p)));
}

#[test]
fn scenario_files_round_trip_bit_exactly() {
    let model = build_gridworld();
    let scenarios = draw_scenarios(&model, 6, 40, 9).unwrap();
    let mut buf = Vec::new();
    write_scenarios(&mut buf, &scenarios).unwrap();
    let back: Vec<_> = read_scenarios::<Cell, _>(buf.as_slice(), 1).unwrap();
    assert_eq!(back, scenarios);
}

#[test]
fn estimate_converges_to_truncated_exact_value() {
    let model = build_gridworld();
    let mdp = model.tabular();
    let pol = policy_from_index(4321).unwrap();
    let exact = exact_value_tabular(&mdp, &pol.state_actions(), 0.99, Some(100)).unwrap();
    let scenarios = draw_scenarios(&model, 4000, 100, 5).unwrap();
    let est = estimate_value(&model, &pol, &scenarios, 100, DiscountMode::Discrete).unwrap();
    let n = est.per_scenario.len() as f64;
    let var = est.per_scenario.iter().map(|v| (v - est.value).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!((est.value - exact).abs() < 4.0 * se.max(1e-12), "{} vs {exact} (se {se})", est.value);
    let mean: f64 = est.per_scenario.iter().sum::<f64>() / n;
    assert!((mean - est.value).abs() < 1e-9);
}
