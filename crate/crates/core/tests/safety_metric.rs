use hazardforge::safety::{safety_index, step_reward, step_reward_with_bonus, SafetyObservation};
use proptest::prelude::*;

fn obs(d_hr: f64, v_r: f64, unsafe_state: bool) -> SafetyObservation {
    SafetyObservation {
        d_hr,
        v_r,
        contact: unsafe_state,
        unsafe_state,
    }
}

#[test]
fn metric_values() {
    assert!((safety_index(0.0, 0.0) - 1.0).abs() <= 1e-9);
    assert!((safety_index(1.0, 0.0) - 2.0).abs() <= 1e-9);
    assert!((safety_index(2.0, 1.0) - 5.0 / std::f64::consts::E).abs() <= 1e-9);
}

#[test]
fn reward_branches() {
    // c_S = 2 at d = 1, v = 0
    assert!((step_reward(&obs(1.0, 0.0, false), 3, 8) - 0.5).abs() <= 1e-9);
    let d = 2.5f64.sqrt();
    assert!((step_reward(&obs(d, 0.0, false), 8, 8) + 3.5).abs() <= 1e-9);
    assert!((step_reward(&obs(0.0, 1.5, true), 8, 8) - 1.5f64.exp()).abs() <= 1e-9);
    assert!((step_reward(&obs(0.0, 1.5, true), 2, 8) - 1.5f64.exp()).abs() <= 1e-9);
    assert!((step_reward_with_bonus(&obs(0.0, 1.5, true), 2, 8, 10.0) - 1.5f64.exp() - 10.0).abs() <= 1e-9);
    assert_eq!(step_reward_with_bonus(&obs(1.0, 0.0, false), 2, 8, 10.0), 0.5);
}

proptest! {
    #[test]
    fn metric_is_monotone(d in 0.0..20.0f64, dd in 1e-6..5.0f64, v in 0.0..3.0f64, dv in 1e-6..3.0f64) {
        prop_assert!(safety_index(d, v) > 0.0);
        prop_assert!(safety_index(d + dd, v) > safety_index(d, v));
        prop_assert!(safety_index(d, v + dv) < safety_index(d, v));
    }

    #[test]
    fn early_rewards_are_inverse_metric(d in 0.0..10.0f64, v in 0.0..3.0f64, k in 1usize..8) {
        prop_assert_eq!(step_reward(&obs(d, v, false), k, 8), 1.0 / safety_index(d, v));
    }
}
