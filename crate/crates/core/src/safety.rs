//! Risk metric, per-step reward and the unsafe-state predicate.

use crate::cell::{robot_points, RobotState, Scenario};
use crate::human::{reach_contains, reach_distance, HumanState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyObservation {
    /// Reach-disc to nearest robot point distance, ignoring occlusion (m).
    pub d_hr: f64,
    /// Fastest robot point speed (m/s).
    pub v_r: f64,
    /// Some robot point is inside the reach disc with a clear line to it.
    pub contact: bool,
    /// Contact while the robot moves.
    pub unsafe_state: bool,
}

impl SafetyObservation {
    pub fn safety_index(&self) -> f64 {
        safety_index(self.d_hr, self.v_r)
    }
}

pub fn observe(h: &HumanState, r: &RobotState, scenario: &Scenario) -> SafetyObservation {
    let params = &scenario.human_params;
    let mut d_hr = f64::INFINITY;
    let mut v_r: f64 = 0.0;
    let mut contact = false;
    for p in robot_points(r, &scenario.robot) {
        d_hr = d_hr.min(reach_distance(h, p.position, params));
        v_r = v_r.max(p.speed);
        contact |= reach_contains(h, p.position, scenario.occluders(), params);
    }
    SafetyObservation {
        d_hr,
        v_r,
        contact,
        unsafe_state: contact && v_r > 0.0,
    }
}

/// `(d_hr^2 + 1) * exp(-v_r)`, SI values taken as dimensionless.
pub fn safety_index(d_hr: f64, v_r: f64) -> f64 {
    (d_hr * d_hr + 1.0) * (-v_r).exp()
}

/// Reward for the `k`-th action (1-based) of an episode of length `n`:
/// `1/c_S` before the last step, `-c_S` for a safe last step, and `1/c_S` for
/// an unsafe last step.
pub fn step_reward(obs: &SafetyObservation, k: usize, n: usize) -> f64 {
    step_reward_with_bonus(obs, k, n, 0.0)
}

/// As [`step_reward`], plus `terminal_bonus` on any step that reaches an unsafe state.
pub fn step_reward_with_bonus(obs: &SafetyObservation, k: usize, n: usize, terminal_bonus: f64) -> f64 {
    debug_assert!(k >= 1 && k <= n);
    let c_s = obs.safety_index();
    let base = if k < n || obs.unsafe_state { 1.0 / c_s } else { -c_s };
    if obs.unsafe_state {
        base + terminal_bonus
    } else {
        base
    }
}
