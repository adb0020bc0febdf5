//! Deterministic action-level transition function composing human motion,
//! sensing, the robot stop chain and the safety check.

use thiserror::Error;

use crate::cell::{robot_points, sense, step_robot, ResumePolicy, RobotMode, RobotPoint, RobotState, Scenario};
use crate::human::{substep_human, Action, HumanState};
use crate::safety::{observe, step_reward_with_bonus, SafetyObservation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorldError {
    #[error("state is terminal (unsafe state reached); restore a snapshot before stepping")]
    Terminal,
}

/// Full dynamic simulation state. Cloning is the snapshot operation.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub human: HumanState,
    pub robot: RobotState,
    /// Arrival substep indices of stop signals in flight, ascending.
    pub pending_signals: Vec<u64>,
    /// Actions executed since the initial state.
    pub step_count: usize,
    pub terminal_unsafe: bool,
    substep_count: u64,
    last_detection: Option<u64>,
    dt: f64,
}

impl WorldState {
    /// Simulation clock, seconds.
    pub fn t(&self) -> f64 {
        self.substep_count as f64 * self.dt
    }

    pub fn substep_count(&self) -> u64 {
        self.substep_count
    }

    /// Arrival times of pending stop signals, seconds.
    pub fn pending_signal_times(&self) -> Vec<f64> {
        self.pending_signals.iter().map(|&k| k as f64 * self.dt).collect()
    }

    pub fn snapshot(&self) -> WorldState {
        self.clone()
    }

    pub fn restore(snapshot: &WorldState) -> WorldState {
        snapshot.clone()
    }
}

/// One simulation timestep inside an action.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstepRecord {
    pub t: f64,
    /// 0-based action counter at which this substep ran.
    pub step: usize,
    pub substep: u32,
    pub human: HumanState,
    pub robot: RobotState,
    pub points: Vec<RobotPoint>,
    pub detections: Vec<bool>,
    pub obs: SafetyObservation,
    /// Substep repeated after an unsafe state earlier in the same action.
    pub frozen: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub action: Action,
    /// Observation at the end of the action.
    pub obs: SafetyObservation,
    pub reward: f64,
    /// Some substep of this action was unsafe.
    pub unsafe_hit: bool,
    pub substeps: Vec<SubstepRecord>,
}

/// Reward context for [`step_action`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSpec {
    /// Episode length n; the reward of action k = step_count + 1 uses the
    /// terminal branch when k >= n.
    pub len: usize,
    pub terminal_bonus: f64,
}

impl EpisodeSpec {
    pub fn new(len: usize) -> Self {
        EpisodeSpec {
            len,
            terminal_bonus: 0.0,
        }
    }
}

pub fn init(scenario: &Scenario) -> WorldState {
    WorldState {
        human: scenario.human_start,
        robot: RobotState::running(),
        pending_signals: Vec::new(),
        step_count: 0,
        terminal_unsafe: false,
        substep_count: 0,
        last_detection: None,
        dt: scenario.dt,
    }
}

/// Observation of a state without stepping it.
pub fn observe_state(s: &WorldState, scenario: &Scenario) -> SafetyObservation {
    observe(&s.human, &s.robot, scenario)
}

/// Executes one human action. Each substep runs human kinematics, sensing
/// (scheduling stop signals at detection + response time, rounded up to a
/// substep), the robot update and the safety observation, in that order.
pub fn step_action(
    s: &WorldState,
    action: Action,
    scenario: &Scenario,
    episode: &EpisodeSpec,
) -> Result<(WorldState, StepInfo), WorldError> {
    if s.terminal_unsafe {
        return Err(WorldError::Terminal);
    }
    let mut next = s.clone();
    let n_sub = scenario.substeps_per_action;
    let mut records = Vec::with_capacity(n_sub as usize);
    let mut last_obs = None;

    for k in 0..n_sub {
        if next.terminal_unsafe {
            let prev: &SubstepRecord = records.last().expect("unsafe implies a previous substep");
            next.substep_count += 1;
            let mut frozen = prev.clone();
            frozen.t = next.t();
            frozen.substep = k;
            frozen.frozen = true;
            records.push(frozen);
            continue;
        }

        let h_prev = next.human;
        next.human = substep_human(
            &h_prev,
            action,
            scenario.dt,
            scenario.obstacles(),
            k,
            n_sub,
            &scenario.human_params,
        );
        next.substep_count += 1;
        let now = next.substep_count;

        let detections = sense(&scenario.sensors, &h_prev, &next.human, &scenario.human_params);
        for (sensor, &hit) in scenario.sensors.iter().zip(&detections) {
            if hit {
                let delay = (sensor.response_time / scenario.dt - 1e-9).ceil().max(0.0) as u64;
                schedule(&mut next.pending_signals, now + delay);
                next.last_detection = Some(now);
            }
        }

        let arrived = next.pending_signals.first().is_some_and(|&a| a <= now);
        next.pending_signals.retain(|&a| a > now);
        next.robot = step_robot(&next.robot, &scenario.robot, scenario.dt, arrived);
        if let ResumePolicy::AutoResume { clear_delay } = scenario.resume_policy {
            let quiet = next
                .last_detection
                .is_none_or(|d| (now - d) as f64 * scenario.dt >= clear_delay - 1e-12);
            if next.robot.mode == RobotMode::Stopped && next.pending_signals.is_empty() && quiet {
                next.robot = RobotState {
                    phase: next.robot.phase,
                    ..RobotState::running()
                };
            }
        }
        if let (RobotMode::Running, Some(&arrival)) = (next.robot.mode, next.pending_signals.first()) {
            next.robot.mode = RobotMode::StoppingPending {
                arrival: arrival as f64 * scenario.dt,
            };
        }

        let obs = observe(&next.human, &next.robot, scenario);
        if obs.unsafe_state {
            next.terminal_unsafe = true;
        }
        last_obs = Some(obs);
        records.push(SubstepRecord {
            t: next.t(),
            step: s.step_count,
            substep: k,
            human: next.human,
            robot: next.robot,
            points: robot_points(&next.robot, &scenario.robot),
            detections,
            obs,
            frozen: false,
        });
    }

    next.step_count += 1;
    let obs = last_obs.expect("at least one substep");
    let k = next.step_count.min(episode.len.max(1));
    let reward = step_reward_with_bonus(&obs, k, episode.len.max(1), episode.terminal_bonus);
    let info = StepInfo {
        action,
        obs,
        reward,
        unsafe_hit: next.terminal_unsafe,
        substeps: records,
    };
    Ok((next, info))
}

fn schedule(pending: &mut Vec<u64>, arrival: u64) {
    if let Err(pos) = pending.binary_search(&arrival) {
        pending.insert(pos, arrival);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::builtin_scenario;
    use crate::human::{BendTarget, WalkPrimitive};

    fn walk() -> Action {
        Action::new(WalkPrimitive::WalkForward, BendTarget::Upright)
    }

    #[test]
    fn init_is_pure() {
        let s = builtin_scenario("safe-baseline").unwrap();
        let a = init(&s);
        assert_eq!(a, init(&s));
        assert_eq!(a.t(), 0.0);
        assert_eq!(a.human, s.human_start);
        assert_eq!(a.robot, RobotState::running());
        let o = observe_state(&a, &s);
        assert_eq!(o.v_r, s.robot.nominal_speed);
        assert!(o.d_hr > 0.0);
    }

    #[test]
    fn snapshot_is_independent() {
        let sc = builtin_scenario("safe-baseline").unwrap();
        let ep = EpisodeSpec::new(8);
        let s0 = init(&sc);
        let snap = s0.snapshot();
        let (s1, i1) = step_action(&s0, walk(), &sc, &ep).unwrap();
        assert_ne!(s1, snap);
        assert_eq!(snap, s0);
        let (s1b, i1b) = step_action(&WorldState::restore(&snap), walk(), &sc, &ep).unwrap();
        assert_eq!(s1, s1b);
        assert_eq!(i1, i1b);
    }

    #[test]
    fn eight_actions_cover_one_point_six_seconds() {
        let sc = builtin_scenario("safe-baseline").unwrap();
        let ep = EpisodeSpec::new(8);
        let turn = Action::new(WalkPrimitive::TurnLeft45, BendTarget::Left);
        let mut s = init(&sc);
        for _ in 0..8 {
            let (n, info) = step_action(&s, turn, &sc, &ep).unwrap();
            assert_eq!(info.substeps.len(), 4);
            s = n;
        }
        assert_eq!(s.t(), 1.6);
        assert_eq!(s.step_count, 8);
    }

    #[test]
    fn stepping_terminal_state_fails() {
        let sc = builtin_scenario("safe-baseline").unwrap();
        let mut s = init(&sc);
        s.terminal_unsafe = true;
        assert_eq!(
            step_action(&s, walk(), &sc, &EpisodeSpec::new(8)),
            Err(WorldError::Terminal)
        );
    }

    #[test]
    fn schedule_keeps_order_and_dedupes() {
        let mut p = vec![];
        for a in [5, 3, 9, 3, 7] {
            schedule(&mut p, a);
        }
        assert_eq!(p, vec![3, 5, 7, 9]);
    }
}
