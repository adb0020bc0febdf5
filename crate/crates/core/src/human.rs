//! The virtual human: action alphabet, walking/turning/bending kinematics and
//! the shoulder-centred reach disc.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{clip_disc_motion, normalize_angle, segments_intersect, Segment, Vec2, EPS_GEO};

/// Anthropometric and motion parameters. Lengths in meters, angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumanParams {
    pub body_height: f64,
    pub upper_arm: f64,
    pub lower_arm: f64,
    pub hand: f64,
    pub walk_speed: f64,
    pub max_forward_flexion_deg: f64,
    pub max_lateral_flexion_deg: f64,
    pub footprint_radius: f64,
    pub torso_length: f64,
}

impl Default for HumanParams {
    fn default() -> Self {
        HumanParams {
            body_height: 1.78,
            upper_arm: 0.30,
            lower_arm: 0.31,
            hand: 0.18,
            walk_speed: 1.6,
            max_forward_flexion_deg: 55.0,
            max_lateral_flexion_deg: 35.0,
            footprint_radius: 0.20,
            torso_length: 0.50,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("human parameter `{field}` is invalid: {reason}")]
pub struct ParamError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl HumanParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [
            ("body_height", self.body_height),
            ("upper_arm", self.upper_arm),
            ("lower_arm", self.lower_arm),
            ("hand", self.hand),
            ("walk_speed", self.walk_speed),
            ("max_forward_flexion_deg", self.max_forward_flexion_deg),
            ("max_lateral_flexion_deg", self.max_lateral_flexion_deg),
            ("footprint_radius", self.footprint_radius),
            ("torso_length", self.torso_length),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError {
                    field,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        if self.max_forward_flexion_deg > 90.0 {
            return Err(ParamError {
                field: "max_forward_flexion_deg",
                reason: "must not exceed 90",
            });
        }
        if self.max_lateral_flexion_deg > 90.0 {
            return Err(ParamError {
                field: "max_lateral_flexion_deg",
                reason: "must not exceed 90",
            });
        }
        Ok(())
    }

    /// Arm reach from the shoulder: upper arm + lower arm + hand.
    pub fn reach_radius(&self) -> f64 {
        self.upper_arm + self.lower_arm + self.hand
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WalkPrimitive {
    WalkForward,
    TurnLeft45,
    TurnLeft90,
    TurnRight45,
    TurnRight90,
}

impl WalkPrimitive {
    pub const ALL: [WalkPrimitive; 5] = [
        WalkPrimitive::WalkForward,
        WalkPrimitive::TurnLeft45,
        WalkPrimitive::TurnLeft90,
        WalkPrimitive::TurnRight45,
        WalkPrimitive::TurnRight90,
    ];

    /// Heading change over the whole action, radians (left = counter-clockwise).
    pub fn turn_angle(self) -> f64 {
        match self {
            WalkPrimitive::WalkForward => 0.0,
            WalkPrimitive::TurnLeft45 => FRAC_PI_4,
            WalkPrimitive::TurnLeft90 => 2.0 * FRAC_PI_4,
            WalkPrimitive::TurnRight45 => -FRAC_PI_4,
            WalkPrimitive::TurnRight90 => -2.0 * FRAC_PI_4,
        }
    }

    fn ordinal(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BendTarget {
    Upright,
    Forward,
    Left,
    Right,
    ForwardRight,
    ForwardLeft,
}

impl BendTarget {
    pub const ALL: [BendTarget; 6] = [
        BendTarget::Upright,
        BendTarget::Forward,
        BendTarget::Left,
        BendTarget::Right,
        BendTarget::ForwardRight,
        BendTarget::ForwardLeft,
    ];

    /// Target (forward, lateral) flexion in degrees; lateral is positive to the right.
    pub fn target_angles(self, params: &HumanParams) -> (f64, f64) {
        let f = params.max_forward_flexion_deg;
        let l = params.max_lateral_flexion_deg;
        match self {
            BendTarget::Upright => (0.0, 0.0),
            BendTarget::Forward => (f, 0.0),
            BendTarget::Left => (0.0, -l),
            BendTarget::Right => (0.0, l),
            BendTarget::ForwardRight => (f, l),
            BendTarget::ForwardLeft => (f, -l),
        }
    }

    fn ordinal(self) -> usize {
        self as usize
    }
}

pub const ACTION_COUNT: usize = WalkPrimitive::ALL.len() * BendTarget::ALL.len();

/// One combined walking + upper-body motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub walk: WalkPrimitive,
    pub bend: BendTarget,
    index: u8,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("action index {0} out of range 0..30")]
pub struct InvalidAction(pub usize);

impl Action {
    pub fn new(walk: WalkPrimitive, bend: BendTarget) -> Self {
        let index = walk.ordinal() * BendTarget::ALL.len() + bend.ordinal();
        Action {
            walk,
            bend,
            index: index as u8,
        }
    }

    pub fn from_index(index: usize) -> Result<Self, InvalidAction> {
        if index >= ACTION_COUNT {
            return Err(InvalidAction(index));
        }
        let n_bend = BendTarget::ALL.len();
        Ok(Action::new(
            WalkPrimitive::ALL[index / n_bend],
            BendTarget::ALL[index % n_bend],
        ))
    }

    pub fn index(&self) -> usize {
        self.index as usize
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}+{:?}", self.walk, self.bend)
    }
}

/// All 30 actions, `enumerate_actions()[i].index() == i`.
pub fn enumerate_actions() -> Vec<Action> {
    (0..ACTION_COUNT)
        .map(|i| Action::from_index(i).expect("index in range"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanState {
    /// Feet centre.
    pub position: Vec2,
    /// World-frame heading in (-pi, pi].
    pub heading: f64,
    /// Degrees, in [0, max_forward_flexion].
    pub bend_forward: f64,
    /// Degrees, positive to the right.
    pub bend_lateral: f64,
}

impl HumanState {
    pub fn upright(position: Vec2, heading: f64) -> Self {
        HumanState {
            position,
            heading: normalize_angle(heading),
            bend_forward: 0.0,
            bend_lateral: 0.0,
        }
    }

    pub fn forward_dir(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }
}

/// Advances the human by one simulation timestep within an action.
///
/// `substep_index` counts from 0 within the action; bend angles move linearly
/// so that the target posture is reached exactly on the last substep.
/// `obstacles` are walk-blocking segments.
pub fn substep_human(
    h: &HumanState,
    action: Action,
    dt: f64,
    obstacles: &[Segment],
    substep_index: u32,
    substeps_per_action: u32,
    params: &HumanParams,
) -> HumanState {
    let remaining = substeps_per_action.saturating_sub(substep_index).max(1);
    let mut next = *h;

    match action.walk {
        WalkPrimitive::WalkForward => {
            let target = h.position + h.forward_dir() * (params.walk_speed * dt);
            // a valid state never penetrates, so the clip cannot fail; stay put if it does
            next.position =
                clip_disc_motion(h.position, target, params.footprint_radius, obstacles).unwrap_or(h.position);
        }
        turn => {
            let per_substep = turn.turn_angle() / f64::from(substeps_per_action);
            next.heading = normalize_angle(h.heading + per_substep);
        }
    }

    let (tf, tl) = action.bend.target_angles(params);
    if remaining == 1 {
        next.bend_forward = tf;
        next.bend_lateral = tl;
    } else {
        let r = f64::from(remaining);
        next.bend_forward = h.bend_forward + (tf - h.bend_forward) / r;
        next.bend_lateral = h.bend_lateral + (tl - h.bend_lateral) / r;
    }
    next
}

pub fn shoulder_center(h: &HumanState, params: &HumanParams) -> Vec2 {
    let fwd = h.forward_dir();
    let right = fwd.perp_cw();
    let offset =
        (fwd * h.bend_forward.to_radians().sin() + right * h.bend_lateral.to_radians().sin()) * params.torso_length;
    let mag = offset.norm();
    if mag > params.torso_length {
        h.position + offset * (params.torso_length / mag)
    } else {
        h.position + offset
    }
}

/// Distance from the reach disc to `target`, ignoring occlusion. Gaps up to
/// `EPS_GEO` count as zero so that this agrees with [`reach_contains`].
pub fn reach_distance(h: &HumanState, target: Vec2, params: &HumanParams) -> f64 {
    let gap = target.distance(shoulder_center(h, params)) - params.reach_radius();
    if gap <= EPS_GEO {
        0.0
    } else {
        gap
    }
}

/// True iff `target` lies in the reach disc and neither the torso
/// (feet to shoulder) nor the arm line (shoulder to target) crosses an occluder.
pub fn reach_contains(h: &HumanState, target: Vec2, occluders: &[Segment], params: &HumanParams) -> bool {
    let shoulder = shoulder_center(h, params);
    if target.distance(shoulder) > params.reach_radius() + EPS_GEO {
        return false;
    }
    let arm = Segment::new(shoulder, target);
    let torso = Segment::new(h.position, shoulder);
    !occluders
        .iter()
        .any(|o| segments_intersect(&arm, o) || segments_intersect(&torso, o))
}
