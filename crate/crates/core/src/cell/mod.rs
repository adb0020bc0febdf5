//! Static cell description, robot path kinematics with the sensor-to-stop
//! chain, and scenario loading.

mod builtin;
pub mod clearance;
mod file;

use thiserror::Error;

use crate::geometry::{point_in_polygon, polyline_point_at, segments_intersect, Polygon, Polyline, Segment, Vec2};
use crate::human::{shoulder_center, HumanParams, HumanState};

pub use builtin::{builtin_scenario, BUILTIN_NAMES};
pub use file::{load_scenario, scenario_to_json};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario validation error at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("unknown builtin scenario `{0}`")]
    UnknownBuiltin(String),
}

impl ScenarioError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPath {
    pub name: String,
    pub path: Polyline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotSpec {
    /// Closed paths of tracked robot points, in declaration order ("tcp" first).
    pub point_paths: Vec<NamedPath>,
    /// Speed of the fastest point when running, m/s.
    pub nominal_speed: f64,
    /// Time from stop-signal arrival to standstill, s.
    pub stopping_time: f64,
}

impl RobotSpec {
    /// Length of the longest tracked path.
    pub fn max_path_length(&self) -> f64 {
        self.point_paths.iter().map(|p| p.path.length()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SensorKind {
    /// Floor-level protective field.
    ScannerZone(Polygon),
    /// Vertical sensing plane, seen from above as a segment.
    LightCurtain(Segment),
}

impl SensorKind {
    pub fn label(&self) -> &'static str {
        match self {
            SensorKind::ScannerZone(_) => "scanner_zone",
            SensorKind::LightCurtain(_) => "light_curtain",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorSpec {
    pub kind: SensorKind,
    /// Delay between detection and stop-signal arrival at the robot, s.
    pub response_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResumePolicy {
    /// A stopped robot stays stopped for the rest of the episode.
    Latched,
    /// Restart once no sensor has fired for `clear_delay` seconds.
    AutoResume { clear_delay: f64 },
}

/// Immutable cell description plus simulation timing.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Fences: block walking and occlude reach.
    pub walls: Vec<Segment>,
    /// Blocks walking, does not occlude.
    pub table: Polygon,
    pub sensors: Vec<SensorSpec>,
    pub robot: RobotSpec,
    pub human_start: HumanState,
    pub human_params: HumanParams,
    pub dt: f64,
    pub substeps_per_action: u32,
    pub resume_policy: ResumePolicy,
    pub(crate) start_heading_deg: f64,
    obstacles: Vec<Segment>,
}

impl Scenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: String,
        walls: Vec<Segment>,
        table: Polygon,
        sensors: Vec<SensorSpec>,
        robot: RobotSpec,
        start: Vec2,
        start_heading_deg: f64,
        human_params: HumanParams,
        dt: f64,
        substeps_per_action: u32,
        resume_policy: ResumePolicy,
    ) -> Result<Scenario, ScenarioError> {
        let obstacles = walls.iter().copied().chain(table.edges()).collect();
        let scenario = Scenario {
            name,
            walls,
            table,
            sensors,
            robot,
            human_start: HumanState::upright(start, start_heading_deg.to_radians()),
            human_params,
            dt,
            substeps_per_action,
            resume_policy,
            start_heading_deg,
            obstacles,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Walk-blocking segments: fences followed by table edges.
    pub fn obstacles(&self) -> &[Segment] {
        &self.obstacles
    }

    /// Fences only; the table does not block line of sight.
    pub fn occluders(&self) -> &[Segment] {
        &self.walls
    }

    pub fn start_heading_deg(&self) -> f64 {
        self.start_heading_deg
    }

    /// Seconds covered by one action.
    pub fn action_duration(&self) -> f64 {
        self.dt * f64::from(self.substeps_per_action)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.name.trim().is_empty() {
            return Err(ScenarioError::invalid("name", "must not be empty"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ScenarioError::invalid("sim.dt", "must be > 0"));
        }
        if self.substeps_per_action == 0 {
            return Err(ScenarioError::invalid("sim.substeps_per_action", "must be >= 1"));
        }
        self.human_params
            .validate()
            .map_err(|e| ScenarioError::invalid(format!("human.params.{}", e.field), e.reason))?;

        let robot = &self.robot;
        if robot.point_paths.is_empty() {
            return Err(ScenarioError::invalid(
                "robot.point_paths",
                "at least one path is required",
            ));
        }
        if robot.point_paths[0].name != "tcp" {
            return Err(ScenarioError::invalid("robot.point_paths", "a `tcp` path is required"));
        }
        for p in &robot.point_paths {
            if !p.path.is_closed() {
                return Err(ScenarioError::invalid(
                    format!("robot.point_paths.{}", p.name),
                    "path must be closed",
                ));
            }
        }
        if !(robot.nominal_speed.is_finite() && robot.nominal_speed > 0.0) {
            return Err(ScenarioError::invalid("robot.nominal_speed", "must be > 0"));
        }
        if !(robot.stopping_time.is_finite() && robot.stopping_time > 0.0) {
            return Err(ScenarioError::invalid("robot.stopping_time", "must be > 0"));
        }
        for (i, s) in self.sensors.iter().enumerate() {
            if !(s.response_time.is_finite() && s.response_time >= 0.0) {
                return Err(ScenarioError::invalid(
                    format!("sensors[{i}].response_time"),
                    "must be >= 0",
                ));
            }
        }
        if let ResumePolicy::AutoResume { clear_delay } = self.resume_policy {
            if !(clear_delay.is_finite() && clear_delay >= 0.0) {
                return Err(ScenarioError::invalid(
                    "resume_policy.auto_resume.clear_delay",
                    "must be >= 0",
                ));
            }
        }

        let start = self.human_start.position;
        let r = self.human_params.footprint_radius;
        if !start.is_finite() || !self.start_heading_deg.is_finite() {
            return Err(ScenarioError::invalid("human_start", "must be finite"));
        }
        if point_in_polygon(start, &self.table) {
            return Err(ScenarioError::invalid("human_start", "inside the table"));
        }
        for o in &self.obstacles {
            if crate::geometry::distance_point_segment(start, o) < r - crate::geometry::EPS_GEO {
                return Err(ScenarioError::invalid(
                    "human_start",
                    "footprint penetrates a wall or the table",
                ));
            }
        }
        for (i, s) in self.sensors.iter().enumerate() {
            if let SensorKind::ScannerZone(zone) = &s.kind {
                if scanner_detects(zone, start, r) {
                    return Err(ScenarioError::invalid(
                        "human_start",
                        format!("inside scanner zone sensors[{i}]"),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobotMode {
    Running,
    /// A stop signal is on its way; the robot still runs at full speed.
    StoppingPending {
        arrival: f64,
    },
    /// Linear ramp-down; `substeps` counts substeps since the signal arrived.
    Decelerating {
        substeps: u32,
    },
    Stopped,
}

impl RobotMode {
    pub fn label(&self) -> &'static str {
        match self {
            RobotMode::Running => "running",
            RobotMode::StoppingPending { .. } => "stopping_pending",
            RobotMode::Decelerating { .. } => "decelerating",
            RobotMode::Stopped => "stopped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    /// Path phase in [0, 1).
    pub phase: f64,
    /// Fraction of nominal speed in [0, 1].
    pub speed_factor: f64,
    pub mode: RobotMode,
}

impl RobotState {
    pub fn running() -> Self {
        RobotState {
            phase: 0.0,
            speed_factor: 1.0,
            mode: RobotMode::Running,
        }
    }

    pub fn is_moving(&self) -> bool {
        self.speed_factor > 0.0
    }
}

/// Advances the robot by one substep. A signal arriving while running starts
/// the linear ramp to standstill over `stopping_time`.
pub fn step_robot(r: &RobotState, spec: &RobotSpec, dt: f64, stop_signal_arrived: bool) -> RobotState {
    let mut next = *r;
    match r.mode {
        RobotMode::Stopped => return next,
        RobotMode::Running | RobotMode::StoppingPending { .. } if stop_signal_arrived => {
            next.mode = RobotMode::Decelerating { substeps: 0 };
        }
        _ => {}
    }
    if let RobotMode::Decelerating { substeps } = next.mode {
        let n = substeps + 1;
        let lambda = 1.0 - f64::from(n) * dt / spec.stopping_time;
        if lambda <= 1e-12 {
            next.speed_factor = 0.0;
            next.mode = RobotMode::Stopped;
            return next;
        }
        next.speed_factor = lambda;
        next.mode = RobotMode::Decelerating { substeps: n };
    }
    let advance = next.speed_factor * spec.nominal_speed * dt / spec.max_path_length();
    next.phase = wrap_phase(r.phase + advance);
    next
}

fn wrap_phase(u: f64) -> f64 {
    let w = u.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotPoint {
    pub name: String,
    pub position: Vec2,
    /// m/s
    pub speed: f64,
}

/// Tracked robot points in declaration order; speeds scale with path length.
pub fn robot_points(r: &RobotState, spec: &RobotSpec) -> Vec<RobotPoint> {
    let l_max = spec.max_path_length();
    spec.point_paths
        .iter()
        .map(|p| RobotPoint {
            name: p.name.clone(),
            position: polyline_point_at(&p.path, r.phase),
            speed: r.speed_factor * spec.nominal_speed * p.path.length() / l_max,
        })
        .collect()
}

pub(crate) fn scanner_detects(zone: &Polygon, feet: Vec2, footprint_radius: f64) -> bool {
    point_in_polygon(feet, zone) || zone.boundary_distance(feet) <= footprint_radius
}

/// Per-sensor detection for one substep (`h_prev` to `h_now`).
///
/// Scanners see the floor footprint only. Curtains fire when the footprint
/// centre or the shoulder centre crosses the curtain plane.
pub fn sense(sensors: &[SensorSpec], h_prev: &HumanState, h_now: &HumanState, params: &HumanParams) -> Vec<bool> {
    sensors
        .iter()
        .map(|s| match &s.kind {
            SensorKind::ScannerZone(zone) => scanner_detects(zone, h_now.position, params.footprint_radius),
            SensorKind::LightCurtain(curtain) => {
                let feet = Segment::new(h_prev.position, h_now.position);
                let shoulder = Segment::new(shoulder_center(h_prev, params), shoulder_center(h_now, params));
                segments_intersect(&feet, curtain) || segments_intersect(&shoulder, curtain)
            }
        })
        .collect()
}
