//! JSON scenario documents (format_version 1).
//!
//! Robot paths are closed polylines; a document marks closure by repeating
//! the first vertex at the end of the list.

use serde::{Deserialize, Serialize};

use super::{NamedPath, ResumePolicy, RobotSpec, Scenario, ScenarioError, SensorKind, SensorSpec};
use crate::geometry::{Polygon, Polyline, Segment, Vec2, EPS_GEO};
use crate::human::HumanParams;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    format_version: u32,
    name: String,
    walls: Vec<[f64; 4]>,
    table: Vec<[f64; 2]>,
    sensors: Vec<SensorDoc>,
    robot: RobotDoc,
    human: HumanDoc,
    #[serde(default)]
    sim: SimDoc,
    #[serde(default)]
    resume_policy: ResumePolicyDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SensorDoc {
    ScannerZone {
        polygon: Vec<[f64; 2]>,
        #[serde(default = "default_response_time")]
        response_time: f64,
    },
    LightCurtain {
        segment: [f64; 4],
        #[serde(default = "default_response_time")]
        response_time: f64,
    },
}

fn default_response_time() -> f64 {
    0.1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotDoc {
    paths: PathsDoc,
    #[serde(default = "default_nominal_speed")]
    nominal_speed: f64,
    #[serde(default = "default_stopping_time")]
    stopping_time: f64,
}

fn default_nominal_speed() -> f64 {
    1.5
}

fn default_stopping_time() -> f64 {
    0.5
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathsDoc {
    tcp: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elbow: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HumanDoc {
    start: [f64; 2],
    heading_deg: f64,
    #[serde(default)]
    params: HumanParams,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimDoc {
    dt: f64,
    substeps_per_action: u32,
}

impl Default for SimDoc {
    fn default() -> Self {
        SimDoc {
            dt: 0.05,
            substeps_per_action: 4,
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum ResumePolicyDoc {
    #[default]
    Latched,
    AutoResume {
        clear_delay: f64,
    },
}

fn pt(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

fn segment(path: String, s: [f64; 4]) -> Result<Segment, ScenarioError> {
    Segment::try_new(Vec2::new(s[0], s[1]), Vec2::new(s[2], s[3]))
        .map_err(|e| ScenarioError::invalid(path, e.to_string()))
}

fn polygon(path: String, pts: &[[f64; 2]]) -> Result<Polygon, ScenarioError> {
    Polygon::new(pts.iter().copied().map(pt).collect()).map_err(|e| ScenarioError::invalid(path, e.to_string()))
}

fn closed_path(name: &str, pts: &[[f64; 2]]) -> Result<NamedPath, ScenarioError> {
    let field = format!("robot.point_paths.{name}");
    if pts.len() < 4 {
        return Err(ScenarioError::invalid(
            field,
            "closed path needs at least 3 distinct vertices",
        ));
    }
    let first = pt(pts[0]);
    let last = pt(pts[pts.len() - 1]);
    if first.distance(last) > EPS_GEO {
        return Err(ScenarioError::invalid(
            field,
            "path must be closed (last vertex must repeat the first)",
        ));
    }
    let vertices = pts[..pts.len() - 1].iter().copied().map(pt).collect();
    let path = Polyline::new(vertices, true).map_err(|e| ScenarioError::invalid(field, e.to_string()))?;
    Ok(NamedPath {
        name: name.to_string(),
        path,
    })
}

/// Parses and validates a scenario document.
pub fn load_scenario(document: &[u8]) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = serde_json::from_slice(document).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    if doc.format_version != FORMAT_VERSION {
        return Err(ScenarioError::invalid(
            "format_version",
            format!("unsupported version {} (expected {FORMAT_VERSION})", doc.format_version),
        ));
    }

    let walls = doc
        .walls
        .iter()
        .enumerate()
        .map(|(i, w)| segment(format!("walls[{i}]"), *w))
        .collect::<Result<Vec<_>, _>>()?;
    let table = polygon("table".into(), &doc.table)?;

    let sensors = doc
        .sensors
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(match s {
                SensorDoc::ScannerZone {
                    polygon: p,
                    response_time,
                } => SensorSpec {
                    kind: SensorKind::ScannerZone(polygon(format!("sensors[{i}].polygon"), p)?),
                    response_time: *response_time,
                },
                SensorDoc::LightCurtain {
                    segment: s,
                    response_time,
                } => SensorSpec {
                    kind: SensorKind::LightCurtain(segment(format!("sensors[{i}].segment"), *s)?),
                    response_time: *response_time,
                },
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;

    let mut point_paths = vec![closed_path("tcp", &doc.robot.paths.tcp)?];
    if let Some(elbow) = &doc.robot.paths.elbow {
        point_paths.push(closed_path("elbow", elbow)?);
    }
    let robot = RobotSpec {
        point_paths,
        nominal_speed: doc.robot.nominal_speed,
        stopping_time: doc.robot.stopping_time,
    };

    let resume_policy = match doc.resume_policy {
        ResumePolicyDoc::Latched => ResumePolicy::Latched,
        ResumePolicyDoc::AutoResume { clear_delay } => ResumePolicy::AutoResume { clear_delay },
    };

    Scenario::new(
        doc.name,
        walls,
        table,
        sensors,
        robot,
        pt(doc.human.start),
        doc.human.heading_deg,
        doc.human.params,
        doc.sim.dt,
        doc.sim.substeps_per_action,
        resume_policy,
    )
}

/// Serializes a scenario back into its document form (pretty-printed JSON).
pub fn scenario_to_json(s: &Scenario) -> String {
    let xy = |v: Vec2| [v.x, v.y];
    let seg = |s: &Segment| [s.a.x, s.a.y, s.b.x, s.b.y];
    let closed = |p: &Polyline| {
        let mut pts: Vec<[f64; 2]> = p.vertices().iter().copied().map(xy).collect();
        pts.push(pts[0]);
        pts
    };
    let doc = ScenarioDoc {
        format_version: FORMAT_VERSION,
        name: s.name.clone(),
        walls: s.walls.iter().map(seg).collect(),
        table: s.table.vertices().iter().copied().map(xy).collect(),
        sensors: s
            .sensors
            .iter()
            .map(|sensor| match &sensor.kind {
                SensorKind::ScannerZone(p) => SensorDoc::ScannerZone {
                    polygon: p.vertices().iter().copied().map(xy).collect(),
                    response_time: sensor.response_time,
                },
                SensorKind::LightCurtain(c) => SensorDoc::LightCurtain {
                    segment: seg(c),
                    response_time: sensor.response_time,
                },
            })
            .collect(),
        robot: RobotDoc {
            paths: PathsDoc {
                tcp: closed(&s.robot.point_paths[0].path),
                elbow: s
                    .robot
                    .point_paths
                    .iter()
                    .find(|p| p.name == "elbow")
                    .map(|p| closed(&p.path)),
            },
            nominal_speed: s.robot.nominal_speed,
            stopping_time: s.robot.stopping_time,
        },
        human: HumanDoc {
            start: xy(s.human_start.position),
            heading_deg: s.start_heading_deg,
            params: s.human_params,
        },
        sim: SimDoc {
            dt: s.dt,
            substeps_per_action: s.substeps_per_action,
        },
        resume_policy: match s.resume_policy {
            ResumePolicy::Latched => ResumePolicyDoc::Latched,
            ResumePolicy::AutoResume { clear_delay } => ResumePolicyDoc::AutoResume { clear_delay },
        },
    };
    serde_json::to_string_pretty(&doc).expect("scenario document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::builtin_scenario;

    fn s1_json() -> serde_json::Value {
        serde_json::from_str(&scenario_to_json(&builtin_scenario("s1-scanner-width").unwrap())).unwrap()
    }

    fn load_value(v: &serde_json::Value) -> Result<Scenario, ScenarioError> {
        load_scenario(serde_json::to_string(v).unwrap().as_bytes())
    }

    #[test]
    fn builtin_round_trip() {
        for name in crate::cell::BUILTIN_NAMES {
            let s = builtin_scenario(name).unwrap();
            let again = load_scenario(scenario_to_json(&s).as_bytes()).unwrap();
            assert_eq!(s, again, "{name}");
        }
    }

    #[test]
    fn start_inside_scanner_zone_is_rejected() {
        let mut v = s1_json();
        let zone = v["sensors"]
            .as_array()
            .unwrap()
            .iter()
            .find(|s| s["kind"] == "scanner_zone")
            .unwrap()
            .clone();
        let p = &zone["polygon"];
        let cx = (0..4).map(|i| p[i][0].as_f64().unwrap()).sum::<f64>() / 4.0;
        let cy = (0..4).map(|i| p[i][1].as_f64().unwrap()).sum::<f64>() / 4.0;
        v["human"]["start"] = serde_json::json!([cx, cy]);
        match load_value(&v) {
            Err(ScenarioError::Validation { path, .. }) => assert_eq!(path, "human_start"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn open_robot_path_is_rejected() {
        let mut v = s1_json();
        let tcp = v["robot"]["paths"]["tcp"].as_array_mut().unwrap();
        tcp.pop();
        match load_value(&v) {
            Err(ScenarioError::Validation { path, .. }) => assert!(path.starts_with("robot.point_paths"), "{path}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v = s1_json();
        v["colour"] = serde_json::json!("red");
        assert!(matches!(load_value(&v), Err(ScenarioError::Parse(_))));
        let mut v = s1_json();
        v["robot"]["max_payload"] = serde_json::json!(3.0);
        assert!(matches!(load_value(&v), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn malformed_and_wrong_version() {
        assert!(matches!(load_scenario(b"{ not json"), Err(ScenarioError::Parse(_))));
        let mut v = s1_json();
        v["format_version"] = serde_json::json!(2);
        match load_value(&v) {
            Err(ScenarioError::Validation { path, .. }) => assert_eq!(path, "format_version"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn param_overrides_and_auto_resume() {
        let mut v = s1_json();
        v["human"]["params"] = serde_json::json!({"walk_speed": 1.2});
        v["resume_policy"] = serde_json::json!({"auto_resume": {"clear_delay": 0.4}});
        let s = load_value(&v).unwrap();
        assert_eq!(s.human_params.walk_speed, 1.2);
        assert_eq!(s.human_params.upper_arm, 0.30);
        assert_eq!(s.resume_policy, ResumePolicy::AutoResume { clear_delay: 0.4 });
        let again = load_scenario(scenario_to_json(&s).as_bytes()).unwrap();
        assert_eq!(s, again);

        let mut v = s1_json();
        v["human"]["params"] = serde_json::json!({"max_forward_flexion_deg": 120.0});
        match load_value(&v) {
            Err(ScenarioError::Validation { path, .. }) => {
                assert_eq!(path, "human.params.max_forward_flexion_deg")
            }
            other => panic!("{other:?}"),
        }
    }
}
