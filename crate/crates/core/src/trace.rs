//! JSONL substep traces and summary records.
//!
//! Every float is rounded to 9 significant digits before serialization so
//! that output bytes depend only on the simulated values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cell::Scenario;
use crate::search::{SearchConfig, SearchOutcome};
use crate::world::{StepInfo, SubstepRecord};

pub const TRACE_VERSION: u32 = 1;
pub const SUMMARY_VERSION: u32 = 1;

/// Rounds to 9 significant digits.
pub fn round9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanRecord {
    pub x: f64,
    pub y: f64,
    pub heading_rad: f64,
    pub bend_fwd_deg: f64,
    pub bend_lat_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub name: String,
    pub x: f64,
    pub y: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotRecord {
    pub u: f64,
    pub lambda: f64,
    pub mode: String,
    pub points: Vec<PointRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorRecord {
    pub kind: String,
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub v: u32,
    pub t: f64,
    pub step: usize,
    pub substep: u32,
    pub human: HumanRecord,
    pub robot: RobotRecord,
    pub sensors: Vec<SensorRecord>,
    pub d_hr: f64,
    pub v_r: f64,
    pub c_s: f64,
    #[serde(rename = "unsafe")]
    pub unsafe_state: bool,
}

impl TraceRecord {
    pub fn from_substep(rec: &SubstepRecord, scenario: &Scenario) -> Self {
        TraceRecord {
            v: TRACE_VERSION,
            t: round9(rec.t),
            step: rec.step,
            substep: rec.substep,
            human: HumanRecord {
                x: round9(rec.human.position.x),
                y: round9(rec.human.position.y),
                heading_rad: round9(rec.human.heading),
                bend_fwd_deg: round9(rec.human.bend_forward),
                bend_lat_deg: round9(rec.human.bend_lateral),
            },
            robot: RobotRecord {
                u: round9(rec.robot.phase),
                lambda: round9(rec.robot.speed_factor),
                mode: rec.robot.mode.label().to_string(),
                points: rec
                    .points
                    .iter()
                    .map(|p| PointRecord {
                        name: p.name.clone(),
                        x: round9(p.position.x),
                        y: round9(p.position.y),
                        speed: round9(p.speed),
                    })
                    .collect(),
            },
            sensors: scenario
                .sensors
                .iter()
                .zip(&rec.detections)
                .map(|(s, &d)| SensorRecord {
                    kind: s.kind.label().to_string(),
                    detected: d,
                })
                .collect(),
            d_hr: round9(rec.obs.d_hr),
            v_r: round9(rec.obs.v_r),
            c_s: round9(rec.obs.safety_index()),
            unsafe_state: rec.obs.unsafe_state,
        }
    }
}

/// All substep records of a replayed action sequence.
pub fn trace_records(steps: &[StepInfo], scenario: &Scenario) -> Vec<TraceRecord> {
    steps
        .iter()
        .flat_map(|s| s.substeps.iter())
        .map(|r| TraceRecord::from_substep(r, scenario))
        .collect()
}

pub fn write_jsonl(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error("line {line}: unsupported trace version {found} (expected {TRACE_VERSION})")]
    Version { line: usize, found: u64 },
    #[error("trace is empty")]
    Empty,
}

/// Parses a JSONL trace, checking the record version before the schema.
pub fn parse_jsonl(text: &str) -> Result<Vec<TraceRecord>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|source| TraceError::Parse { line: line_no, source })?;
        let v = value.get("v").and_then(|v| v.as_u64()).unwrap_or(0);
        if v != u64::from(TRACE_VERSION) {
            return Err(TraceError::Version {
                line: line_no,
                found: v,
            });
        }
        let rec = serde_json::from_value(value).map_err(|source| TraceError::Parse { line: line_no, source })?;
        out.push(rec);
    }
    if out.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigRecord {
    pub max_episodes: usize,
    pub episode_len: usize,
    pub c_uct: f64,
    pub commit_interval: usize,
    pub terminal_bonus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub v: u32,
    pub scenario: String,
    pub algorithm: String,
    pub seed: u64,
    pub found: bool,
    pub episodes_used: usize,
    pub hazard_actions: Vec<usize>,
    pub config: ConfigRecord,
}

impl Summary {
    pub fn new(scenario: &Scenario, cfg: &SearchConfig, outcome: &SearchOutcome) -> Self {
        Summary {
            v: SUMMARY_VERSION,
            scenario: scenario.name.clone(),
            algorithm: cfg.algorithm.name().to_string(),
            seed: cfg.seed,
            found: outcome.found,
            episodes_used: outcome.episodes_used,
            hazard_actions: outcome
                .hazard_actions
                .as_ref()
                .map(|a| a.iter().map(|a| a.index()).collect())
                .unwrap_or_default(),
            config: ConfigRecord {
                max_episodes: cfg.max_episodes,
                episode_len: cfg.episode_len,
                c_uct: round9(cfg.c_uct),
                commit_interval: cfg.commit_interval,
                terminal_bonus: round9(cfg.terminal_bonus),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_nine_digits() {
        assert_eq!(round9(1.0), 1.0);
        assert_eq!(round9(0.1234567891234), 0.123456789);
        assert_eq!(round9(-9.876543212345), -9.87654321);
        assert_eq!(round9(1e-20), 1e-20);
        assert_eq!(round9(-0.0).to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn rejects_other_versions() {
        let err = parse_jsonl("{\"v\":2}\n").unwrap_err();
        assert!(matches!(err, TraceError::Version { line: 1, found: 2 }));
        assert!(matches!(parse_jsonl("\n"), Err(TraceError::Empty)));
        assert!(matches!(parse_jsonl("{\"v\":1}"), Err(TraceError::Parse { .. })));
    }
}
