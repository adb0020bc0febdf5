//! Top-view SVG frames of a trace.

use std::fmt::Write as _;

use thiserror::Error;

use crate::cell::{Scenario, SensorKind};
use crate::geometry::{Segment, Vec2};
use crate::human::{shoulder_center, HumanState};
use crate::trace::TraceRecord;

const PX_PER_M: f64 = 80.0;
const MARGIN_PX: f64 = 20.0;
const REACH_RAYS: usize = 96;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("record {index}: {what} count {found} does not match scenario ({expected})")]
    Mismatch {
        index: usize,
        what: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("record {index}: {what} does not match scenario")]
    Field { index: usize, what: String },
    #[error("sampling interval must be >= 1")]
    BadInterval,
}

/// Fixed world-to-page transform derived from the scenario bounds.
#[derive(Debug, Clone, Copy)]
struct Page {
    min: Vec2,
    max: Vec2,
}

impl Page {
    fn new(sc: &Scenario) -> Self {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut add = |p: Vec2| {
            min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
            max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
        };
        for w in &sc.walls {
            add(w.a);
            add(w.b);
        }
        for &v in sc.table.vertices() {
            add(v);
        }
        add(sc.human_start.position);
        Page { min, max }
    }

    fn width(&self) -> f64 {
        (self.max.x - self.min.x) * PX_PER_M + 2.0 * MARGIN_PX
    }

    fn height(&self) -> f64 {
        (self.max.y - self.min.y) * PX_PER_M + 2.0 * MARGIN_PX
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        (
            MARGIN_PX + (p.x - self.min.x) * PX_PER_M,
            MARGIN_PX + (self.max.y - p.y) * PX_PER_M,
        )
    }
}

fn fmt_points(page: &Page, pts: impl IntoIterator<Item = Vec2>) -> String {
    let mut s = String::new();
    for (i, p) in pts.into_iter().enumerate() {
        let (x, y) = page.map(p);
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

fn line(out: &mut String, page: &Page, s: &Segment, attrs: &str) {
    let (x1, y1) = page.map(s.a);
    let (x2, y2) = page.map(s.b);
    let _ = writeln!(
        out,
        r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {attrs}/>"#
    );
}

/// Distance along the ray from `origin` in direction `dir` to the nearest occluder, capped at `max`.
fn ray_length(origin: Vec2, dir: Vec2, max: f64, occluders: &[Segment]) -> f64 {
    let mut best = max;
    for o in occluders {
        let e = o.b - o.a;
        let denom = dir.cross(e);
        if denom.abs() < 1e-12 {
            continue;
        }
        let w = o.a - origin;
        let t = w.cross(e) / denom;
        let s = w.cross(dir) / denom;
        if t >= 0.0 && (0.0..=1.0).contains(&s) {
            best = best.min(t);
        }
    }
    best
}

/// Reach disc around the shoulder, cut back by occluders along each ray.
fn reach_polygon(shoulder: Vec2, reach: f64, occluders: &[Segment]) -> Vec<Vec2> {
    (0..REACH_RAYS)
        .map(|k| {
            let dir = Vec2::from_angle(k as f64 * std::f64::consts::TAU / REACH_RAYS as f64);
            shoulder + dir * ray_length(shoulder, dir, reach, occluders)
        })
        .collect()
}

fn human_of(rec: &TraceRecord) -> HumanState {
    HumanState {
        position: Vec2::new(rec.human.x, rec.human.y),
        heading: rec.human.heading_rad,
        bend_forward: rec.human.bend_fwd_deg,
        bend_lateral: rec.human.bend_lat_deg,
    }
}

/// Checks that every record has the sensor and robot-point layout of `sc`.
pub fn check_trace(sc: &Scenario, records: &[TraceRecord]) -> Result<(), RenderError> {
    for (index, r) in records.iter().enumerate() {
        if r.sensors.len() != sc.sensors.len() {
            return Err(RenderError::Mismatch {
                index,
                what: "sensor",
                found: r.sensors.len(),
                expected: sc.sensors.len(),
            });
        }
        for (rs, ss) in r.sensors.iter().zip(&sc.sensors) {
            if rs.kind != ss.kind.label() {
                return Err(RenderError::Field {
                    index,
                    what: format!("sensor kind `{}`", rs.kind),
                });
            }
        }
        let paths = &sc.robot.point_paths;
        if r.robot.points.len() != paths.len() {
            return Err(RenderError::Mismatch {
                index,
                what: "robot point",
                found: r.robot.points.len(),
                expected: paths.len(),
            });
        }
        for (rp, np) in r.robot.points.iter().zip(paths) {
            if rp.name != np.name {
                return Err(RenderError::Field {
                    index,
                    what: format!("robot point `{}`", rp.name),
                });
            }
        }
    }
    Ok(())
}

/// Renders one frame.
pub fn render_frame(sc: &Scenario, rec: &TraceRecord) -> String {
    let page = Page::new(sc);
    let (w, h) = (page.width(), page.height());
    let mut out = String::new();
    let class = if rec.unsafe_state { r#" class="unsafe""# } else { "" };
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg"{class} width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{w:.0}" height="{h:.0}" fill="white"/>"#
    );

    for s in &sc.sensors {
        match &s.kind {
            SensorKind::ScannerZone(z) => {
                let _ = writeln!(
                    out,
                    r#"<polygon points="{}" fill="gold" fill-opacity="0.3" stroke="goldenrod" stroke-width="1"/>"#,
                    fmt_points(&page, z.vertices().iter().copied())
                );
            }
            SensorKind::LightCurtain(c) => {
                line(
                    &mut out,
                    &page,
                    c,
                    r#"stroke="orange" stroke-width="3" stroke-dasharray="8,5""#,
                );
            }
        }
    }
    let _ = writeln!(
        out,
        r#"<polygon points="{}" fill="gray" stroke="dimgray" stroke-width="1"/>"#,
        fmt_points(&page, sc.table.vertices().iter().copied())
    );
    for wall in &sc.walls {
        line(&mut out, &page, wall, r#"stroke="black" stroke-width="3""#);
    }
    for np in &sc.robot.point_paths {
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1" stroke-dasharray="3,3"/>"#,
            fmt_points(&page, np.path.vertices().iter().copied())
        );
    }

    let human = human_of(rec);
    let params = &sc.human_params;
    let shoulder = shoulder_center(&human, params);
    let _ = writeln!(
        out,
        r#"<polygon points="{}" fill="red" fill-opacity="0.2" stroke="none"/>"#,
        fmt_points(&page, reach_polygon(shoulder, params.reach_radius(), sc.occluders()))
    );
    for p in &rec.robot.points {
        let (x, y) = page.map(Vec2::new(p.x, p.y));
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="navy"/>"#);
    }
    let (fx, fy) = page.map(human.position);
    let _ = writeln!(
        out,
        r#"<circle cx="{fx:.2}" cy="{fy:.2}" r="{:.2}" fill="seagreen" fill-opacity="0.6" stroke="darkgreen"/>"#,
        params.footprint_radius * PX_PER_M
    );
    let tip = human.position + human.forward_dir() * (params.footprint_radius * 1.6);
    line(
        &mut out,
        &page,
        &Segment::new(human.position, tip),
        r#"stroke="darkgreen" stroke-width="2""#,
    );
    let (sx, sy) = page.map(shoulder);
    let _ = writeln!(out, r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="3" fill="darkgreen"/>"#);
    if rec.unsafe_state {
        let _ = writeln!(
            out,
            r#"<rect x="1.5" y="1.5" width="{:.0}" height="{:.0}" fill="none" stroke="red" stroke-width="3"/>"#,
            w - 3.0,
            h - 3.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN_PX:.0}" y="14" font-family="monospace" font-size="12">step {} substep {}  d_hr {:.3}  v_r {:.3}</text>"#,
        rec.step, rec.substep, rec.d_hr, rec.v_r
    );
    out.push_str("</svg>\n");
    out
}

/// Renders every `every`-th record, starting with the first. Returns
/// (file name, contents) pairs.
pub fn render_frames(
    sc: &Scenario,
    records: &[TraceRecord],
    every: usize,
) -> Result<Vec<(String, String)>, RenderError> {
    if every == 0 {
        return Err(RenderError::BadInterval);
    }
    check_trace(sc, records)?;
    Ok(records
        .iter()
        .enumerate()
        .step_by(every)
        .map(|(i, r)| (format!("frame_{i:04}.svg"), render_frame(sc, r)))
        .collect())
}
