//! Grid-based separation check for a cell layout.
//!
//! Floods the floor (on a square grid) from the human start through every
//! position reachable without triggering a sensor, then bounds from below
//! the time a human needs to touch a robot path from each position where a
//! sensor can first fire. A layout is certified when that bound exceeds the
//! stop chain (response time + stopping time) by a margin everywhere, and no
//! undetected position offers an unoccluded reach to any robot path.
//!
//! Walking distance is measured on the grid around walls and the table and
//! scaled down by the worst octile-to-Euclidean ratio; the shoulder may be
//! anywhere within its maximal offset disc; one grid diagonal of slack is
//! subtracted. Bending time is ignored.

use std::collections::VecDeque;

use super::{scanner_detects, Scenario, SensorKind};
use crate::geometry::{
    distance_point_segment, point_in_polygon, polyline_point_at, segments_intersect, Segment, Vec2, EPS_GEO,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ClearanceReport {
    pub grid: f64,
    /// Largest response time plus stopping time over all sensors, s.
    pub required_time: f64,
    /// Lower bound on time-to-contact over all first-detection positions, s.
    pub min_time_to_contact: f64,
    pub worst_position: Option<Vec2>,
    /// An undetected position with a possible unoccluded reach, if any.
    pub undetected_contact: Option<Vec2>,
    pub reachable_cells: usize,
}

impl ClearanceReport {
    pub fn margin(&self) -> f64 {
        self.min_time_to_contact - self.required_time
    }

    pub fn certifies(&self, margin: f64) -> bool {
        self.undetected_contact.is_none() && self.margin() >= margin
    }
}

/// Maximum horizontal shoulder offset from the feet.
pub fn max_shoulder_offset(scenario: &Scenario) -> f64 {
    let p = &scenario.human_params;
    let f = p.max_forward_flexion_deg.to_radians().sin();
    let l = p.max_lateral_flexion_deg.to_radians().sin();
    p.torso_length * f.hypot(l).min(1.0)
}

pub fn analyze_clearance(scenario: &Scenario, grid: f64) -> ClearanceReport {
    let params = &scenario.human_params;
    let radius = params.footprint_radius;
    let reach = params.reach_radius();
    let lean = max_shoulder_offset(scenario);
    let slack = grid * std::f64::consts::SQRT_2;

    let mut lo = scenario.human_start.position;
    let mut hi = lo;
    let all_points = scenario
        .walls
        .iter()
        .flat_map(|w| [w.a, w.b])
        .chain(scenario.table.vertices().iter().copied());
    for p in all_points {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let nx = ((hi.x - lo.x) / grid).ceil() as usize + 1;
    let ny = ((hi.y - lo.y) / grid).ceil() as usize + 1;
    let cell = |i: usize, j: usize| Vec2::new(lo.x + i as f64 * grid, lo.y + j as f64 * grid);

    let free = |p: Vec2| {
        !point_in_polygon(p, &scenario.table)
            && scenario
                .obstacles()
                .iter()
                .all(|o| distance_point_segment(p, o) >= radius - EPS_GEO)
    };
    let scanner_hit = |p: Vec2| {
        scenario.sensors.iter().any(|s| match &s.kind {
            SensorKind::ScannerZone(z) => scanner_detects(z, p, radius),
            SensorKind::LightCurtain(_) => false,
        })
    };
    let curtains: Vec<Segment> = scenario
        .sensors
        .iter()
        .filter_map(|s| match &s.kind {
            SensorKind::LightCurtain(c) => Some(*c),
            SensorKind::ScannerZone(_) => None,
        })
        .collect();
    let crosses_curtain = |a: Vec2, b: Vec2| curtains.iter().any(|c| segments_intersect(&Segment::new(a, b), c));

    let path_points: Vec<Vec2> = scenario
        .robot
        .point_paths
        .iter()
        .flat_map(|p| {
            let n = (p.path.length() / 0.02).ceil().max(4.0) as usize;
            (0..n).map(move |k| polyline_point_at(&p.path, k as f64 / n as f64))
        })
        .collect();
    let occluders = scenario.occluders();
    let mut contact = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let p = cell(i, j);
            if free(p) {
                contact[j * nx + i] = reach_possible(p, &path_points, occluders, &[], reach, lean);
            }
        }
    }
    let walk_distance = geodesic_distance(nx, ny, grid, &contact, |i, j| free(cell(i, j)));
    // octile grid distance overestimates Euclidean length by at most this factor
    let octile_ratio = (4.0 - 2.0 * std::f64::consts::SQRT_2).sqrt();
    let time_to_contact =
        |i: usize, j: usize| (walk_distance[j * nx + i] / octile_ratio - slack).max(0.0) / params.walk_speed;

    // flood fill over undetected positions
    let start = scenario.human_start.position;
    let si = (((start.x - lo.x) / grid).round() as usize).min(nx - 1);
    let sj = (((start.y - lo.y) / grid).round() as usize).min(ny - 1);
    let mut seen = vec![false; nx * ny];
    let mut queue = VecDeque::new();
    let mut reachable = Vec::new();
    let mut min_ttc = f64::INFINITY;
    let mut worst = None;
    let mut note_trigger = |i: usize, j: usize| {
        let t = time_to_contact(i, j);
        if t < min_ttc {
            min_ttc = t;
            worst = Some(cell(i, j));
        }
    };
    if free(cell(si, sj)) {
        seen[sj * nx + si] = true;
        queue.push_back((si, sj));
    }
    while let Some((i, j)) = queue.pop_front() {
        let p = cell(i, j);
        reachable.push(p);
        if curtains.iter().any(|c| distance_point_segment(p, c) <= lean + slack) {
            note_trigger(i, j);
        }
        for (qi, qj) in neighbours(i, j, nx, ny) {
            let q = cell(qi, qj);
            if !free(q) {
                continue;
            }
            if scanner_hit(q) || crosses_curtain(p, q) {
                note_trigger(i, j);
                continue;
            }
            if !seen[qj * nx + qi] {
                seen[qj * nx + qi] = true;
                queue.push_back((qi, qj));
            }
        }
    }

    let undetected_contact = reachable
        .iter()
        .copied()
        .find(|&p| reach_possible(p, &path_points, occluders, &curtains, reach, lean));

    let required_time =
        scenario.sensors.iter().map(|s| s.response_time).fold(0.0, f64::max) + scenario.robot.stopping_time;

    ClearanceReport {
        grid,
        required_time,
        min_time_to_contact: min_ttc,
        worst_position: worst,
        undetected_contact,
        reachable_cells: reachable.len(),
    }
}

fn neighbours(i: usize, j: usize, nx: usize, ny: usize) -> impl Iterator<Item = (usize, usize)> {
    [
        (-1i64, -1i64),
        (-1, 0),
        (-1, 1),
        (0, -1),
        (0, 1),
        (1, -1),
        (1, 0),
        (1, 1),
    ]
    .into_iter()
    .filter_map(move |(di, dj)| {
        let (qi, qj) = (i as i64 + di, j as i64 + dj);
        (qi >= 0 && qj >= 0 && qi < nx as i64 && qj < ny as i64).then_some((qi as usize, qj as usize))
    })
}

/// Multi-source Dijkstra over free cells (8-neighbour, octile steps).
fn geodesic_distance(
    nx: usize,
    ny: usize,
    grid: f64,
    sources: &[bool],
    free: impl Fn(usize, usize) -> bool,
) -> Vec<f64> {
    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    let mut dist = vec![f64::INFINITY; nx * ny];
    let mut heap = std::collections::BinaryHeap::new();
    for (k, &s) in sources.iter().enumerate() {
        if s {
            dist[k] = 0.0;
            heap.push(Item(0.0, k));
        }
    }
    while let Some(Item(d, k)) = heap.pop() {
        if d > dist[k] {
            continue;
        }
        let (i, j) = (k % nx, k / nx);
        for (qi, qj) in neighbours(i, j, nx, ny) {
            if !free(qi, qj) {
                continue;
            }
            let step = if qi != i && qj != j {
                grid * std::f64::consts::SQRT_2
            } else {
                grid
            };
            let q = qj * nx + qi;
            if d + step < dist[q] {
                dist[q] = d + step;
                heap.push(Item(d + step, q));
            }
        }
    }
    dist
}

/// Whether some path point is within reach of a shoulder the human at `feet`
/// can lean to, with neither torso nor arm crossing an occluder. Shoulders
/// whose lean crosses one of `no_cross` are excluded.
fn reach_possible(
    feet: Vec2,
    path_points: &[Vec2],
    occluders: &[Segment],
    no_cross: &[Segment],
    reach: f64,
    lean: f64,
) -> bool {
    let near: Vec<Vec2> = path_points
        .iter()
        .copied()
        .filter(|q| q.distance(feet) <= reach + lean + 0.05)
        .collect();
    if near.is_empty() {
        return false;
    }
    let blocked = |a: Vec2, b: Vec2, segs: &[Segment]| segs.iter().any(|o| segments_intersect(&Segment::new(a, b), o));
    let mut shoulders = vec![feet];
    for ring in [0.5, 1.0] {
        for k in 0..32 {
            let theta = k as f64 * std::f64::consts::TAU / 32.0;
            shoulders.push(feet + Vec2::from_angle(theta) * (lean * ring));
        }
    }
    shoulders
        .into_iter()
        .filter(|&s| !blocked(feet, s, occluders) && !blocked(feet, s, no_cross))
        .any(|s| {
            near.iter()
                .any(|&q| q.distance(s) <= reach + EPS_GEO && !blocked(s, q, occluders))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::builtin_scenario;

    #[test]
    fn lean_offset_for_default_params() {
        let s = builtin_scenario("safe-baseline").unwrap();
        // sin^2(55) + sin^2(35) = 1, so the combined bend hits the torso cap
        assert!((max_shoulder_offset(&s) - 0.5).abs() < 1e-12);
    }
}
