use std::f64::consts::TAU;

use hazardforge::geometry::{
    clip_disc_motion, distance_point_segment, point_in_polygon, polyline_point_at, segment_distance,
    segments_intersect, Polygon, Polyline, Segment, Vec2,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Star-shaped polygon around the origin: simple and counter-clockwise by construction.
fn star_polygon(radii: &[f64], jitter: &[f64]) -> Polygon {
    let n = radii.len();
    let verts = (0..n)
        .map(|i| {
            let a = (i as f64 + 0.8 * jitter[i]) * TAU / n as f64;
            Vec2::new(radii[i] * a.cos(), radii[i] * a.sin())
        })
        .collect();
    Polygon::new(verts).expect("star polygon is valid")
}

/// Even-odd crossing count along an arbitrary ray direction.
fn ray_cast_reference(p: Vec2, verts: &[Vec2], dir: Vec2) -> bool {
    let mut crossings = 0;
    for i in 0..verts.len() {
        let a = verts[i];
        let b = verts[(i + 1) % verts.len()];
        let e = b - a;
        let denom = dir.cross(e);
        if denom.abs() < 1e-15 {
            continue;
        }
        let w = a - p;
        let t = w.cross(e) / denom;
        let s = w.cross(dir) / denom;
        if t > 0.0 && (0.0..1.0).contains(&s) {
            crossings += 1;
        }
    }
    crossings % 2 == 1
}

fn min_edge_distance(p: Vec2, verts: &[Vec2]) -> f64 {
    (0..verts.len())
        .map(|i| distance_point_segment(p, &Segment::new(verts[i], verts[(i + 1) % verts.len()])))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn point_in_polygon_matches_ray_casting() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.gen_range(3..12);
        let radii: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..2.0)).collect();
        let jitter: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let poly = star_polygon(&radii, &jitter);
        let dir = Vec2::from_angle(rng.gen_range(0.1..1.4));
        let mut checked = 0;
        while checked < 10_000 {
            let p = Vec2::new(rng.gen_range(-2.2..2.2), rng.gen_range(-2.2..2.2));
            // points on the boundary are inside by convention; the reference cannot see that
            if min_edge_distance(p, poly.vertices()) < 1e-7 {
                continue;
            }
            assert_eq!(
                point_in_polygon(p, &poly),
                ray_cast_reference(p, poly.vertices(), dir),
                "point {p:?}"
            );
            checked += 1;
        }
    }
}

fn vec2(range: f64) -> impl Strategy<Value = Vec2> {
    (-range..range, -range..range).prop_map(|(x, y)| Vec2::new(x, y))
}

fn segment(range: f64) -> impl Strategy<Value = Segment> {
    (vec2(range), vec2(range))
        .prop_filter("non-degenerate", |(a, b)| a.distance(*b) > 1e-3)
        .prop_map(|(a, b)| Segment::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn zero_distance_iff_degenerate_intersection(p in vec2(3.0), s in segment(3.0), on in 0.0..1.0f64, snap in any::<bool>()) {
        // half of the cases put the point exactly on the segment
        let p = if snap { s.a.lerp(s.b, on) } else { p };
        let point = Segment { a: p, b: p };
        let d = distance_point_segment(p, &s);
        prop_assert_eq!(d <= 1e-9, segments_intersect(&point, &s));
    }

    #[test]
    fn segment_distance_is_symmetric_and_bounded(s1 in segment(3.0), s2 in segment(3.0)) {
        let d12 = segment_distance(&s1, &s2);
        let d21 = segment_distance(&s2, &s1);
        prop_assert!((d12 - d21).abs() < 1e-12);
        // never larger than any sampled point pair
        for i in 0..=8 {
            let p = s1.a.lerp(s1.b, i as f64 / 8.0);
            prop_assert!(d12 <= distance_point_segment(p, &s2) + 1e-12);
        }
    }

    #[test]
    fn clip_never_penetrates(
        walls in prop::collection::vec(segment(2.0), 1..6),
        from in vec2(2.0),
        to in vec2(2.5),
        radius in 0.05..0.4f64,
    ) {
        prop_assume!(walls.iter().all(|w| distance_point_segment(from, w) >= radius));
        let end = clip_disc_motion(from, to, radius, &walls).expect("start is clear");
        // every point of the travelled straight line keeps clearance
        for k in 0..=64 {
            let q = from.lerp(end, k as f64 / 64.0);
            for w in &walls {
                prop_assert!(distance_point_segment(q, w) >= radius - 1e-9);
            }
        }
        // and the end lies on the requested ray, no farther than the target
        let along = (end - from).norm();
        prop_assert!(along <= (to - from).norm() + 1e-12);
        prop_assert!((end - from).cross(to - from).abs() <= 1e-9 * (1.0 + (to - from).norm()));
    }

    #[test]
    fn polyline_is_lipschitz_in_arc_length(
        pts in prop::collection::vec(vec2(3.0), 3..8),
        closed in any::<bool>(),
        u1 in -0.5..1.5f64,
        u2 in -0.5..1.5f64,
    ) {
        let Ok(path) = Polyline::new(pts, closed) else { return Ok(()); };
        let l = path.length();
        let (w1, w2) = if closed { (u1.rem_euclid(1.0), u2.rem_euclid(1.0)) } else { (u1.clamp(0.0, 1.0), u2.clamp(0.0, 1.0)) };
        let mut du = (w1 - w2).abs();
        if closed {
            du = du.min(1.0 - du);
        }
        let gap = polyline_point_at(&path, u1).distance(polyline_point_at(&path, u2));
        prop_assert!(gap <= du * l + 1e-9, "gap {} > {}", gap, du * l);
    }
}
