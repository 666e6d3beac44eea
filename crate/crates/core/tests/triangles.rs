mod support;

use curvexfer::tri_intersect::{all_edge_intersections, classify_event, intersect_triangles, EventKind, InteriorCurve};
use curvexfer::{BezierTriangle, CurvedPolygon, StandardNodes};
use rand::Rng;
use support::*;

#[test]
fn quadratic_example_nodes_and_map() {
    let b = quadratic_example();
    let expected = [(0.0, 4.0), (2.0, 4.0), (4.0, 4.0), (2.0, 6.0), (5.0, 7.0), (4.0, 8.0)];
    for ((s, t), (x, y)) in curvexfer::net::lattice(2).into_iter().zip(expected) {
        assert!(close_pt(quadratic_example_map(s, t), pt(x, y), 1e-15));
    }
    let mut r = rng(2);
    for _ in 0..50 {
        let (s, t) = (r.gen_range(0.0..1.0), r.gen_range(0.0..1.0));
        let (s, t) = if s + t > 1.0 { (1.0 - s, 1.0 - t) } else { (s, t) };
        assert!(close_pt(b.eval(s, t), quadratic_example_map(s, t), 1e-12));
    }
    for (a, e) in b.to_nodes().nodes().iter().zip(expected) {
        assert!(close_pt(*a, pt(e.0, e.1), 1e-12));
    }
}

#[test]
fn linear_triangle_is_barycentric() {
    let c = [pt(1.0, 2.0), pt(4.0, 1.0), pt(2.0, 5.0)];
    let t = StandardNodes::new(1, c.to_vec()).unwrap().to_triangle().unwrap();
    assert_eq!(t.control_net(), &c);
    for (s, u) in [(0.2, 0.3), (0.0, 1.0), (0.5, 0.5)] {
        let l1 = 1.0 - s - u;
        assert!(close_pt(t.eval(s, u), c[0] * l1 + c[1] * s + c[2] * u, 1e-14));
    }
}

#[test]
fn node_net_round_trip() {
    let mut r = rng(3);
    for _ in 0..50 {
        let t = random_quadratic(&mut r, pt(0.0, 0.0), 2.0, 0.2);
        let again = t.to_nodes().to_triangle().unwrap();
        for (a, b) in t.control_net().iter().zip(again.control_net()) {
            assert!(close_pt(*a, *b, 1e-12));
        }
    }
}

#[test]
fn worked_edges() {
    let (b0, b1) = worked_pair();
    let [e0, e1, e2] = b0.edges();
    let [e3, _, _] = b1.edges();
    for i in 0..=10 {
        let r = i as f64 / 10.0;
        assert!(close_pt(e0.eval(r), pt(8.0 * r, 0.0), 1e-14));
        assert!(close_pt(e1.eval(r), pt(8.0 * (1.0 - r), 8.0 * r), 1e-14));
        assert!(close_pt(e2.eval(r), pt(0.0, 8.0 * (1.0 - r)), 1e-14));
        assert!(close_pt(e3.eval(r), pt(2.0 * (6.0 * r - 1.0), 4.0 * (2.0 * r - 1.0).powi(2)), 1e-13));
    }
}

fn inverted() -> BezierTriangle {
    // b(s,t) = [(1-s-t)^2 + s^2, s^2 + t^2] from its standard nodes.
    let nodes = curvexfer::net::lattice(2)
        .into_iter()
        .map(|(s, t)| pt((1.0 - s - t).powi(2) + s * s, s * s + t * t))
        .collect();
    StandardNodes::new(2, nodes).unwrap().to_triangle().unwrap()
}

#[test]
fn inverted_element_jacobian() {
    let b = inverted();
    assert!(!b.is_valid());
    assert!(b.jacobian_det(0.5, 0.0) > 0.0);
    assert!(b.jacobian_det(0.0, 0.5) < 0.0);
    // By hand, det(Db) = -4 (s^2 - st - t^2 - s + t), which vanishes on the stated curve.
    let mut r = rng(4);
    for _ in 0..50 {
        let (s, t) = (r.gen_range(0.0..0.5), r.gen_range(0.0..0.5));
        let curve = s * s - s * t - t * t - s + t;
        assert!(close(b.jacobian_det(s, t), -4.0 * curve, 1e-12));
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut r = rng(5);
    for _ in 0..10 {
        let t = random_quadratic(&mut r, pt(1.0, -1.0), 1.5, 0.2);
        for _ in 0..3 {
            let (s, u) = (r.gen_range(0.05..0.45), r.gen_range(0.05..0.45));
            assert!(close(t.jacobian_det(s, u), fd_jacobian_det(&t, s, u), 1e-6));
        }
    }
}

#[test]
fn subdivision_children() {
    let mut r = rng(6);
    for _ in 0..10 {
        let t = random_quadratic(&mut r, pt(0.0, 0.0), 1.0, 0.2);
        let kids = t.subdivide();
        for _ in 0..20 {
            let (s, u) = (r.gen_range(0.0..0.5), r.gen_range(0.0..0.5));
            let (s, u) = if s + u > 1.0 { (1.0 - s, 1.0 - u) } else { (s, u) };
            assert!(close_pt(kids[0].eval(s, u), t.eval(s / 2.0, u / 2.0), 1e-13));
        }
        let total: f64 = kids.iter().map(|k| CurvedPolygon::from_triangle(k).area()).sum();
        assert!(close(total, t.area(), 1e-12));
    }
}

#[test]
fn locate_inverts_quadratic_example() {
    let b = quadratic_example();
    let (s, t) = b.locate_point(pt(2.0, 4.0)).unwrap().unwrap();
    assert!(close(s, 0.5, 1e-12) && close(t, 0.0, 1e-12));
    // b^{-1}(x, y) = [(x - y + 4)/4, (y - 4)/(x - y + 8)]
    let q = pt(3.0, 5.5);
    let (s, t) = b.locate_point(q).unwrap().unwrap();
    assert!(close(s, (q.x - q.y + 4.0) / 4.0, 1e-12));
    assert!(close(t, (q.y - 4.0) / (q.x - q.y + 8.0), 1e-12));
    assert!(b.locate_point(pt(-1.0, 4.0)).unwrap().is_none());
}

#[test]
fn locate_recovers_random_parameters() {
    let mut r = rng(7);
    let t = random_quadratic(&mut r, pt(0.0, 0.0), 1.0, 0.2);
    for _ in 0..100 {
        let (s, u) = (r.gen_range(0.0..1.0), r.gen_range(0.0..1.0));
        let (s, u) = if s + u > 1.0 { (1.0 - s, 1.0 - u) } else { (s, u) };
        let (s2, u2) = t.locate_point(t.eval(s, u)).unwrap().expect("point is inside");
        assert!(close(s, s2, 1e-9) && close(u, u2, 1e-9));
    }
}

#[test]
fn worked_events_and_classification() {
    let (b0, b1) = worked_pair();
    let mut events = all_edge_intersections(&b0, &b1).unwrap();
    events.sort_by(|a, b| a.s.partial_cmp(&b.s).unwrap());
    assert_eq!(events.len(), 3);
    let find = |e0: usize| events.iter().find(|e| e.edge_index_0 == e0 && e.edge_index_1 == 0).unwrap();
    let i1 = find(2);
    assert!(close(i1.s, 7.0 / 9.0, 1e-12) && close(i1.t, 1.0 / 6.0, 1e-12));
    assert_eq!(i1.kind, EventKind::Transversal);
    assert!(i1.transversality > 0.0);
    assert_eq!(classify_event(i1).unwrap(), InteriorCurve::Second);
    let i2 = find(0);
    assert!(close(i2.s, 0.5, 1e-6) && close(i2.t, 0.5, 1e-6));
    assert_eq!(i2.kind, EventKind::Tangent);
    assert_eq!(classify_event(i2).unwrap(), InteriorCurve::Neither);
    let i3 = find(1);
    assert!(close(i3.s, 0.125, 1e-12) && close(i3.t, 0.75, 1e-12));
    assert_eq!(i3.kind, EventKind::Transversal);
    assert!(close(i3.transversality, -160.0, 1e-9));
    assert_eq!(classify_event(i3).unwrap(), InteriorCurve::First);
}

/// Segment labels `(3 * owner + edge, start, end)` rotated to start at `first`.
fn labelled(poly: &CurvedPolygon, first: usize) -> Vec<(usize, f64, f64)> {
    let segs: Vec<_> = poly.origins().iter().map(|o| o.unwrap()).map(|o| (3 * o.triangle + o.edge, o.start, o.end)).collect();
    let k = segs.iter().position(|s| s.0 == first).expect("label present");
    (0..segs.len()).map(|i| segs[(k + i) % segs.len()]).collect()
}

#[test]
fn worked_intersection_polygon() {
    let (b0, b1) = worked_pair();
    let polys = intersect_triangles(&b0, &b1).unwrap();
    assert_eq!(polys.len(), 1);
    let segs = labelled(&polys[0], 3);
    let expected = [(3, 1.0 / 6.0, 0.75), (1, 0.125, 1.0), (2, 0.0, 7.0 / 9.0)];
    assert_eq!(segs.len(), 3);
    for (g, e) in segs.iter().zip(expected) {
        assert_eq!(g.0, e.0);
        assert!(close(g.1, e.1, 1e-9) && close(g.2, e.2, 1e-9), "{g:?} vs {e:?}");
    }
    let corners: Vec<_> = polys[0].segments().iter().map(|s| s.start()).collect();
    for v in [pt(0.0, 16.0 / 9.0), pt(7.0, 1.0), pt(0.0, 8.0)] {
        assert!(corners.iter().any(|c| close_pt(*c, v, 1e-10)), "{v:?} missing from {corners:?}");
    }
}

#[test]
fn four_sided_intersection() {
    let (t0, t1) = four_sided_pair();
    let polys = intersect_triangles(&t0, &t1).unwrap();
    assert_eq!(polys.len(), 1);
    let segs = labelled(&polys[0], 0);
    let expected = [(0, 0.0, 0.125), (5, 0.875, 1.0), (3, 0.0, 1.0 / 7.0), (2, 6.0 / 7.0, 1.0)];
    assert_eq!(segs.len(), 4);
    for (g, e) in segs.iter().zip(expected) {
        assert_eq!(g.0, e.0);
        assert!(close(g.1, e.1, 1e-8) && close(g.2, e.2, 1e-8), "{g:?} vs {e:?}");
    }
}

#[test]
fn identical_straight_triangles_meet_at_corners() {
    let t = BezierTriangle::affine(1, [pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0)]);
    let events = all_edge_intersections(&t, &t).unwrap();
    assert!(!events.is_empty());
    let corners = t.corners();
    for e in &events {
        assert_eq!(e.kind, EventKind::Corner);
        assert!(corners.iter().any(|c| close_pt(*c, e.point, 1e-12)));
    }
    let polys = intersect_triangles(&t, &t).unwrap();
    assert_eq!(polys.len(), 1);
    assert!(close(polys[0].area(), 0.5, 1e-14));
}

#[test]
fn straight_pairs_match_polygon_clipping() {
    let mut r = rng(8);
    let mut nonempty = 0;
    for _ in 0..200 {
        let a = random_straight(&mut r, pt(0.0, 0.0), 1.0);
        let off = pt(r.gen_range(-0.8..0.8), r.gen_range(-0.8..0.8));
        let b = random_straight(&mut r, off, 1.0);
        let ta = BezierTriangle::affine(1, a);
        let tb = BezierTriangle::affine(r.gen_range(1..=3), b);
        let area: f64 = intersect_triangles(&ta, &tb).unwrap().iter().map(|p| p.area()).sum();
        let clipped = clip_convex(&a, &b);
        let oracle = if clipped.len() >= 3 { shoelace(&clipped) } else { 0.0 };
        nonempty += usize::from(oracle > 0.0);
        assert!(close(area, oracle, 1e-10), "area {area} vs clipping {oracle}");
    }
    assert!(nonempty > 100);
}

#[test]
fn quadratic_pairs_match_monte_carlo() {
    let mut r = rng(9);
    for k in 0..3 {
        let a = random_quadratic(&mut r, pt(0.0, 0.0), 1.0, 0.25);
        let b = random_quadratic(&mut r, pt(0.3, 0.2), 1.0, 0.25);
        let area: f64 = intersect_triangles(&a, &b).unwrap().iter().map(|p| p.area()).sum();
        let (est, se) = monte_carlo_overlap(&a, &b, 1_000_000, 100 + k);
        assert!((area - est).abs() <= 3.0 * se, "area {area} vs Monte Carlo {est} ± {se}");
    }
}

#[test]
fn containment_and_disjointness() {
    let outer = BezierTriangle::affine(2, [pt(0.0, 0.0), pt(4.0, 0.0), pt(0.0, 4.0)]);
    let inner = random_quadratic(&mut rng(10), pt(1.0, 1.0), 0.3, 0.1);
    for (a, b) in [(&outer, &inner), (&inner, &outer)] {
        let polys = intersect_triangles(a, b).unwrap();
        assert_eq!(polys.len(), 1);
        assert!(close(polys[0].area(), inner.area(), 1e-12));
    }
    let far = BezierTriangle::affine(2, [pt(10.0, 10.0), pt(11.0, 10.0), pt(10.0, 11.0)]);
    assert!(intersect_triangles(&outer, &far).unwrap().is_empty());
}

#[test]
fn tangent_contact_is_empty() {
    // b1's bottom edge touches b0's top-free side only at a tangent point.
    let (b0, _) = worked_pair();
    let cap = BezierTriangle::new(
        2,
        vec![pt(-2.0, -4.0), pt(4.0, 4.0), pt(10.0, -4.0), pt(-1.0, -7.0), pt(5.0, -7.0), pt(0.0, -10.0)],
    )
    .unwrap();
    let flipped = BezierTriangle::new(2, vec![cap.control_net()[0], cap.control_net()[3], cap.control_net()[5], cap.control_net()[1], cap.control_net()[4], cap.control_net()[2]]).unwrap();
    let t = if cap.is_valid() { cap } else { flipped };
    assert!(t.is_valid());
    let polys = intersect_triangles(&b0, &t).unwrap();
    let area: f64 = polys.iter().map(|p| p.area()).sum();
    assert!(area.abs() < 1e-12, "tangent contact produced area {area}");
}
