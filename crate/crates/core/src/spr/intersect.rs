//! Exact tests for improper contact between a tetrahedron and a triangle.
//!
//! Two simplices meet properly when their intersection is the simplex spanned
//! by their shared vertices (or empty). Everything here is decided with exact
//! orientation signs; coplanar configurations are projected onto the
//! coordinate plane best aligned with the triangle.

use crate::geom::{cross, sub, Point3};
use crate::quality::{orient2d, orient3d, Orientation};

type P2 = [f64; 2];

fn project(p: &Point3, drop: usize) -> P2 {
    match drop {
        0 => [p[1], p[2]],
        1 => [p[2], p[0]],
        _ => [p[0], p[1]],
    }
}

fn dominant_axis(a: &Point3, b: &Point3, c: &Point3) -> usize {
    let n = cross(&sub(b, a), &sub(c, a));
    let m = n.map(f64::abs);
    if m[0] >= m[1] && m[0] >= m[2] {
        0
    } else if m[1] >= m[2] {
        1
    } else {
        2
    }
}

#[inline]
fn o2(a: &P2, b: &P2, c: &P2) -> i32 {
    orient2d(*a, *b, *c).as_i32()
}

/// Closed segments `pq` and `ab` in the plane share a point.
fn segments_meet_2d(p: &P2, q: &P2, a: &P2, b: &P2) -> bool {
    let d1 = o2(a, b, p);
    let d2 = o2(a, b, q);
    let d3 = o2(p, q, a);
    let d4 = o2(p, q, b);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    let on = |x: &P2, y: &P2, z: &P2| {
        // z on closed segment xy, given collinearity
        z[0] >= x[0].min(y[0]) && z[0] <= x[0].max(y[0]) && z[1] >= x[1].min(y[1]) && z[1] <= x[1].max(y[1])
    };
    (d1 == 0 && on(a, b, p)) || (d2 == 0 && on(a, b, q)) || (d3 == 0 && on(p, q, a)) || (d4 == 0 && on(p, q, b))
}

fn in_closed_triangle_2d(x: &P2, a: &P2, b: &P2, c: &P2) -> bool {
    let s = o2(a, b, c);
    let d = [o2(a, b, x), o2(b, c, x), o2(c, a, x)];
    d.iter().all(|&v| v * s >= 0)
}

/// Closed segment `pq` and closed triangle `abc` share a point (no shared
/// vertices assumed).
fn segment_meets_triangle(p: &Point3, q: &Point3, t: &[Point3; 3]) -> bool {
    let [a, b, c] = t;
    let op = orient3d(a, b, c, p).as_i32();
    let oq = orient3d(a, b, c, q).as_i32();
    if op * oq > 0 {
        return false;
    }
    if op == 0 && oq == 0 {
        let ax = dominant_axis(a, b, c);
        let (p2, q2) = (project(p, ax), project(q, ax));
        let (a2, b2, c2) = (project(a, ax), project(b, ax), project(c, ax));
        return in_closed_triangle_2d(&p2, &a2, &b2, &c2)
            || in_closed_triangle_2d(&q2, &a2, &b2, &c2)
            || segments_meet_2d(&p2, &q2, &a2, &b2)
            || segments_meet_2d(&p2, &q2, &b2, &c2)
            || segments_meet_2d(&p2, &q2, &c2, &a2);
    }
    // The segment reaches the plane; test the crossing point against the
    // three edges through the line pq.
    let s = [
        orient3d(p, q, a, b).as_i32(),
        orient3d(p, q, b, c).as_i32(),
        orient3d(p, q, c, a).as_i32(),
    ];
    s.iter().all(|&v| v >= 0) || s.iter().all(|&v| v <= 0)
}

/// Segment `pq` starts at vertex `a` of triangle `abc`; whether it meets the
/// triangle anywhere besides `a`.
fn segment_from_vertex_enters(q: &Point3, a: &Point3, b: &Point3, c: &Point3) -> bool {
    if orient3d(a, b, c, q) != Orientation::Zero {
        return false;
    }
    let ax = dominant_axis(a, b, c);
    let (a2, b2, c2, q2) = (project(a, ax), project(b, ax), project(c, ax), project(q, ax));
    let s = o2(&a2, &b2, &c2);
    o2(&a2, &b2, &q2) * s >= 0 && o2(&a2, &q2, &c2) * s >= 0
}

/// Closed segment `e` and closed triangle `t`, given by indices into `pts`,
/// meet outside the simplex spanned by their common vertices.
pub(crate) fn segment_triangle_improper(e: [u8; 2], t: [u8; 3], pts: &[Point3]) -> bool {
    let p = |i: u8| &pts[i as usize];
    let shared: Vec<u8> = e.iter().copied().filter(|v| t.contains(v)).collect();
    match shared.len() {
        0 => segment_meets_triangle(p(e[0]), p(e[1]), &t.map(|i| pts[i as usize])),
        1 => {
            let a = shared[0];
            let q = if e[0] == a { e[1] } else { e[0] };
            let pos = t.iter().position(|&v| v == a).unwrap();
            let (b, c) = (t[(pos + 1) % 3], t[(pos + 2) % 3]);
            segment_from_vertex_enters(p(q), p(a), p(b), p(c))
        }
        _ => false,
    }
}

const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

fn boxes_overlap(t: &[u8; 4], f: &[u8; 3], pts: &[Point3]) -> bool {
    #[allow(clippy::needless_range_loop)]
    for k in 0..3 {
        let tmin = t.iter().map(|&i| pts[i as usize][k]).fold(f64::INFINITY, f64::min);
        let tmax = t.iter().map(|&i| pts[i as usize][k]).fold(f64::NEG_INFINITY, f64::max);
        let fmin = f.iter().map(|&i| pts[i as usize][k]).fold(f64::INFINITY, f64::min);
        let fmax = f.iter().map(|&i| pts[i as usize][k]).fold(f64::NEG_INFINITY, f64::max);
        if tmax < fmin || fmax < tmin {
            return false;
        }
    }
    true
}

/// Whether the closed tetrahedron `t` and closed triangle `f` meet outside
/// their common face, edge or vertex.
///
/// Vertices of `f` that are not vertices of `t` are assumed to lie outside the
/// closed tetrahedron; callers check point containment separately. When `f`
/// is a facet of `t` the contact is proper by definition here and the caller
/// decides by orientation.
pub(crate) fn tet_triangle_improper(t: [u8; 4], f: [u8; 3], pts: &[Point3]) -> bool {
    let shared = f.iter().filter(|v| t.contains(v)).count();
    if shared == 3 {
        return false;
    }
    if !boxes_overlap(&t, &f, pts) {
        return false;
    }
    for [i, j] in TET_EDGES {
        if segment_triangle_improper([t[i], t[j]], f, pts) {
            return true;
        }
    }
    for [i, j] in [[0, 1], [1, 2], [2, 0]] {
        let e = [f[i], f[j]];
        for face in TET_FACES {
            if segment_triangle_improper(e, face.map(|k| t[k]), pts) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Vec<Point3> {
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    }

    #[test]
    fn piercing_segment() {
        let mut pts = unit();
        pts.push([0.2, 0.2, -1.0]);
        pts.push([0.2, 0.2, 1.0]);
        assert!(segment_triangle_improper([4, 5], [0, 1, 2], &pts));
        pts[5] = [0.2, 0.2, -0.5];
        assert!(!segment_triangle_improper([4, 5], [0, 1, 2], &pts));
        // Touching the triangle's edge counts.
        pts[4] = [0.5, 0.0, -1.0];
        pts[5] = [0.5, 0.0, 1.0];
        assert!(segment_triangle_improper([4, 5], [0, 1, 2], &pts));
    }

    #[test]
    fn shared_vertex_cases() {
        let mut pts = unit();
        pts.push([0.3, 0.3, 0.0]);
        pts.push([-0.3, -0.3, 0.0]);
        pts.push([0.3, 0.3, 0.5]);
        // Coplanar, into the triangle.
        assert!(segment_triangle_improper([0, 4], [0, 1, 2], &pts));
        // Coplanar, away from it.
        assert!(!segment_triangle_improper([0, 5], [0, 1, 2], &pts));
        // Out of plane.
        assert!(!segment_triangle_improper([0, 6], [0, 1, 2], &pts));
        // Along an edge.
        pts.push([0.5, 0.0, 0.0]);
        assert!(segment_triangle_improper([0, 7], [0, 1, 2], &pts));
        // The triangle's own edge.
        assert!(!segment_triangle_improper([0, 1], [0, 1, 2], &pts));
    }

    #[test]
    fn coplanar_crossing() {
        let mut pts = unit();
        pts.push([-1.0, 0.3, 0.0]);
        pts.push([1.0, 0.3, 0.0]);
        assert!(segment_triangle_improper([4, 5], [0, 1, 2], &pts));
        pts[5] = [-0.5, 0.3, 0.0];
        assert!(!segment_triangle_improper([4, 5], [0, 1, 2], &pts));
    }

    #[test]
    fn tet_against_triangles() {
        let mut pts = unit();
        pts.push([2.0, 2.0, 2.0]);
        pts.push([3.0, 2.0, 2.0]);
        pts.push([-1.0, 0.2, 0.2]);
        pts.push([2.0, 0.2, 0.2]);
        let t = [0, 1, 2, 3];
        // Far away.
        assert!(!tet_triangle_improper(t, [4, 5, 6], &pts));
        // Triangle sharing edge 0-3 and leaving outward.
        pts.push([-1.0, -1.0, 0.5]);
        assert!(!tet_triangle_improper(t, [0, 3, 8], &pts));
        // Triangle with an edge through the tet.
        pts.push([-1.0, 0.2, 0.3]);
        assert!(tet_triangle_improper(t, [6, 7, 9], &pts));
        // Own facet.
        assert!(!tet_triangle_improper(t, [1, 2, 3], &pts));
        // Sharing vertex 1, cutting across through the interior.
        pts.push([-0.5, 0.6, 0.6]);
        pts.push([-0.5, 0.7, 0.4]);
        assert!(tet_triangle_improper(t, [1, 10, 11], &pts));
    }
}
