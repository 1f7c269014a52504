//! Floating-point geometry oracles shared by the integration tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tetopt::geom::Point3;
use tetopt::quality::gamma;

pub fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
pub fn cross(a: Point3, b: Point3) -> Point3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
pub fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
pub fn det(a: Point3, b: Point3, c: Point3, d: Point3) -> f64 {
    dot(sub(b, a), cross(sub(c, a), sub(d, a)))
}

/// Largest separation over candidate axes; positive means a separating
/// plane exists, negative means the convex sets overlap.
pub fn separation(a: &[Point3], b: &[Point3], a_edges: &[[usize; 2]], b_edges: &[[usize; 2]], normals: &[Point3]) -> f64 {
    let mut axes: Vec<Point3> = normals.to_vec();
    for ea in a_edges {
        for eb in b_edges {
            axes.push(cross(sub(a[ea[1]], a[ea[0]]), sub(b[eb[1]], b[eb[0]])));
        }
    }
    let mut best = f64::NEG_INFINITY;
    for ax in axes {
        let len = dot(ax, ax).sqrt();
        if len < 1e-9 {
            continue;
        }
        let ax = ax.map(|x| x / len);
        let (amin, amax) = a.iter().map(|&p| dot(p, ax)).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
        let (bmin, bmax) = b.iter().map(|&p| dot(p, ax)).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
        best = best.max(bmin - amax).max(amin - bmax);
    }
    best
}

pub const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
pub const TRI_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [0, 2]];

pub fn tet_normals(t: &[Point3; 4]) -> Vec<Point3> {
    [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]
        .iter()
        .map(|f| cross(sub(t[f[1]], t[f[0]]), sub(t[f[2]], t[f[0]])))
        .collect()
}

/// Interiors of two tetrahedra overlap by more than a sliver of width `tol`.
pub fn tets_overlap(a: &[Point3; 4], b: &[Point3; 4], tol: f64) -> bool {
    let mut normals = tet_normals(a);
    normals.extend(tet_normals(b));
    separation(a, b, &TET_EDGES, &TET_EDGES, &normals) < -tol
}

pub fn hull_facets(pts: &[Point3]) -> Vec<[u8; 3]> {
    let n = pts.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let s: Vec<f64> = (0..n)
                    .filter(|&x| x != i && x != j && x != k)
                    .map(|x| det(pts[i], pts[j], pts[k], pts[x]))
                    .collect();
                if s.iter().all(|&v| v < 0.0) {
                    out.push([i as u8, j as u8, k as u8]);
                } else if s.iter().all(|&v| v > 0.0) {
                    out.push([i as u8, k as u8, j as u8]);
                }
            }
        }
    }
    out
}

pub fn hull_volume(pts: &[Point3], hull: &[[u8; 3]]) -> f64 {
    let o = pts[0];
    hull.iter()
        .map(|f| det(o, pts[f[0] as usize], pts[f[1] as usize], pts[f[2] as usize]) / 6.0)
        .sum()
}

pub fn in_tet(t: &[Point3; 4], x: Point3) -> bool {
    let d = det(t[0], t[1], t[2], t[3]);
    let b = [
        det(x, t[1], t[2], t[3]),
        det(t[0], x, t[2], t[3]),
        det(t[0], t[1], x, t[3]),
        det(t[0], t[1], t[2], x),
    ];
    b.iter().all(|&v| v / d >= -1e-12)
}

/// Best worst-element quality over every tiling of the convex hull of `pts`
/// whose worst element exceeds `floor`.
pub fn oracle(pts: &[Point3], floor: f64) -> Option<f64> {
    let n = pts.len();
    let hull = hull_facets(pts);
    let vol = hull_volume(pts, &hull);
    let mut cands: Vec<([Point3; 4], f64, f64)> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let mut t = [pts[a], pts[b], pts[c], pts[d]];
                    if det(t[0], t[1], t[2], t[3]) < 0.0 {
                        t.swap(2, 3);
                    }
                    let v = det(t[0], t[1], t[2], t[3]) / 6.0;
                    let empty = (0..n).filter(|&x| ![a, b, c, d].contains(&x)).all(|x| !in_tet(&t, pts[x]));
                    let q = gamma(&t);
                    if empty && q > floor {
                        cands.push((t, v, q));
                    }
                }
            }
        }
    }
    let m = cands.len();
    let mut overlap = vec![vec![false; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let o = tets_overlap(&cands[i].0, &cands[j].0, 1e-12 * vol.cbrt());
            overlap[i][j] = o;
            overlap[j][i] = o;
        }
    }
    let mut best: Option<f64> = None;
    #[allow(clippy::too_many_arguments)]
    fn rec(i: usize, chosen: &mut Vec<usize>, v: f64, q: f64, vol: f64, cands: &[([Point3; 4], f64, f64)], overlap: &[Vec<bool>], best: &mut Option<f64>) {
        if (v - vol).abs() < 1e-9 * vol {
            if best.is_none_or(|b| q > b) {
                *best = Some(q);
            }
            return;
        }
        if i == cands.len() || v > vol * (1.0 + 1e-9) {
            return;
        }
        if chosen.iter().all(|&c| !overlap[c][i]) && v + cands[i].1 <= vol * (1.0 + 1e-9) {
            chosen.push(i);
            rec(i + 1, chosen, v + cands[i].1, q.min(cands[i].2), vol, cands, overlap, best);
            chosen.pop();
        }
        rec(i + 1, chosen, v, q, vol, cands, overlap, best);
    }
    rec(0, &mut Vec::new(), 0.0, f64::INFINITY, vol, &cands, &overlap, &mut best);
    best
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3> {
    (0..n)
        .map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
        .collect()
}

pub fn check_tiling(pts: &[Point3], tets: &[[u8; 4]], vol: f64) {
    let mut total = 0.0;
    let p: Vec<[Point3; 4]> = tets.iter().map(|t| t.map(|i| pts[i as usize])).collect();
    for t in &p {
        let v = det(t[0], t[1], t[2], t[3]) / 6.0;
        assert!(v > 0.0);
        total += v;
    }
    assert!((total - vol).abs() < 1e-9 * vol);
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            assert!(!tets_overlap(&p[i], &p[j], 1e-12));
        }
    }
}

