use super::{LocalOpError, OpOutcome};
use crate::geom::{lerp, Point3};
use crate::mesh::{Mesh, TetId, VertexId};
use crate::quality::gamma;

const MAX_ITERATIONS: usize = 20;
/// Bracket width, as a fraction of the search segment, at which the search stops.
const BRACKET_TOL: f64 = 1e-3;
const MIN_GAIN: f64 = 1e-12;

fn star_quality(mesh: &Mesh, v: VertexId, star: &[TetId], at: &Point3) -> f64 {
    star.iter()
        .map(|&t| {
            let tet = mesh.tet(t);
            let mut p = mesh.tet_points(t);
            p[tet.local_index(v).unwrap()] = *at;
            gamma(&p)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Moves an interior vertex along the segment towards the centroid of its
/// edge neighbours, to the point that maximizes the worst incident quality
/// found by a golden-section search.
pub fn smooth_vertex(mesh: &mut Mesh, v: VertexId) -> Result<OpOutcome, LocalOpError> {
    if mesh.vertex(v).on_boundary {
        return Err(LocalOpError::BoundaryVertex(v));
    }
    let Ok(star) = mesh.vertex_star(v) else {
        return Ok(OpOutcome::Suspended);
    };
    if star.is_empty() {
        return Ok(OpOutcome::Rejected);
    }
    let mut neighbours: Vec<VertexId> = star
        .iter()
        .flat_map(|&t| mesh.tet(t).vertices)
        .filter(|&w| w != v)
        .collect();
    neighbours.sort_unstable();
    neighbours.dedup();
    let mut c = [0.0; 3];
    for &w in &neighbours {
        let p = mesh.position(w);
        for k in 0..3 {
            c[k] += p[k];
        }
    }
    let c = c.map(|x| x / neighbours.len() as f64);
    let x0 = mesh.position(v);
    let f = |t: f64| star_quality(mesh, v, &star, &lerp(&x0, &c, t));

    let f0 = f(0.0);
    let mut best = (0.0, f0);
    let mut consider = |t: f64, q: f64| {
        if q > best.1 {
            best = (t, q);
        }
    };
    let f1 = f(1.0);
    consider(1.0, f1);

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut t1 = hi - ratio * (hi - lo);
    let mut t2 = lo + ratio * (hi - lo);
    let mut q1 = f(t1);
    let mut q2 = f(t2);
    consider(t1, q1);
    consider(t2, q2);
    for _ in 0..MAX_ITERATIONS {
        if hi - lo < BRACKET_TOL {
            break;
        }
        if q1 < q2 {
            lo = t1;
            t1 = t2;
            q1 = q2;
            t2 = lo + ratio * (hi - lo);
            q2 = f(t2);
            consider(t2, q2);
        } else {
            hi = t2;
            t2 = t1;
            q2 = q1;
            t1 = hi - ratio * (hi - lo);
            q1 = f(t1);
            consider(t1, q1);
        }
    }

    let (t, q) = best;
    if q > f0 + MIN_GAIN {
        mesh.move_vertex(v, lerp(&x0, &c, t), &star);
        Ok(OpOutcome::Applied { before: f0, after: q })
    } else {
        Ok(OpOutcome::Rejected)
    }
}
