//! Element validity and shape measures.
//!
//! Three measures are provided: `gamma` (normalised inradius over longest
//! edge), `sicn` (signed inverse Frobenius condition number of the map from a
//! regular reference element) and the six dihedral angles. Both scalar
//! measures are signed: a flat or inverted element scores `<= 0`, and the sign
//! always agrees with the exact [`orient3d`] predicate.

mod predicates;

pub use predicates::{orient2d, orient3d, Orientation};

use thiserror::Error;

use crate::geom::{cross, det6, dot, norm, sub, Point3};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QualityError {
    #[error("tetrahedron has zero volume")]
    DegenerateTet,
    #[error("quality requested for an empty set of tetrahedra")]
    EmptySet,
}

/// The three measures of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityVector {
    pub gamma: f64,
    pub sicn: f64,
    /// Degrees, ordered by edge `(0,1) (0,2) (0,3) (1,2) (1,3) (2,3)`.
    pub dihedral_angles: [f64; 6],
}

impl QualityVector {
    pub fn of(p: &[Point3; 4]) -> Result<Self, QualityError> {
        Ok(QualityVector {
            gamma: gamma(p),
            sicn: sicn(p),
            dihedral_angles: dihedral_angles(p)?,
        })
    }
}

/// Sign of the exact orientation, as -1, 0 or 1.
#[inline]
pub fn tet_orientation(p: &[Point3; 4]) -> Orientation {
    orient3d(&p[0], &p[1], &p[2], &p[3])
}

/// Keeps a floating-point quality value consistent with the exact sign.
#[inline]
fn sign_consistent(value: f64, fdet: f64, p: &[Point3; 4]) -> f64 {
    let exact = tet_orientation(p);
    let float_sign = if fdet > 0.0 {
        Orientation::Positive
    } else if fdet < 0.0 {
        Orientation::Negative
    } else {
        Orientation::Zero
    };
    if exact == Orientation::Zero || exact != float_sign || !value.is_finite() {
        0.0
    } else {
        value
    }
}

/// `sqrt(24) * 3V / (|e_max| * (A1 + A2 + A3 + A4))` with signed volume `V`.
///
/// Equals 1 for the regular tetrahedron.
pub fn gamma(p: &[Point3; 4]) -> f64 {
    let e = [
        sub(&p[1], &p[0]),
        sub(&p[2], &p[0]),
        sub(&p[3], &p[0]),
        sub(&p[2], &p[1]),
        sub(&p[3], &p[1]),
        sub(&p[3], &p[2]),
    ];
    let emax2 = e.iter().map(|v| dot(v, v)).fold(0.0, f64::max);
    let det = dot(&e[0], &cross(&e[1], &e[2]));
    let area2 = |a: &Point3, b: &Point3| norm(&cross(a, b));
    // Twice the facet areas.
    let sum_area2 = area2(&e[0], &e[1]) + area2(&e[0], &e[2]) + area2(&e[1], &e[2]) + area2(&e[3], &e[4]);
    // 3V = det / 2 and sum(A) = sum_area2 / 2
    let value = 24f64.sqrt() * det / (emax2.sqrt() * sum_area2);
    sign_consistent(value, det, p)
}

// Inverse of the edge matrix of the unit regular tetrahedron
// (0,0,0) (1,0,0) (1/2, sqrt3/2, 0) (1/2, sqrt3/6, sqrt(2/3)).
fn reference_inverse() -> [[f64; 3]; 3] {
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    [
        [1.0, -1.0 / s3, -1.0 / s6],
        [0.0, 2.0 / s3, -1.0 / s6],
        [0.0, 0.0, (1.5f64).sqrt()],
    ]
}

/// Signed inverse condition number `sign(det S) * 3 / (|S|_F |S^-1|_F)`, where
/// `S` maps the regular reference element onto this one.
pub fn sicn(p: &[Point3; 4]) -> f64 {
    // Edge matrix with columns b-a, c-a, d-a.
    let cols = [sub(&p[1], &p[0]), sub(&p[2], &p[0]), sub(&p[3], &p[0])];
    let w = reference_inverse();
    // S = E * W^-1
    let mut s = [[0.0f64; 3]; 3];
    for (i, row) in s.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| cols[k][i] * w[k][j]).sum();
        }
    }
    let det = s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[2][1])
        - s[0][1] * (s[1][0] * s[2][2] - s[1][2] * s[2][0])
        + s[0][2] * (s[1][0] * s[2][1] - s[1][1] * s[2][0]);
    let frob2: f64 = s.iter().flatten().map(|v| v * v).sum();
    // |S^-1|_F = |adj S|_F / |det S|; cofactors squared sum to |adj S|_F^2.
    let mut adj2 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
            let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
            let m = s[r0][c0] * s[r1][c1] - s[r0][c1] * s[r1][c0];
            adj2 += m * m;
        }
    }
    let denom = (frob2 * adj2).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    let value = 3.0 * det / denom;
    let fdet = det6(&p[0], &p[1], &p[2], &p[3]);
    sign_consistent(value, fdet, p)
}

/// Local vertex pairs of the six edges, in the order used by [`dihedral_angles`].
pub const TET_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// The six interior dihedral angles, in degrees.
pub fn dihedral_angles(p: &[Point3; 4]) -> Result<[f64; 6], QualityError> {
    if tet_orientation(p) == Orientation::Zero {
        return Err(QualityError::DegenerateTet);
    }
    // Normal of the facet opposite vertex i; the common orientation flip of an
    // inverted element cancels in the dot products below.
    let n = |i: usize| {
        let f = crate::mesh::FACET_VERTICES[i];
        cross(&sub(&p[f[1]], &p[f[0]]), &sub(&p[f[2]], &p[f[0]]))
    };
    let normals = [n(0), n(1), n(2), n(3)];
    let mut out = [0.0; 6];
    for (slot, &(i, j)) in TET_EDGES.iter().enumerate() {
        // The edge (i, j) is shared by the facets opposite the other two vertices.
        let mut others = (0..4).filter(|&k| k != i && k != j);
        let (k, l) = (others.next().unwrap(), others.next().unwrap());
        let (a, b) = (&normals[k], &normals[l]);
        let c = (-dot(a, b) / (norm(a) * norm(b))).clamp(-1.0, 1.0);
        out[slot] = c.acos().to_degrees();
    }
    Ok(out)
}

/// Worst (minimum) `gamma` over a set of elements.
pub fn cavity_quality<I>(tets: I) -> Result<f64, QualityError>
where
    I: IntoIterator<Item = [Point3; 4]>,
{
    tets.into_iter()
        .map(|t| gamma(&t))
        .reduce(f64::min)
        .ok_or(QualityError::EmptySet)
}
