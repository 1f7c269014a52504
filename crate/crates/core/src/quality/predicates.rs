//! Exact orientation predicates.
//!
//! Both predicates are evaluated with adaptive-precision expansion arithmetic,
//! so the returned sign is the sign of the exact determinant of the input
//! doubles.

use robust::{Coord, Coord3D};

use crate::geom::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Negative,
    Zero,
    Positive,
}

impl Orientation {
    #[inline]
    fn from_f64(v: f64) -> Self {
        if v > 0.0 {
            Orientation::Positive
        } else if v < 0.0 {
            Orientation::Negative
        } else {
            Orientation::Zero
        }
    }

    #[inline]
    pub fn as_i32(self) -> i32 {
        match self {
            Orientation::Negative => -1,
            Orientation::Zero => 0,
            Orientation::Positive => 1,
        }
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self == Orientation::Positive
    }

    #[inline]
    pub fn flip(self) -> Self {
        match self {
            Orientation::Negative => Orientation::Positive,
            Orientation::Zero => Orientation::Zero,
            Orientation::Positive => Orientation::Negative,
        }
    }
}

#[inline]
fn c3(p: &Point3) -> Coord3D<f64> {
    Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

/// Sign of `det(b - a, c - a, d - a)`.
///
/// Positive when `d` lies on the side of the plane `abc` that the normal
/// `(b - a) x (c - a)` points to; `(0,0,0),(1,0,0),(0,1,0),(0,0,1)` is positive.
#[inline]
pub fn orient3d(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> Orientation {
    // robust::orient3d evaluates det(a - d, b - d, c - d), the opposite sign.
    Orientation::from_f64(-robust::orient3d(c3(a), c3(b), c3(c), c3(d)))
}

/// Sign of `det(b - a, c - a)` for planar points; positive for a counter-clockwise turn.
#[inline]
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Orientation {
    let p = |q: [f64; 2]| Coord { x: q[0], y: q[1] };
    Orientation::from_f64(robust::orient2d(p(a), p(b), p(c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_corner_is_positive() {
        let o = orient3d(&[0.0; 3], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]);
        assert_eq!(o, Orientation::Positive);
        let o = orient3d(&[0.0; 3], &[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]);
        assert_eq!(o, Orientation::Negative);
    }

    #[test]
    fn coplanar_is_zero() {
        let o = orient3d(
            &[0.0, 0.0, 2.0],
            &[1.0, 0.0, 2.0],
            &[0.0, 1.0, 2.0],
            &[0.3, 0.7, 2.0],
        );
        assert_eq!(o, Orientation::Zero);
    }

    #[test]
    fn orient2d_ccw() {
        assert_eq!(
            orient2d([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]),
            Orientation::Positive
        );
        assert_eq!(
            orient2d([0.0, 0.0], [1.0, 1.0], [2.0, 2.0]),
            Orientation::Zero
        );
    }
}
