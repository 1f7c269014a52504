use crate::geom::Point3;
use crate::quality::{gamma, orient3d, Orientation};

/// Upper bound on the number of cavity points.
pub const MAX_POINTS: usize = 32;

const fn binomial_table() -> [[u32; 5]; MAX_POINTS + 1] {
    let mut t = [[0u32; 5]; MAX_POINTS + 1];
    let mut n = 0;
    while n <= MAX_POINTS {
        t[n][0] = 1;
        let mut k = 1;
        while k < 5 {
            t[n][k] = if n == 0 { 0 } else { t[n - 1][k - 1] + t[n - 1][k] };
            k += 1;
        }
        n += 1;
    }
    t
}

const BINOM: [[u32; 5]; MAX_POINTS + 1] = binomial_table();
const SLOTS: usize = BINOM[MAX_POINTS][4] as usize;

/// Rank of a strictly increasing 4-tuple in the combinatorial number system.
#[inline]
pub(crate) fn rank(s: [u8; 4]) -> usize {
    (BINOM[s[0] as usize][1] + BINOM[s[1] as usize][2] + BINOM[s[2] as usize][3] + BINOM[s[3] as usize][4]) as usize
}

/// Sorts a 4-tuple of distinct indices, returning it with the parity of the
/// permutation (`1.0` even, `-1.0` odd).
#[inline]
pub(crate) fn sort_with_parity(mut t: [u8; 4]) -> ([u8; 4], f64) {
    let mut sign = 1.0;
    for i in 1..4 {
        let mut j = i;
        while j > 0 && t[j - 1] > t[j] {
            t.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    (t, sign)
}

#[derive(Debug, Clone, Copy, Default)]
struct Entry {
    stamp: u32,
    /// Number of points already tested for containment.
    checked: u8,
    /// Some point other than the four vertices lies in the closed tetrahedron.
    blocked: bool,
    /// Quality of the tuple in sorted order; the sign carries its orientation.
    gamma: f64,
}

/// Lazily filled table of tetrahedron qualities over a growing point set.
///
/// Points may only be appended, so cached entries stay valid; containment is
/// checked incrementally against points added since the entry was written.
#[derive(Debug, Clone)]
pub struct Memo {
    entries: Vec<Entry>,
    stamp: u32,
}

impl Default for Memo {
    fn default() -> Self {
        Self::new()
    }
}

impl Memo {
    pub fn new() -> Self {
        Memo {
            entries: vec![Entry::default(); SLOTS],
            stamp: 1,
        }
    }

    /// Forgets every entry in constant time.
    pub fn clear(&mut self) {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.entries.fill(Entry::default());
            self.stamp = 1;
        }
    }

    #[inline]
    fn entry(&mut self, sorted: [u8; 4], points: &[Point3]) -> &mut Entry {
        let e = &mut self.entries[rank(sorted)];
        if e.stamp != self.stamp {
            let p = sorted.map(|i| points[i as usize]);
            *e = Entry {
                stamp: self.stamp,
                checked: 0,
                blocked: false,
                gamma: gamma(&p),
            };
        }
        e
    }

    /// Quality of the tetrahedron `t` in the given vertex order; negative when
    /// it is inverted and zero when flat.
    #[inline]
    pub fn quality(&mut self, t: [u8; 4], points: &[Point3]) -> f64 {
        let (s, sign) = sort_with_parity(t);
        sign * self.entry(s, points).gamma
    }

    /// Whether some point other than its vertices lies in the closed
    /// tetrahedron `t`, which must be positively oriented.
    pub fn blocked(&mut self, t: [u8; 4], points: &[Point3]) -> bool {
        let (s, _) = sort_with_parity(t);
        let n = points.len() as u8;
        let e = self.entry(s, points);
        if e.blocked || e.checked == n {
            return e.blocked;
        }
        let from = e.checked;
        let v = t.map(|i| points[i as usize]);
        let mut blocked = false;
        for x in from..n {
            if t.contains(&x) {
                continue;
            }
            if in_closed_tet(&v, &points[x as usize]) {
                blocked = true;
                break;
            }
        }
        let e = self.entry(s, points);
        e.checked = n;
        e.blocked = blocked;
        blocked
    }

    /// Cached quality of a sorted tuple, if present. Test hook for cache coherence.
    pub fn cached(&self, sorted: [u8; 4]) -> Option<f64> {
        let e = &self.entries[rank(sorted)];
        (e.stamp == self.stamp).then_some(e.gamma)
    }
}

/// Exact closed containment in a positively oriented tetrahedron.
pub(crate) fn in_closed_tet(t: &[Point3; 4], x: &Point3) -> bool {
    let neg = |o: Orientation| o == Orientation::Negative;
    !(neg(orient3d(x, &t[1], &t[2], &t[3]))
        || neg(orient3d(&t[0], x, &t[2], &t[3]))
        || neg(orient3d(&t[0], &t[1], x, &t[3]))
        || neg(orient3d(&t[0], &t[1], &t[2], x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn ranks_are_a_bijection() {
        let mut seen = HashSet::new();
        for a in 0..32u8 {
            for b in a + 1..32 {
                for c in b + 1..32 {
                    for d in c + 1..32 {
                        let r = rank([a, b, c, d]);
                        assert!(r < SLOTS);
                        assert!(seen.insert(r));
                    }
                }
            }
        }
        assert_eq!(seen.len(), 35960);
    }

    #[test]
    fn parity_matches_inversion_count() {
        for t in [[0, 1, 2, 3], [1, 0, 2, 3], [3, 2, 1, 0], [2, 0, 3, 1], [9, 4, 7, 1]] {
            let inv = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).filter(|&(i, j)| t[i] > t[j]).count();
            let (s, sign) = sort_with_parity(t);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(sign, if inv % 2 == 0 { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn entries_match_recomputation() {
        let pts: Vec<Point3> = (0..8)
            .map(|i| {
                let f = i as f64;
                [f.sin() * 2.0, (f * 1.7).cos(), (f * 0.3).sin() + f * 0.1]
            })
            .collect();
        let mut memo = Memo::new();
        for t in [[0, 1, 2, 3], [3, 1, 2, 0], [4, 7, 5, 6], [1, 2, 6, 5]] {
            let q = memo.quality(t, &pts);
            let direct = crate::quality::gamma(&t.map(|i| pts[i as usize]));
            assert!((q - direct).abs() < 1e-14, "{q} vs {direct}");
        }
        let cached = memo.cached([0, 1, 2, 3]).unwrap();
        assert_eq!(cached, crate::quality::gamma(&[pts[0], pts[1], pts[2], pts[3]]));
        memo.clear();
        assert!(memo.cached([0, 1, 2, 3]).is_none());
    }

    #[test]
    fn containment_is_incremental() {
        let mut pts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [2.0, 2.0, 2.0]];
        let mut memo = Memo::new();
        let t = [0, 1, 2, 3];
        assert!(!memo.blocked(t, &pts));
        pts.push([0.1, 0.1, 0.1]);
        assert!(memo.blocked(t, &pts));
        // A point on a facet counts as well.
        let mut pts2 = pts[..5].to_vec();
        pts2.push([0.5, 0.5, 0.0]);
        memo.clear();
        assert!(memo.blocked(t, &pts2));
    }
}
