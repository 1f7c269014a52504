use super::intersect::tet_triangle_improper;
use super::memo::{Memo, MAX_POINTS};
use super::SprError;
use crate::geom::Point3;
use crate::quality::{orient3d, Orientation};

/// Default cap on search-tree nodes per call.
pub const DEFAULT_NODE_BUDGET: usize = 100_000;

/// Result of a reconnection search.
#[derive(Debug, Clone, PartialEq)]
pub enum SprOutcome<T> {
    /// A tiling whose worst element beats the floor. `proven_optimal` is false
    /// when the budget ran out before the search tree was exhausted.
    Improved {
        tets: Vec<T>,
        min_quality: f64,
        proven_optimal: bool,
    },
    /// The whole tree was searched and no tiling beats the floor.
    NoneBetter,
    /// The budget ran out before any tiling beating the floor was found.
    BudgetExhausted,
}

impl<T> SprOutcome<T> {
    pub fn map<U>(self, f: impl FnMut(T) -> U) -> SprOutcome<U> {
        match self {
            SprOutcome::Improved {
                tets,
                min_quality,
                proven_optimal,
            } => SprOutcome::Improved {
                tets: tets.into_iter().map(f).collect(),
                min_quality,
                proven_optimal,
            },
            SprOutcome::NoneBetter => SprOutcome::NoneBetter,
            SprOutcome::BudgetExhausted => SprOutcome::BudgetExhausted,
        }
    }
}

#[inline]
fn canonical(f: [u8; 3]) -> [u8; 3] {
    if f[0] < f[1] && f[0] < f[2] {
        f
    } else if f[1] < f[2] {
        [f[1], f[2], f[0]]
    } else {
        [f[2], f[0], f[1]]
    }
}

#[inline]
fn reversed(f: [u8; 3]) -> [u8; 3] {
    [f[0], f[2], f[1]]
}

/// The three facets of `(f, p)` other than `f`, oriented away from the tetrahedron.
#[inline]
fn side_facets(f: [u8; 3], p: u8) -> [[u8; 3]; 3] {
    [[f[1], f[2], p], [f[0], p, f[2]], [f[0], f[1], p]]
}

/// Search state for retiling a cavity over a growing set of points.
///
/// Shell facets handed to [`SprState::search`] are oriented with the cavity
/// on their outer side, matching [`crate::mesh::ShellFacet`]. Internally the
/// shell is kept with the unfilled region on the positive side, so a candidate
/// `(f, p)` is positively oriented exactly when `p` lies in that region.
#[derive(Debug, Clone, Default)]
pub struct SprState {
    points: Vec<Point3>,
    memo: Memo,
    floor: f64,
    budget: usize,
    nodes: usize,
    exhausted: bool,
    placed: Vec<[u8; 4]>,
    best: Vec<[u8; 4]>,
    best_q: f64,
    on_shell: Vec<u16>,
    used: Vec<bool>,
    pool: Vec<Vec<[u8; 3]>>,
}

impl SprState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_points(points: &[Point3]) -> Result<Self, SprError> {
        let mut s = Self::new();
        for p in points {
            s.push_point(*p)?;
        }
        Ok(s)
    }

    /// Drops every point and cached value.
    pub fn reset(&mut self) {
        self.points.clear();
        self.memo.clear();
    }

    /// Appends a point, keeping cached qualities of existing tuples.
    pub fn push_point(&mut self, p: Point3) -> Result<u8, SprError> {
        if self.points.len() == MAX_POINTS {
            return Err(SprError::TooManyPoints(MAX_POINTS + 1));
        }
        self.points.push(p);
        Ok((self.points.len() - 1) as u8)
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn memo(&self) -> &Memo {
        &self.memo
    }

    /// Number of search-tree nodes visited by the last search.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Full validity of the tetrahedron on inward shell facet `shell[facet]`
    /// with apex `apex`: positive orientation, no other point in the closed
    /// tetrahedron, and only proper contact with every other shell facet.
    pub fn candidate_valid(&mut self, shell: &[[u8; 3]], facet: usize, apex: u8) -> bool {
        let f = shell[facet];
        if f.contains(&apex) {
            return false;
        }
        let t = [f[0], f[1], f[2], apex];
        if self.memo.quality(t, &self.points) <= 0.0 {
            return false;
        }
        if self.memo.blocked(t, &self.points) {
            return false;
        }
        self.clear_of_shell(shell, facet, t)
    }

    fn clear_of_shell(&self, shell: &[[u8; 3]], facet: usize, t: [u8; 4]) -> bool {
        for (i, &g) in shell.iter().enumerate() {
            if i == facet {
                continue;
            }
            let shared = g.iter().filter(|v| t.contains(v)).count();
            if shared == 3 {
                let x = *t.iter().find(|v| !g.contains(v)).unwrap();
                let p = |k: u8| &self.points[k as usize];
                if orient3d(p(g[0]), p(g[1]), p(g[2]), p(x)) != Orientation::Positive {
                    return false;
                }
            } else if tet_triangle_improper(t, g, &self.points) {
                return false;
            }
        }
        true
    }

    /// Searches for the tiling of the region bounded by `shell` (outward
    /// facets over local point indices) whose worst element is best, among
    /// tilings whose worst element is strictly above `floor`.
    pub fn search(&mut self, shell: &[[u8; 3]], floor: f64, node_budget: usize) -> SprOutcome<[u8; 4]> {
        let n = self.points.len();
        self.floor = floor;
        self.budget = node_budget;
        self.nodes = 0;
        self.exhausted = false;
        self.placed.clear();
        self.best.clear();
        self.best_q = f64::NEG_INFINITY;
        self.on_shell.clear();
        self.on_shell.resize(n, 0);
        self.used.clear();
        self.used.resize(n, false);
        let inward: Vec<[u8; 3]> = shell.iter().map(|&f| reversed(f)).collect();
        for f in &inward {
            for &v in f {
                self.on_shell[v as usize] += 1;
                self.used[v as usize] = true;
            }
        }
        self.dfs(inward, f64::INFINITY);
        if !self.best.is_empty() {
            SprOutcome::Improved {
                tets: std::mem::take(&mut self.best),
                min_quality: self.best_q,
                proven_optimal: !self.exhausted,
            }
        } else if self.exhausted {
            SprOutcome::BudgetExhausted
        } else {
            SprOutcome::NoneBetter
        }
    }

    #[inline]
    fn bound(&self) -> f64 {
        self.floor.max(self.best_q)
    }

    #[inline]
    fn active(&self, p: u8) -> bool {
        self.on_shell[p as usize] > 0 || !self.used[p as usize]
    }

    /// Apexes on facet `f` that pass the cached tests, counted up to `limit`.
    fn count_cheap(&mut self, f: [u8; 3], limit: usize) -> usize {
        let bound = self.bound();
        let mut count = 0;
        for p in 0..self.points.len() as u8 {
            if f.contains(&p) || !self.active(p) {
                continue;
            }
            let t = [f[0], f[1], f[2], p];
            if self.memo.quality(t, &self.points) > bound && !self.memo.blocked(t, &self.points) {
                count += 1;
                if count >= limit {
                    break;
                }
            }
        }
        count
    }

    fn dfs(&mut self, shell: Vec<[u8; 3]>, current_min: f64) {
        if shell.is_empty() {
            if current_min > self.best_q && current_min > self.floor {
                self.best_q = current_min;
                self.best.clone_from(&self.placed);
            }
            self.pool.push(shell);
            return;
        }
        if self.nodes >= self.budget {
            self.exhausted = true;
            self.pool.push(shell);
            return;
        }
        self.nodes += 1;

        // Branch on the facet with the fewest candidates.
        let mut chosen = 0;
        let mut fewest = usize::MAX;
        for (i, &f) in shell.iter().enumerate() {
            let c = self.count_cheap(f, fewest);
            if c == 0 {
                self.pool.push(shell);
                return;
            }
            if c < fewest {
                fewest = c;
                chosen = i;
            }
        }

        let f = shell[chosen];
        let bound = self.bound();
        let mut cands: Vec<(f64, u8)> = Vec::with_capacity(fewest);
        for p in 0..self.points.len() as u8 {
            if f.contains(&p) || !self.active(p) {
                continue;
            }
            let t = [f[0], f[1], f[2], p];
            let q = self.memo.quality(t, &self.points);
            if q > bound && !self.memo.blocked(t, &self.points) && self.clear_of_shell(&shell, chosen, t) {
                cands.push((q, p));
            }
        }
        cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

        for (q, p) in cands {
            if q <= self.bound() || self.exhausted {
                break;
            }
            let Some(next) = self.place(&shell, chosen, p) else {
                continue;
            };
            let was_used = self.used[p as usize];
            self.used[p as usize] = true;
            self.placed.push([f[0], f[1], f[2], p]);
            self.dfs(next, current_min.min(q));
            self.placed.pop();
            self.used[p as usize] = was_used;
            self.unplace(&shell, chosen, p);
        }
        self.pool.push(shell);
    }

    /// Shell after filling `(shell[facet], p)`, or `None` if the tetrahedron
    /// would sit on the wrong side of an existing facet.
    fn place(&mut self, shell: &[[u8; 3]], facet: usize, p: u8) -> Option<Vec<[u8; 3]>> {
        let f = shell[facet];
        let mut next = self.pool.pop().unwrap_or_default();
        next.clear();
        next.extend(shell.iter().enumerate().filter(|&(i, _)| i != facet).map(|(_, &g)| g));
        for side in side_facets(f, p) {
            let inner = canonical(reversed(side));
            let outer = canonical(side);
            if let Some(k) = next.iter().position(|&g| canonical(g) == inner) {
                next.swap_remove(k);
            } else if next.iter().any(|&g| canonical(g) == outer) {
                self.pool.push(next);
                return None;
            } else {
                next.push(side);
            }
        }
        // Recount shell incidences from scratch; the shell is small.
        for c in self.on_shell.iter_mut() {
            *c = 0;
        }
        for g in &next {
            for &v in g {
                self.on_shell[v as usize] += 1;
            }
        }
        Some(next)
    }

    fn unplace(&mut self, shell: &[[u8; 3]], _facet: usize, _p: u8) {
        for c in self.on_shell.iter_mut() {
            *c = 0;
        }
        for g in shell {
            for &v in g {
                self.on_shell[v as usize] += 1;
            }
        }
    }
}
