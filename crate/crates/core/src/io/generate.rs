use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::Point3;
use crate::mesh::Mesh;
use crate::quality::{orient3d, Orientation};

const MAX_ATTEMPTS: usize = 100;

/// Structured unit cube of `n^3` cells split into 6 tetrahedra each, with
/// interior vertices jittered by up to `perturbation * h` along each axis.
///
/// A displacement that would invert an incident element is redrawn, up to
/// 100 times, after which the vertex is left in place. The result is a pure
/// function of `(n, perturbation, seed)`.
pub fn generate_test_mesh(n: usize, perturbation: f64, seed: u64) -> Mesh {
    assert!(n >= 1, "need at least one cell per axis");
    let m = n + 1;
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize, k: usize| (i + m * (j + m * k)) as u32;
    let mut pos: Vec<Point3> = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                pos.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    // Six tetrahedra around the (0,0,0)-(1,1,1) diagonal of each cell; the
    // split is the same in every cell, so neighbouring cells conform.
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut c = [i, j, k];
                    let mut t = [id(c[0], c[1], c[2]), 0, 0, 0];
                    for (s, &axis) in perm.iter().enumerate() {
                        c[axis] += 1;
                        t[s + 1] = id(c[0], c[1], c[2]);
                    }
                    let p = t.map(|v| pos[v as usize]);
                    if orient3d(&p[0], &p[1], &p[2], &p[3]) == Orientation::Negative {
                        t.swap(2, 3);
                    }
                    tets.push(t);
                }
            }
        }
    }

    if perturbation > 0.0 {
        let mut incident: Vec<Vec<u32>> = vec![Vec::new(); pos.len()];
        for (ti, t) in tets.iter().enumerate() {
            for &v in t {
                incident[v as usize].push(ti as u32);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amp = perturbation * h;
        for k in 1..n {
            for j in 1..n {
                for i in 1..n {
                    let v = id(i, j, k) as usize;
                    let origin = pos[v];
                    for _ in 0..MAX_ATTEMPTS {
                        let d: [f64; 3] = std::array::from_fn(|_| rng.random_range(-amp..=amp));
                        pos[v] = [origin[0] + d[0], origin[1] + d[1], origin[2] + d[2]];
                        let valid = incident[v].iter().all(|&t| {
                            let p = tets[t as usize].map(|w| pos[w as usize]);
                            orient3d(&p[0], &p[1], &p[2], &p[3]) == Orientation::Positive
                        });
                        if valid {
                            break;
                        }
                        pos[v] = origin;
                    }
                }
            }
        }
    }
    Mesh::new(pos, tets, Vec::new()).expect("structured mesh is valid by construction")
}
