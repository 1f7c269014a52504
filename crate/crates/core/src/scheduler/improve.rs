use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::partition::{assign_moore_indices, make_partitions};
use crate::gsc::gsc;
use crate::local_ops::{edge_removal_at, smooth_vertex, OpOutcome};
use crate::mesh::{Mesh, MeshError, SubMesh, TetId};
use crate::spr::{SprState, DEFAULT_NODE_BUDGET};

/// Default quality threshold below which a tetrahedron is considered bad.
pub const DEFAULT_THRESHOLD: f64 = 0.35;

#[derive(Debug, Clone, PartialEq)]
pub struct ImproveConfig {
    pub q_min: f64,
    pub max_workers: usize,
    /// Sort the tetrahedron table canonically before returning.
    pub reproducible: bool,
    pub node_budget: usize,
    /// Run the full mesh audit after every pass.
    pub audit: bool,
}

impl Default for ImproveConfig {
    fn default() -> Self {
        ImproveConfig {
            q_min: DEFAULT_THRESHOLD,
            max_workers: 1,
            reproducible: false,
            node_budget: DEFAULT_NODE_BUDGET,
            audit: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ImproveError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("invariant violated after {phase:?} pass {pass}: {detail}")]
    Invariant { phase: Phase, pass: usize, detail: String },
    #[error("cannot start worker threads: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Smoothing and edge removal.
    Ser,
    /// Growing cavities.
    Gsc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Smoothing,
    EdgeRemoval,
    Gsc,
}

/// Counters for one parallel sweep over a target list.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepStats {
    pub phase: Phase,
    pub pass: usize,
    pub workers: usize,
    pub attempted: usize,
    pub applied: usize,
    pub suspended: usize,
    /// `suspended / attempted`, or 0 when nothing was attempted.
    pub rho: f64,
}

/// Before/after minimum quality of one applied operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpRecord {
    pub kind: OpKind,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ImproveReport {
    pub sweeps: Vec<SweepStats>,
    pub bad_before: usize,
    pub bad_after: usize,
    pub min_quality_before: f64,
    pub min_quality_after: f64,
    pub smoothings: usize,
    pub edge_removals: usize,
    pub gsc_applied: usize,
    /// Applied operations whose region did not strictly improve; always zero
    /// unless something is broken.
    pub monotonicity_violations: usize,
    pub ser_passes: usize,
    pub gsc_passes: usize,
    pub elapsed: Duration,
}

impl ImproveReport {
    pub fn modifications(&self) -> usize {
        self.smoothings + self.edge_removals + self.gsc_applied
    }

    fn record(&mut self, r: &OpRecord) {
        match r.kind {
            OpKind::Smoothing => self.smoothings += 1,
            OpKind::EdgeRemoval => self.edge_removals += 1,
            OpKind::Gsc => self.gsc_applied += 1,
        }
        if r.after <= r.before {
            self.monotonicity_violations += 1;
        }
    }
}

/// Next worker count from the suspension ratio of the last sweep.
pub fn next_worker_count(k: usize, rho: f64, max_workers: usize) -> usize {
    let bump = usize::from(rho < 1.0);
    let shrunk = (k as f64 * (1.0 - rho)).floor() as usize;
    (shrunk + bump).min(max_workers).max(1)
}

const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

enum Visit {
    Skipped,
    Applied(OpRecord),
    Rejected,
    Suspended,
}

fn applied(kind: OpKind, out: OpOutcome) -> Option<OpRecord> {
    match out {
        OpOutcome::Applied { before, after } => Some(OpRecord { kind, before, after }),
        _ => None,
    }
}

/// Smooths the vertices of `t`, then tries removing its edges, stopping at
/// the first success.
fn ser_visit(mesh: &mut Mesh, t: TetId, q_min: f64) -> Result<Visit, MeshError> {
    if !mesh.is_live(t) || mesh.tet(t).quality >= q_min {
        return Ok(Visit::Skipped);
    }
    let mut suspended = false;
    let verts = mesh.tet(t).vertices;
    for v in verts {
        if mesh.vertex(v).on_boundary {
            continue;
        }
        match smooth_vertex(mesh, v) {
            Ok(out) => {
                if let Some(r) = applied(OpKind::Smoothing, out) {
                    return Ok(Visit::Applied(r));
                }
                suspended |= out == OpOutcome::Suspended;
            }
            Err(e) => return Err(MeshError::Audit(e.to_string())),
        }
    }
    for [i, j] in TET_EDGES {
        let out = edge_removal_at(mesh, t, verts[i], verts[j]).map_err(|e| MeshError::Audit(e.to_string()))?;
        if let Some(r) = applied(OpKind::EdgeRemoval, out) {
            return Ok(Visit::Applied(r));
        }
        suspended |= out == OpOutcome::Suspended;
    }
    Ok(if suspended { Visit::Suspended } else { Visit::Rejected })
}

fn gsc_visit(mesh: &mut Mesh, t: TetId, q_min: f64, state: &mut SprState, budget: usize) -> Result<Visit, MeshError> {
    if !mesh.is_live(t) || mesh.tet(t).quality >= q_min {
        return Ok(Visit::Skipped);
    }
    Ok(match gsc(mesh, t, state, budget)? {
        OpOutcome::Applied { before, after } => Visit::Applied(OpRecord {
            kind: OpKind::Gsc,
            before,
            after,
        }),
        OpOutcome::Rejected => Visit::Rejected,
        OpOutcome::Suspended => Visit::Suspended,
    })
}

#[derive(Debug, Default)]
struct WorkerResult {
    attempted: usize,
    records: Vec<OpRecord>,
    /// Local ids.
    suspended: Vec<TetId>,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    phase: Phase,
    q_min: f64,
    budget: usize,
}

fn run_worker(mesh: &mut Mesh, targets: &[TetId], job: Job, state: &mut SprState) -> Result<WorkerResult, MeshError> {
    let mut res = WorkerResult::default();
    for &t in targets {
        let visit = match job.phase {
            Phase::Ser => ser_visit(mesh, t, job.q_min)?,
            Phase::Gsc => gsc_visit(mesh, t, job.q_min, state, job.budget)?,
        };
        match visit {
            Visit::Skipped => continue,
            Visit::Applied(r) => res.records.push(r),
            Visit::Rejected => {}
            Visit::Suspended => res.suspended.push(t),
        }
        res.attempted += 1;
    }
    Ok(res)
}

#[cfg(feature = "parallel")]
fn run_workers(
    parts: &mut [SubMesh],
    targets: &[Vec<TetId>],
    states: &mut [SprState],
    job: Job,
    pool: Option<&rayon::ThreadPool>,
) -> Vec<Result<WorkerResult, MeshError>> {
    use rayon::prelude::*;
    let mut go = || {
        parts
            .par_iter_mut()
            .zip(states.par_iter_mut())
            .zip(targets.par_iter())
            .map(|((p, s), t)| run_worker(&mut p.mesh, t, job, s))
            .collect()
    };
    match pool {
        Some(pool) => pool.install(go),
        None => go(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_workers(
    parts: &mut [SubMesh],
    targets: &[Vec<TetId>],
    states: &mut [SprState],
    job: Job,
    _pool: Option<&()>,
) -> Vec<Result<WorkerResult, MeshError>> {
    parts
        .iter_mut()
        .zip(states.iter_mut())
        .zip(targets.iter())
        .map(|((p, s), t)| run_worker(&mut p.mesh, t, job, s))
        .collect()
}

#[cfg(feature = "parallel")]
type Pool = rayon::ThreadPool;
#[cfg(not(feature = "parallel"))]
type Pool = ();

#[cfg(feature = "parallel")]
fn build_pool(workers: usize) -> Result<Option<Pool>, ImproveError> {
    if workers <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map(Some)
        .map_err(|e| ImproveError::ThreadPool(e.to_string()))
}

#[cfg(not(feature = "parallel"))]
fn build_pool(_workers: usize) -> Result<Option<Pool>, ImproveError> {
    Ok(None)
}

struct Driver {
    cfg: ImproveConfig,
    pool: Option<Pool>,
    states: Vec<SprState>,
    workers: usize,
    report: ImproveReport,
    surface: BTreeSet<[u32; 3]>,
    volume: f64,
}

impl Driver {
    /// One sweep over `targets` with the current worker count. Returns the
    /// targets to retry, as ids in the updated mesh.
    fn sweep(&mut self, mesh: &mut Mesh, targets: &[TetId], phase: Phase, pass: usize) -> Result<Vec<TetId>, MeshError> {
        let job = Job {
            phase,
            q_min: self.cfg.q_min,
            budget: self.cfg.node_budget,
        };
        let k = self.workers.min(targets.len()).max(1);
        let mut results: Vec<WorkerResult> = Vec::new();
        let mut retry = Vec::new();
        let mut ambiguous = 0;
        if k == 1 {
            let r = run_worker(mesh, targets, job, &mut self.states[0])?;
            assert!(r.suspended.is_empty(), "nothing is foreign to a single worker");
            results.push(r);
        } else {
            assign_moore_indices(mesh);
            let parting = make_partitions(mesh, targets, k);
            let n = parting.partitions.len();
            let (mut parts, members) = mesh.split(&parting.bucket, n + 1);
            let local = |j: usize, t: TetId| TetId(members[j].binary_search(&t).expect("owned tet in its piece") as u32);
            let local_targets: Vec<Vec<TetId>> = parting
                .partitions
                .iter()
                .enumerate()
                .map(|(j, p)| p.owned_bad_tets.iter().map(|&t| local(j, t)).collect())
                .collect();
            let unowned: Vec<TetId> = parting.suspended.iter().map(|&t| local(n, t)).collect();
            while self.states.len() < n {
                self.states.push(SprState::new());
            }
            let outs = run_workers(&mut parts[..n], &local_targets, &mut self.states[..n], job, self.pool.as_ref());
            let maps = mesh.join(parts)?;
            for (j, out) in outs.into_iter().enumerate() {
                let out = out?;
                retry.extend(out.suspended.iter().filter_map(|t| maps[j][t.idx()]));
                results.push(out);
            }
            ambiguous = unowned.len();
            retry.extend(unowned.iter().filter_map(|t| maps[n][t.idx()]));
        }
        let attempted = results.iter().map(|r| r.attempted).sum::<usize>() + ambiguous;
        let applied: usize = results.iter().map(|r| r.records.len()).sum();
        for r in results.iter().flat_map(|r| r.records.iter()) {
            self.report.record(r);
        }
        let rho = if attempted == 0 { 0.0 } else { retry.len() as f64 / attempted as f64 };
        self.report.sweeps.push(SweepStats {
            phase,
            pass,
            workers: k,
            attempted,
            applied,
            suspended: retry.len(),
            rho,
        });
        self.workers = next_worker_count(self.workers, rho, self.cfg.max_workers);
        retry.sort_unstable();
        Ok(retry)
    }

    /// Visits every bad tetrahedron once, retrying suspended ones on fewer
    /// workers until none are left. Returns the number of applied operations.
    fn pass(&mut self, mesh: &mut Mesh, phase: Phase, pass: usize) -> Result<usize, ImproveError> {
        mesh.compact();
        let before = self.report.modifications();
        let mut targets = mesh.get_bad_tetrahedra(self.cfg.q_min);
        while !targets.is_empty() {
            targets = self.sweep(mesh, &targets, phase, pass)?;
        }
        mesh.compact();
        if self.cfg.audit {
            self.check(mesh, phase, pass)?;
        }
        Ok(self.report.modifications() - before)
    }

    fn check(&self, mesh: &Mesh, phase: Phase, pass: usize) -> Result<(), ImproveError> {
        let fail = |detail: String| ImproveError::Invariant { phase, pass, detail };
        mesh.audit().map_err(|e| fail(e.to_string()))?;
        if mesh.surface_key_set() != self.surface {
            return Err(fail("constrained surface changed".into()));
        }
        let v = mesh.total_volume();
        if (v - self.volume).abs() > 1e-9 * self.volume.abs() {
            return Err(fail(format!("volume {v} differs from {}", self.volume)));
        }
        if self.report.monotonicity_violations > 0 {
            return Err(fail("an applied operation did not improve its region".into()));
        }
        Ok(())
    }
}

/// Raises the quality of tetrahedra below `cfg.q_min`: repeated smoothing and
/// edge-removal passes until they stall, then one growing-cavity pass, until
/// a growing-cavity pass changes nothing.
pub fn improve(mesh: &mut Mesh, cfg: &ImproveConfig) -> Result<ImproveReport, ImproveError> {
    let start = Instant::now();
    let max_workers = cfg.max_workers.max(1);
    let mut driver = Driver {
        cfg: ImproveConfig {
            max_workers,
            ..cfg.clone()
        },
        pool: build_pool(max_workers)?,
        states: vec![SprState::new()],
        workers: max_workers,
        report: ImproveReport::default(),
        surface: mesh.surface_key_set(),
        volume: mesh.total_volume(),
    };
    driver.report.bad_before = mesh.get_bad_tetrahedra(cfg.q_min).len();
    driver.report.min_quality_before = mesh.min_quality();
    if driver.report.bad_before > 0 {
        let (mut ser_pass, mut gsc_pass) = (0, 0);
        loop {
            loop {
                ser_pass += 1;
                if driver.pass(mesh, Phase::Ser, ser_pass)? == 0 {
                    break;
                }
            }
            gsc_pass += 1;
            if driver.pass(mesh, Phase::Gsc, gsc_pass)? == 0 {
                break;
            }
        }
        driver.report.ser_passes = ser_pass;
        driver.report.gsc_passes = gsc_pass;
    }
    if cfg.reproducible {
        mesh.reproducible_reorder();
    }
    let mut report = driver.report;
    report.bad_after = mesh.get_bad_tetrahedra(cfg.q_min).len();
    report.min_quality_after = mesh.min_quality();
    report.elapsed = start.elapsed();
    Ok(report)
}
