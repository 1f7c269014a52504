use std::io::Write;
use std::path::Path;

use super::{with_file, IoError};
use crate::mesh::Mesh;
use crate::quality::{dihedral_angles, sicn};
use crate::scheduler::{ImproveReport, SweepStats};

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Histogram {
            lo,
            hi,
            counts: vec![0; bins],
        }
    }

    /// Values outside `[lo, hi]` land in the end bins.
    pub fn add(&mut self, x: f64) {
        let n = self.counts.len();
        let b = ((x - self.lo) / (self.hi - self.lo) * n as f64).floor();
        let b = if b.is_nan() || b < 0.0 { 0 } else { (b as usize).min(n - 1) };
        self.counts[b] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Default)]
struct Acc {
    min: f64,
    max: f64,
    sum: f64,
    n: usize,
}

impl Acc {
    fn add(&mut self, x: f64) {
        if self.n == 0 {
            self.min = x;
            self.max = x;
        }
        self.min = self.min.min(x);
        self.max = self.max.max(x);
        self.sum += x;
        self.n += 1;
    }

    fn summary(&self) -> Summary {
        let mean = if self.n == 0 { f64::NAN } else { self.sum / self.n as f64 };
        Summary {
            min: self.min,
            max: self.max,
            mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub live_tets: usize,
    pub q_min: f64,
    pub gamma: Histogram,
    pub sicn: Histogram,
    /// Degrees, six angles per tetrahedron.
    pub dihedral: Histogram,
    pub gamma_summary: Summary,
    pub sicn_summary: Summary,
    pub dihedral_summary: Summary,
    pub bad: usize,
    pub bad_before: Option<usize>,
    /// Applied operations of the run, by kind: smoothing, edge removal, cavity.
    pub applied: Option<[usize; 3]>,
    pub sweeps: Vec<SweepStats>,
}

impl QualityReport {
    /// Statistics of every live tetrahedron; `q_min` only sets the bad count.
    pub fn of_mesh(mesh: &Mesh, q_min: f64) -> Self {
        let mut gamma = Histogram::new(0.0, 1.0, 100);
        let mut sicn_h = Histogram::new(0.0, 1.0, 100);
        let mut dihedral = Histogram::new(0.0, 180.0, 180);
        let (mut ga, mut sa, mut da) = (Acc::default(), Acc::default(), Acc::default());
        let mut bad = 0;
        for t in mesh.live_tet_ids() {
            let q = mesh.tet(t).quality;
            let p = mesh.tet_points(t);
            gamma.add(q);
            ga.add(q);
            bad += usize::from(q < q_min);
            let s = sicn(&p);
            sicn_h.add(s);
            sa.add(s);
            // A live element is never flat, so the angles always exist.
            let angles = dihedral_angles(&p).unwrap_or([f64::NAN; 6]);
            for a in angles {
                dihedral.add(a);
                da.add(a);
            }
        }
        QualityReport {
            live_tets: mesh.num_live_tets(),
            q_min,
            gamma,
            sicn: sicn_h,
            dihedral,
            gamma_summary: ga.summary(),
            sicn_summary: sa.summary(),
            dihedral_summary: da.summary(),
            bad,
            bad_before: None,
            applied: None,
            sweeps: Vec::new(),
        }
    }

    /// Attaches the schedule counters of an improvement run.
    pub fn with_run(mut self, run: &ImproveReport) -> Self {
        self.bad_before = Some(run.bad_before);
        self.applied = Some([run.smoothings, run.edge_removals, run.gsc_applied]);
        self.sweeps = run.sweeps.clone();
        self
    }
}

/// Comma-separated summary block, per-sweep block and one row per histogram
/// bin. The output is a pure function of the report.
pub fn write_report<W: Write>(r: &QualityReport, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "# summary")?;
    writeln!(w, "key,value")?;
    writeln!(w, "tets,{}", r.live_tets)?;
    writeln!(w, "threshold,{}", r.q_min)?;
    if let Some(b) = r.bad_before {
        writeln!(w, "bad_before,{b}")?;
    }
    writeln!(w, "bad,{}", r.bad)?;
    if let Some([s, e, g]) = r.applied {
        writeln!(w, "modifications,{}", s + e + g)?;
        writeln!(w, "smoothings,{s}")?;
        writeln!(w, "edge_removals,{e}")?;
        writeln!(w, "cavity_retriangulations,{g}")?;
    }
    for (name, s) in [("gamma", &r.gamma_summary), ("sicn", &r.sicn_summary), ("dihedral", &r.dihedral_summary)] {
        writeln!(w, "min_{name},{}", s.min)?;
        writeln!(w, "max_{name},{}", s.max)?;
        writeln!(w, "mean_{name},{}", s.mean)?;
    }
    if !r.sweeps.is_empty() {
        writeln!(w, "# sweeps")?;
        writeln!(w, "phase,pass,workers,attempted,applied,suspended,rho")?;
        for s in &r.sweeps {
            writeln!(
                w,
                "{:?},{},{},{},{},{},{}",
                s.phase, s.pass, s.workers, s.attempted, s.applied, s.suspended, s.rho
            )?;
        }
    }
    writeln!(w, "# histograms")?;
    writeln!(w, "measure,bin_lo,bin_hi,count")?;
    for (name, h) in [("gamma", &r.gamma), ("sicn", &r.sicn), ("dihedral", &r.dihedral)] {
        let width = h.bin_width();
        for (i, c) in h.counts.iter().enumerate() {
            let lo = h.lo + i as f64 * width;
            writeln!(w, "{name},{},{},{c}", round(lo), round(lo + width))?;
        }
    }
    Ok(())
}

/// Bin edges without accumulated float noise.
fn round(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

pub fn emit_report(report: &QualityReport, path: &Path) -> Result<(), IoError> {
    with_file(path, |w| write_report(report, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::generate_test_mesh;
    use crate::quality::gamma;

    #[test]
    fn regular_mesh_mass_sits_in_the_top_bins() {
        let s = 3f64.sqrt();
        let p = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, s / 2.0, 0.0], [0.5, s / 6.0, (2.0f64 / 3.0).sqrt()]];
        let m = Mesh::new(p, vec![[0, 1, 2, 3]], vec![]).unwrap();
        let r = QualityReport::of_mesh(&m, 0.35);
        assert_eq!(r.gamma.counts[99], 1);
        assert_eq!(r.sicn.counts[99], 1);
        assert_eq!(r.dihedral.counts[70], 6);
    }

    #[test]
    fn sums_and_minima_match_a_second_scan() {
        let m = generate_test_mesh(4, 0.45, 5);
        let r = QualityReport::of_mesh(&m, 0.35);
        let n = m.num_live_tets() as u64;
        assert_eq!(r.gamma.total(), n);
        assert_eq!(r.sicn.total(), n);
        assert_eq!(r.dihedral.total(), 6 * n);
        let mut gmin = f64::INFINITY;
        let mut smin = f64::INFINITY;
        let mut dmin = f64::INFINITY;
        let mut dmax = f64::NEG_INFINITY;
        for t in m.live_tet_ids() {
            let p = m.tet_points(t);
            gmin = gmin.min(gamma(&p));
            smin = smin.min(sicn(&p));
            for a in dihedral_angles(&p).unwrap() {
                dmin = dmin.min(a);
                dmax = dmax.max(a);
            }
        }
        assert_eq!(r.gamma_summary.min, gmin);
        assert_eq!(r.sicn_summary.min, smin);
        assert_eq!(r.dihedral_summary.min, dmin);
        assert_eq!(r.dihedral_summary.max, dmax);
        assert_eq!(r.bad, m.get_bad_tetrahedra(0.35).len());
    }

    #[test]
    fn output_is_deterministic() {
        let m = generate_test_mesh(3, 0.3, 1);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_report(&QualityReport::of_mesh(&m, 0.35), &mut a).unwrap();
        write_report(&QualityReport::of_mesh(&m, 0.35), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.contains("dihedral,70,71,"));
        assert_eq!(text.lines().filter(|l| l.starts_with("gamma,")).count(), 100);
    }
}
