use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use tetopt::io::{emit_report, generate_test_mesh, read_mesh, write_mesh, Format, QualityReport};
use tetopt::scheduler::{improve, ImproveConfig, DEFAULT_THRESHOLD};

#[derive(Parser)]
#[command(name = "tetopt", version, about = "Tetrahedral mesh quality improvement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Msh,
    Nodeele,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Msh => Format::Msh,
            FormatArg::Nodeele => Format::NodeEle,
        }
    }
}

fn format_for(arg: Option<FormatArg>, path: &Path) -> Format {
    arg.map_or_else(|| Format::from_path(path), Format::from)
}

#[derive(Subcommand)]
enum Command {
    /// Improve every tetrahedron below the quality threshold.
    Improve {
        #[arg(long)]
        input: PathBuf,
        /// Mesh format of input and output; guessed from the extension if omitted.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Canonical tetrahedron order in the output file.
        #[arg(long)]
        reproducible: bool,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Check mesh invariants after every pass.
        #[arg(long)]
        audit: bool,
    },
    /// Quality statistics and histograms of a mesh.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Write a jittered structured cube mesh.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

fn print_summary(r: &QualityReport) {
    println!(
        "tets {}  bad {}  min gamma {:.4}  min sicn {:.4}  dihedral [{:.2}, {:.2}] mean {:.2}",
        r.live_tets,
        r.bad,
        r.gamma_summary.min,
        r.sicn_summary.min,
        r.dihedral_summary.min,
        r.dihedral_summary.max,
        r.dihedral_summary.mean
    );
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Improve {
            input,
            format,
            output,
            threshold,
            threads,
            reproducible,
            report,
            audit,
        } => {
            anyhow::ensure!(threshold > 0.0 && threshold <= 1.0, "threshold must be in (0, 1]");
            anyhow::ensure!(threads >= 1, "need at least one thread");
            let fmt = format_for(format, &input);
            let mut mesh = read_mesh(&input, fmt).with_context(|| format!("reading {}", input.display()))?;
            let cfg = ImproveConfig {
                q_min: threshold,
                max_workers: threads,
                reproducible,
                audit,
                ..Default::default()
            };
            let run = improve(&mut mesh, &cfg)?;
            println!(
                "bad {} -> {}  min gamma {:.4} -> {:.4}  smoothing {}  edge removal {}  cavity {}  ({:.2?})",
                run.bad_before,
                run.bad_after,
                run.min_quality_before,
                run.min_quality_after,
                run.smoothings,
                run.edge_removals,
                run.gsc_applied,
                run.elapsed
            );
            write_mesh(&mesh, &output, format.map_or_else(|| Format::from_path(&output), Format::from))?;
            if let Some(path) = report {
                emit_report(&QualityReport::of_mesh(&mesh, threshold).with_run(&run), &path)?;
            }
        }
        Command::Stats {
            input,
            format,
            report,
            threshold,
        } => {
            let mesh = read_mesh(&input, format_for(format, &input))
                .with_context(|| format!("reading {}", input.display()))?;
            let r = QualityReport::of_mesh(&mesh, threshold);
            print_summary(&r);
            if let Some(path) = report {
                emit_report(&r, &path)?;
            }
        }
        Command::Gen {
            n,
            perturb,
            seed,
            output,
            format,
        } => {
            anyhow::ensure!(n >= 1, "need at least one cell per axis");
            anyhow::ensure!((0.0..1.0).contains(&perturb), "perturbation must be in [0, 1)");
            let mesh = generate_test_mesh(n, perturb, seed);
            write_mesh(&mesh, &output, format_for(format, &output))?;
            print_summary(&QualityReport::of_mesh(&mesh, DEFAULT_THRESHOLD));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
