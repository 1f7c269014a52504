//! Mesh files, synthetic meshes and quality reports.

mod generate;
mod msh;
mod nodeele;
mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

pub use generate::generate_test_mesh;
pub use msh::{parse_msh, write_msh};
pub use nodeele::{node_ele_paths, parse_node_ele, write_node_ele};
pub use report::{emit_report, write_report, Histogram, QualityReport, Summary};

use crate::mesh::{Mesh, MeshError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Gmsh ASCII 2.2.
    Msh,
    /// TetGen-style `.node` + `.ele` (+ optional `.face`).
    NodeEle,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "msh" => Ok(Format::Msh),
            "nodeele" => Ok(Format::NodeEle),
            _ => Err(format!("unknown mesh format `{s}` (expected msh or nodeele)")),
        }
    }
}

impl Format {
    /// Guess from the file extension; anything but `.msh` is node/ele.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("msh") => Format::Msh,
            _ => Format::NodeEle,
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unsupported element type {kind}")]
    UnsupportedElement { line: usize, kind: u32 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(#[from] MeshError),
}

impl IoError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            message: message.into(),
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_mesh(path: &Path, format: Format) -> Result<Mesh, IoError> {
    match format {
        Format::Msh => parse_msh(&read_to_string(path)?),
        Format::NodeEle => {
            let [node, ele, face] = node_ele_paths(path);
            let face = if face.exists() { Some(read_to_string(&face)?) } else { None };
            parse_node_ele(&read_to_string(&node)?, &read_to_string(&ele)?, face.as_deref())
        }
    }
}

pub(crate) fn with_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), IoError> {
    let wrap = |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    f(&mut w).and_then(|_| w.flush()).map_err(wrap)
}

pub fn write_mesh(mesh: &Mesh, path: &Path, format: Format) -> Result<(), IoError> {
    match format {
        Format::Msh => with_file(path, |w| write_msh(mesh, w)),
        Format::NodeEle => {
            let [node, ele, face] = node_ele_paths(path);
            let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
            write_node_ele(mesh, &mut a, &mut b, &mut c).expect("writing to memory");
            with_file(&node, |w| w.write_all(&a))?;
            with_file(&ele, |w| w.write_all(&b))?;
            with_file(&face, |w| w.write_all(&c))
        }
    }
}
