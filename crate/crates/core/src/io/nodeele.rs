use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::IoError;
use crate::geom::Point3;
use crate::mesh::Mesh;

/// `.node`, `.ele` and `.face` paths sharing the stem of `path`.
pub fn node_ele_paths(path: &Path) -> [PathBuf; 3] {
    let base = match path.extension().and_then(|e| e.to_str()) {
        Some("node" | "ele" | "face") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let with = |ext: &str| {
        let mut s = base.clone().into_os_string();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    [with("node"), with("ele"), with("face")]
}

/// Non-blank lines with `#` comments removed, numbered from 1.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn field<T: std::str::FromStr>(line: usize, toks: &[&str], i: usize) -> Result<T, IoError> {
    let tok = toks.get(i).ok_or_else(|| IoError::parse(line, "missing field"))?;
    tok.parse().map_err(|_| IoError::parse(line, format!("bad number `{tok}`")))
}

/// Line number and tokens of one record.
type Record<'a> = (usize, Vec<&'a str>);

/// Header count followed by exactly that many records.
fn table<'a>(text: &'a str, what: &str) -> Result<(usize, Vec<&'a str>, Vec<Record<'a>>), IoError> {
    let mut it = records(text);
    let (line, header) = it.next().ok_or_else(|| IoError::parse(1, format!("empty {what} file")))?;
    let count: usize = field(line, &header, 0)?;
    let rows: Vec<_> = it.collect();
    if rows.len() < count {
        let last = rows.last().map_or(line, |r| r.0);
        return Err(IoError::parse(last, format!("{what} file lists {} of {count} records", rows.len())));
    }
    Ok((line, header, rows.into_iter().take(count).collect()))
}

/// Parses a TetGen-style node/ele pair, and an optional face file whose
/// triangles become the constrained surface. Node numbering may start at any
/// base; element files refer to nodes by their listed index.
pub fn parse_node_ele(node: &str, ele: &str, face: Option<&str>) -> Result<Mesh, IoError> {
    let (hline, header, rows) = table(node, "node")?;
    let dim: usize = field(hline, &header, 1).unwrap_or(3);
    if dim != 3 {
        return Err(IoError::parse(hline, format!("expected 3 dimensions, found {dim}")));
    }
    let mut ids: HashMap<i64, u32> = HashMap::with_capacity(rows.len());
    let mut positions: Vec<Point3> = Vec::with_capacity(rows.len());
    for (line, toks) in &rows {
        let id: i64 = field(*line, toks, 0)?;
        let p: Point3 = [field(*line, toks, 1)?, field(*line, toks, 2)?, field(*line, toks, 3)?];
        if !p.iter().all(|c| c.is_finite()) {
            return Err(IoError::parse(*line, "non-finite coordinate"));
        }
        if ids.insert(id, positions.len() as u32).is_some() {
            return Err(IoError::parse(*line, format!("duplicate node {id}")));
        }
        positions.push(p);
    }
    let lookup = |line: usize, toks: &[&str], i: usize| -> Result<u32, IoError> {
        let id: i64 = field(line, toks, i)?;
        ids.get(&id)
            .copied()
            .ok_or_else(|| IoError::parse(line, format!("unknown node {id}")))
    };
    let (hline, header, rows) = table(ele, "ele")?;
    let per: usize = field(hline, &header, 1).unwrap_or(4);
    if per != 4 {
        return Err(IoError::UnsupportedElement {
            line: hline,
            kind: per as u32,
        });
    }
    let mut tets = Vec::with_capacity(rows.len());
    for (line, toks) in &rows {
        tets.push([
            lookup(*line, toks, 1)?,
            lookup(*line, toks, 2)?,
            lookup(*line, toks, 3)?,
            lookup(*line, toks, 4)?,
        ]);
    }
    let mut tris = Vec::new();
    if let Some(face) = face {
        let (_, _, rows) = table(face, "face")?;
        for (line, toks) in &rows {
            tris.push([lookup(*line, toks, 1)?, lookup(*line, toks, 2)?, lookup(*line, toks, 3)?]);
        }
    }
    Ok(Mesh::new(positions, tets, tris)?)
}

/// Writes the three files with 1-based numbering.
pub fn write_node_ele<W: Write>(mesh: &Mesh, node: &mut W, ele: &mut W, face: &mut W) -> std::io::Result<()> {
    writeln!(node, "{} 3 0 0", mesh.num_vertices())?;
    for (i, v) in mesh.vertices().iter().enumerate() {
        let [x, y, z] = v.position;
        writeln!(node, "{} {:.16e} {:.16e} {:.16e}", i + 1, x, y, z)?;
    }
    writeln!(ele, "{} 4 0", mesh.num_live_tets())?;
    for (i, t) in mesh.live_tet_ids().enumerate() {
        let v = mesh.tet(t).vertices;
        writeln!(ele, "{} {} {} {} {}", i + 1, v[0].0 + 1, v[1].0 + 1, v[2].0 + 1, v[3].0 + 1)?;
    }
    let surface = mesh.surface_triangles();
    writeln!(face, "{} 0", surface.len())?;
    for (i, f) in surface.iter().enumerate() {
        writeln!(face, "{} {} {} {}", i + 1, f[0].0 + 1, f[1].0 + 1, f[2].0 + 1)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::generate_test_mesh;

    #[test]
    fn cube_fixture() {
        // Hand-built 6-tet cube, zero-based with comments.
        let node = "# unit cube\n8 3 0 0\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 1 1 0\n4 0 0 1\n5 1 0 1\n6 0 1 1\n7 1 1 1\n";
        let ele = "6 4 0\n0 0 1 3 7\n1 0 1 7 5\n2 0 2 7 3\n3 0 2 6 7\n4 0 4 5 7\n5 0 4 7 6\n";
        let m = parse_node_ele(node, ele, None).unwrap();
        assert_eq!(m.num_vertices(), 8);
        assert_eq!(m.num_live_tets(), 6);
        assert!((m.total_volume() - 1.0).abs() < 1e-15);
        assert_eq!(m.surface_triangles().len(), 12);
    }

    #[test]
    fn round_trip_is_exact() {
        let m = generate_test_mesh(3, 0.4, 2);
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
        write_node_ele(&m, &mut a, &mut b, &mut c).unwrap();
        let s = |v: &Vec<u8>| String::from_utf8(v.clone()).unwrap();
        let back = parse_node_ele(&s(&a), &s(&b), Some(&s(&c))).unwrap();
        assert_eq!(back.tet_vertex_table(), m.tet_vertex_table());
        for (p, q) in back.vertices().iter().zip(m.vertices()) {
            assert_eq!(p.position, q.position);
        }
        assert_eq!(back.surface_key_set(), m.surface_key_set());
    }

    #[test]
    fn short_files_and_bad_numbers() {
        let node = "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n";
        assert!(matches!(parse_node_ele(node, "", None), Err(IoError::Parse { line: 4, .. })));
        let node = "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 x\n";
        assert!(matches!(parse_node_ele(node, "", None), Err(IoError::Parse { line: 5, .. })));
        let node = "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n";
        assert!(matches!(parse_node_ele(node, "1 4 0\n1 1 2 3 9\n", None), Err(IoError::Parse { line: 2, .. })));
        assert!(matches!(parse_node_ele(node, "1 10 0\n1 1 2 3 4 1 2 3 4 1 2\n", None), Err(IoError::UnsupportedElement { .. })));
        assert_eq!(parse_node_ele(node, "1 4 0\n1 1 2 3 4\n", None).unwrap().num_live_tets(), 1);
    }

    #[test]
    fn paths_share_a_stem() {
        let [n, e, f] = node_ele_paths(Path::new("out/mesh.1.node"));
        assert_eq!(n, Path::new("out/mesh.1.node"));
        assert_eq!(e, Path::new("out/mesh.1.ele"));
        assert_eq!(f, Path::new("out/mesh.1.face"));
        assert_eq!(node_ele_paths(Path::new("m"))[1], Path::new("m.ele"));
    }
}
