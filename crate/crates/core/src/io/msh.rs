use std::collections::HashMap;
use std::io::Write;

use super::IoError;
use crate::geom::Point3;
use crate::mesh::Mesh;

const TRIANGLE: u32 = 2;
const TETRAHEDRON: u32 = 4;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str), IoError> {
        loop {
            match self.inner.next() {
                Some((i, l)) => {
                    self.last = i + 1;
                    let l = l.trim();
                    if !l.is_empty() {
                        return Ok((i + 1, l));
                    }
                }
                None => return Err(IoError::parse(self.last, "unexpected end of file")),
            }
        }
    }

    fn expect(&mut self, tag: &str) -> Result<(), IoError> {
        let (n, l) = self.next()?;
        if l != tag {
            return Err(IoError::parse(n, format!("expected {tag}, found `{l}`")));
        }
        Ok(())
    }
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&str>) -> Result<T, IoError> {
    let tok = tok.ok_or_else(|| IoError::parse(line, "missing field"))?;
    tok.parse().map_err(|_| IoError::parse(line, format!("bad number `{tok}`")))
}

/// Parses the ASCII 2.2 subset: nodes, 4-node tetrahedra and 3-node
/// triangles, which become the constrained surface. Other sections are
/// skipped.
pub fn parse_msh(text: &str) -> Result<Mesh, IoError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let mut ids: HashMap<u64, u32> = HashMap::new();
    let mut positions: Vec<Point3> = Vec::new();
    let mut raw_tets: Vec<(usize, [u64; 4])> = Vec::new();
    let mut raw_tris: Vec<(usize, [u64; 3])> = Vec::new();
    let (mut seen_format, mut seen_nodes) = (false, false);
    while let Some((i, l)) = lines.inner.next() {
        let (line, l) = (i + 1, l.trim());
        lines.last = line;
        match l {
            "" => continue,
            "$MeshFormat" => {
                let (n, l) = lines.next()?;
                let mut it = l.split_whitespace();
                let version: String = num(n, it.next())?;
                let file_type: u32 = num(n, it.next())?;
                if !version.starts_with("2.") || file_type != 0 {
                    return Err(IoError::parse(n, format!("only ASCII MSH 2.x is supported, found `{l}`")));
                }
                lines.expect("$EndMeshFormat")?;
                seen_format = true;
            }
            "$Nodes" => {
                let (n, l) = lines.next()?;
                let count: usize = num(n, Some(l))?;
                positions.reserve(count);
                for _ in 0..count {
                    let (n, l) = lines.next()?;
                    let mut it = l.split_whitespace();
                    let id: u64 = num(n, it.next())?;
                    let p = [num(n, it.next())?, num(n, it.next())?, num(n, it.next())?];
                    if !p.iter().all(|c: &f64| c.is_finite()) {
                        return Err(IoError::parse(n, "non-finite coordinate"));
                    }
                    if ids.insert(id, positions.len() as u32).is_some() {
                        return Err(IoError::parse(n, format!("duplicate node {id}")));
                    }
                    positions.push(p);
                }
                lines.expect("$EndNodes")?;
                seen_nodes = true;
            }
            "$Elements" => {
                let (n, l) = lines.next()?;
                let count: usize = num(n, Some(l))?;
                for _ in 0..count {
                    let (n, l) = lines.next()?;
                    let mut it = l.split_whitespace();
                    let _id: u64 = num(n, it.next())?;
                    let kind: u32 = num(n, it.next())?;
                    let ntags: usize = num(n, it.next())?;
                    for _ in 0..ntags {
                        let _: i64 = num(n, it.next())?;
                    }
                    let nodes: Vec<u64> = it.map(|t| num(n, Some(t))).collect::<Result<_, _>>()?;
                    match (kind, nodes.len()) {
                        (TETRAHEDRON, 4) => raw_tets.push((n, [nodes[0], nodes[1], nodes[2], nodes[3]])),
                        (TRIANGLE, 3) => raw_tris.push((n, [nodes[0], nodes[1], nodes[2]])),
                        (TETRAHEDRON | TRIANGLE, k) => {
                            return Err(IoError::parse(n, format!("element type {kind} with {k} nodes")))
                        }
                        _ => return Err(IoError::UnsupportedElement { line: n, kind }),
                    }
                }
                lines.expect("$EndElements")?;
            }
            s if s.starts_with('$') && !s.starts_with("$End") => {
                let end = format!("$End{}", &s[1..]);
                loop {
                    let (_, l) = lines.next()?;
                    if l == end {
                        break;
                    }
                }
            }
            _ => return Err(IoError::parse(line, format!("unexpected `{l}`"))),
        }
    }
    if !seen_format {
        return Err(IoError::parse(1, "missing $MeshFormat"));
    }
    if !seen_nodes {
        return Err(IoError::parse(lines.last, "missing $Nodes"));
    }
    let lookup = |line: usize, id: u64| {
        ids.get(&id)
            .copied()
            .ok_or_else(|| IoError::parse(line, format!("unknown node {id}")))
    };
    let mut tets = Vec::with_capacity(raw_tets.len());
    for (line, t) in &raw_tets {
        tets.push([lookup(*line, t[0])?, lookup(*line, t[1])?, lookup(*line, t[2])?, lookup(*line, t[3])?]);
    }
    let mut tris = Vec::with_capacity(raw_tris.len());
    for (line, t) in &raw_tris {
        tris.push([lookup(*line, t[0])?, lookup(*line, t[1])?, lookup(*line, t[2])?]);
    }
    Ok(Mesh::new(positions, tets, tris)?)
}

/// Writes nodes (1-based), live tetrahedra and the surface triangles.
pub fn write_msh<W: Write>(mesh: &Mesh, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "$MeshFormat\n2.2 0 8\n$EndMeshFormat")?;
    writeln!(w, "$Nodes\n{}", mesh.num_vertices())?;
    for (i, v) in mesh.vertices().iter().enumerate() {
        let [x, y, z] = v.position;
        writeln!(w, "{} {:.16e} {:.16e} {:.16e}", i + 1, x, y, z)?;
    }
    writeln!(w, "$EndNodes")?;
    let surface = mesh.surface_triangles();
    writeln!(w, "$Elements\n{}", surface.len() + mesh.num_live_tets())?;
    let mut id = 0;
    for tri in surface {
        id += 1;
        writeln!(w, "{id} {TRIANGLE} 2 0 0 {} {} {}", tri[0].0 + 1, tri[1].0 + 1, tri[2].0 + 1)?;
    }
    for t in mesh.live_tet_ids() {
        id += 1;
        let v = mesh.tet(t).vertices;
        writeln!(
            w,
            "{id} {TETRAHEDRON} 2 0 0 {} {} {} {}",
            v[0].0 + 1,
            v[1].0 + 1,
            v[2].0 + 1,
            v[3].0 + 1
        )?;
    }
    writeln!(w, "$EndElements")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::generate_test_mesh;
    use crate::mesh::MeshError;

    const ONE_TET: &str = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n1\n3 1 \"vol\"\n$EndPhysicalNames\n$Nodes\n4\n10 0 0 0\n11 1 0 0\n12 0 1 0\n13 0 0 1\n$EndNodes\n$Elements\n5\n1 2 2 1 1 10 12 11\n2 2 2 1 1 10 11 13\n3 2 2 1 1 10 13 12\n4 2 2 1 1 11 12 13\n5 4 2 1 1 10 11 12 13\n$EndElements\n";

    #[test]
    fn one_tet_file() {
        let m = parse_msh(ONE_TET).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_live_tets(), 1);
        assert_eq!(m.surface_triangles().len(), 4);
        assert_eq!(m.position(crate::VertexId(1)), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn round_trip_is_exact() {
        let m = generate_test_mesh(3, 0.4, 9);
        let mut buf = Vec::new();
        write_msh(&m, &mut buf).unwrap();
        let back = parse_msh(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.vertices().iter().map(|v| v.position).collect::<Vec<_>>(), m.vertices().iter().map(|v| v.position).collect::<Vec<_>>());
        assert_eq!(back.tet_vertex_table(), m.tet_vertex_table());
        assert_eq!(back.surface_key_set(), m.surface_key_set());
    }

    #[test]
    fn other_elements_are_refused() {
        let text = ONE_TET.replace("5\n1 2 2 1 1 10 12 11", "5\n1 1 2 1 1 10 12");
        match parse_msh(&text) {
            Err(IoError::UnsupportedElement { line: 17, kind: 1 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = ONE_TET.replace("11 1 0 0", "11 1 zero 0");
        match parse_msh(&text) {
            Err(IoError::Parse { line: 11, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_msh("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n"), Err(IoError::Parse { line: 2, .. })));
        assert!(matches!(parse_msh(&ONE_TET[..120]), Err(IoError::Parse { .. })));
    }

    #[test]
    fn inverted_tet_is_invalid() {
        let text = ONE_TET.replace("5 4 2 1 1 10 11 12 13", "5 4 2 1 1 11 10 12 13");
        assert!(matches!(parse_msh(&text), Err(IoError::InvalidMesh(MeshError::InvalidTet { tet: 0 }))));
    }
}
