use std::fmt::Write as _;

use crate::error::{MedialError, Result};
use crate::geom::Vec3;

use super::TetDomain;

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                items.push((i + 1, tok));
            }
        }
        Self { items, pos: 0 }
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).or(self.items.last()).map_or(0, |t| t.0)
    }

    fn next(&mut self) -> Option<&'a str> {
        let t = self.items.get(self.pos).map(|t| t.1);
        self.pos += 1;
        t
    }

    fn num<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let line = self.line();
        let tok = self
            .next()
            .ok_or_else(|| MedialError::Parse { line, msg: format!("unexpected end of file, expected {what}") })?;
        tok.parse()
            .map_err(|_| MedialError::Parse { line, msg: format!("expected {what}, found `{tok}`") })
    }
}

/// Parse an ASCII MEDIT `.mesh` file into vertices and 0-based tets.
pub fn read_medit(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 4]>)> {
    let mut tk = Tokens::new(text);
    let mut verts = Vec::new();
    let mut tets = Vec::new();
    while let Some(kw) = tk.next() {
        match kw {
            "MeshVersionFormatted" => {
                let _: i64 = tk.num("version")?;
            }
            "Dimension" => {
                let dim: usize = tk.num("dimension")?;
                if dim != 3 {
                    return Err(MedialError::Parse { line: tk.line(), msg: format!("dimension {dim} unsupported") });
                }
            }
            "Vertices" => {
                let n: usize = tk.num("vertex count")?;
                verts.reserve(n);
                for _ in 0..n {
                    let x = tk.num("coordinate")?;
                    let y = tk.num("coordinate")?;
                    let z = tk.num("coordinate")?;
                    let _: i64 = tk.num("vertex reference")?;
                    verts.push(Vec3::new(x, y, z));
                }
            }
            "Tetrahedra" => {
                let n: usize = tk.num("tet count")?;
                tets.reserve(n);
                for t in 0..n {
                    let mut tet = [0usize; 4];
                    for slot in tet.iter_mut() {
                        let v: i64 = tk.num("vertex index")?;
                        if v < 1 {
                            return Err(MedialError::BadIndex { tet: t, vertex: v.max(0) as usize, count: verts.len() });
                        }
                        *slot = (v - 1) as usize;
                    }
                    let _: i64 = tk.num("tet reference")?;
                    tets.push(tet);
                }
            }
            "End" => break,
            other => {
                let width = match other {
                    "Edges" => 3,
                    "Triangles" => 4,
                    "Quadrilaterals" => 5,
                    "Hexahedra" => 9,
                    "Corners" | "Ridges" | "RequiredVertices" | "RequiredEdges" | "RequiredTriangles" => 1,
                    _ => {
                        return Err(MedialError::Parse { line: tk.line(), msg: format!("unknown section `{other}`") })
                    }
                };
                // Boundary triangles are always re-derived from the tets.
                let n: usize = tk.num("count")?;
                for _ in 0..n * width {
                    let _: f64 = tk.num("entry")?;
                }
            }
        }
    }
    if verts.is_empty() || tets.is_empty() {
        return Err(MedialError::Parse { line: tk.line(), msg: "missing Vertices or Tetrahedra".into() });
    }
    Ok((verts, tets))
}

/// Write a domain as ASCII MEDIT with 1-based indices and boundary triangles.
pub fn write_medit(d: &TetDomain) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "MeshVersionFormatted 2\nDimension 3\nVertices\n{}", d.vertices.len());
    for v in &d.vertices {
        let _ = writeln!(s, "{} {} {} 0", v.x, v.y, v.z);
    }
    let _ = writeln!(s, "Tetrahedra\n{}", d.tets.len());
    for t in &d.tets {
        let _ = writeln!(s, "{} {} {} {} 0", t[0] + 1, t[1] + 1, t[2] + 1, t[3] + 1);
    }
    let _ = writeln!(s, "Triangles\n{}", d.boundary_tris.len());
    for t in &d.boundary_tris {
        let _ = writeln!(s, "{} {} {} 0", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s.push_str("End\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const TET: &str = "MeshVersionFormatted 1\nDimension 3\nVertices\n4\n\
        0 0 0 1\n1 0 0 1\n0 1 0 1\n0 0 1 1\nTetrahedra\n1\n1 2 3 4 0\nEnd\n";

    #[test]
    fn reads_single_tet() {
        let (v, t) = read_medit(TET).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(t, vec![[0, 1, 2, 3]]);
        let d = TetDomain::from_parts(v, t).unwrap();
        assert_eq!(d.boundary_tris.len(), 4);
    }

    #[test]
    fn out_of_range_index_names_tet() {
        let text = TET.replace("1 2 3 4 0", "1 2 3 9 0");
        let (v, t) = read_medit(&text).unwrap();
        let err = TetDomain::from_parts(v, t).unwrap_err();
        assert!(matches!(err, MedialError::BadIndex { tet: 0, vertex: 8, .. }));
        let text = TET.replace("1 2 3 4 0", "0 2 3 4 0");
        assert!(matches!(read_medit(&text), Err(MedialError::BadIndex { tet: 0, .. })));
    }

    #[test]
    fn garbage_reports_line() {
        let text = TET.replace("0 1 0 1", "0 x 0 1");
        match read_medit(&text) {
            Err(MedialError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn skips_known_sections() {
        let text = TET.replace("End", "Triangles\n1\n1 2 3 0\nCorners\n1\n1\nEnd");
        assert!(read_medit(&text).is_ok());
        let text = TET.replace("End", "Bogus\n1\n");
        assert!(read_medit(&text).is_err());
    }

    #[test]
    fn roundtrip() {
        let d = fixtures::box_mesh(Vec3::new(3.0, 1.0, 1.0), [3, 1, 1]);
        let (v, t) = read_medit(&write_medit(&d)).unwrap();
        assert_eq!(v, d.vertices);
        assert_eq!(t, d.tets);
    }
}
