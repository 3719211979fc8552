use crate::error::{MedialError, Result};
use crate::geom::Vec3;

const VTK_TETRA: i64 = 10;

/// Parse a legacy ASCII VTK unstructured grid, keeping tetrahedral cells.
pub fn read_vtk(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 4]>)> {
    let mut lines = text.lines().enumerate();
    let err = |line: usize, msg: &str| MedialError::Parse { line: line + 1, msg: msg.to_string() };
    match lines.next() {
        Some((_, l)) if l.starts_with("# vtk DataFile") => {}
        _ => return Err(err(0, "missing `# vtk DataFile` header")),
    }
    lines.next();
    match lines.next() {
        Some((_, l)) if l.trim().eq_ignore_ascii_case("ASCII") => {}
        Some((i, _)) => return Err(err(i, "only ASCII legacy VTK is supported")),
        None => return Err(err(2, "truncated header")),
    }
    let mut toks: Vec<(usize, &str)> = Vec::new();
    for (i, l) in lines {
        for t in l.split_whitespace() {
            toks.push((i, t));
        }
    }
    let mut pos = 0usize;
    let mut next = |what: &str| -> Result<(usize, &str)> {
        let t = toks
            .get(pos)
            .copied()
            .ok_or_else(|| MedialError::Parse { line: 0, msg: format!("unexpected end of file, expected {what}") })?;
        pos += 1;
        Ok(t)
    };
    fn parse<T: std::str::FromStr>(t: (usize, &str), what: &str) -> Result<T> {
        t.1.parse()
            .map_err(|_| MedialError::Parse { line: t.0 + 1, msg: format!("expected {what}, found `{}`", t.1) })
    }

    let mut points = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut types: Vec<i64> = Vec::new();
    while let Ok(kw) = next("keyword") {
        match kw.1 {
            "DATASET" => {
                let t = next("dataset type")?;
                if t.1 != "UNSTRUCTURED_GRID" {
                    return Err(MedialError::Parse { line: t.0 + 1, msg: format!("dataset `{}` unsupported", t.1) });
                }
            }
            "POINTS" => {
                let n: usize = parse(next("point count")?, "point count")?;
                next("point type")?;
                for _ in 0..n {
                    let x = parse(next("coordinate")?, "coordinate")?;
                    let y = parse(next("coordinate")?, "coordinate")?;
                    let z = parse(next("coordinate")?, "coordinate")?;
                    points.push(Vec3::new(x, y, z));
                }
            }
            "CELLS" => {
                let n: usize = parse(next("cell count")?, "cell count")?;
                let _size: usize = parse(next("cell list size")?, "cell list size")?;
                for _ in 0..n {
                    let k: usize = parse(next("cell size")?, "cell size")?;
                    let mut c = Vec::with_capacity(k);
                    for _ in 0..k {
                        c.push(parse(next("point index")?, "point index")?);
                    }
                    cells.push(c);
                }
            }
            "CELL_TYPES" => {
                let n: usize = parse(next("cell type count")?, "cell type count")?;
                for _ in 0..n {
                    types.push(parse(next("cell type")?, "cell type")?);
                }
            }
            "POINT_DATA" | "CELL_DATA" | "FIELD" => break,
            other => {
                return Err(MedialError::Parse { line: kw.0 + 1, msg: format!("unexpected keyword `{other}`") })
            }
        }
    }
    if types.len() != cells.len() {
        return Err(MedialError::Parse { line: 0, msg: "CELL_TYPES count differs from CELLS".into() });
    }
    let tets: Vec<[usize; 4]> = cells
        .iter()
        .zip(&types)
        .filter(|(c, &t)| t == VTK_TETRA && c.len() == 4)
        .map(|(c, _)| [c[0], c[1], c[2], c[3]])
        .collect();
    if points.is_empty() || tets.is_empty() {
        return Err(MedialError::Parse { line: 0, msg: "no points or tetrahedra".into() });
    }
    Ok((points, tets))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TET: &str = "# vtk DataFile Version 2.0\nsingle tet\nASCII\nDATASET UNSTRUCTURED_GRID\n\
        POINTS 4 double\n0 0 0\n1 0 0\n0 1 0\n0 0 1\nCELLS 2 9\n4 0 1 2 3\n3 0 1 2\nCELL_TYPES 2\n10\n5\n\
        CELL_DATA 2\n";

    #[test]
    fn reads_tets_and_ignores_other_cells() {
        let (p, t) = read_vtk(TET).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(t, vec![[0, 1, 2, 3]]);
    }

    #[test]
    fn rejects_binary() {
        assert!(read_vtk(&TET.replace("ASCII", "BINARY")).is_err());
    }

    #[test]
    fn bad_number_reports_line() {
        match read_vtk(&TET.replace("0 1 0\n", "0 q 0\n")) {
            Err(MedialError::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
    }
}
