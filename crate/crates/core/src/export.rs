//! Writers for the medial mesh and its structure, and a reader for `.ma`.
//!
//! Every writer takes the normalization [`Transform`] and emits coordinates
//! and radii in input units. Numbers use Rust's shortest round-trip decimal
//! form, so output is byte-identical for identical meshes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{MedialError, Result};
use crate::geom::Vec3;
use crate::mesh_io::Transform;
use crate::rpd::{MedialEdge, MedialFace, MedialMesh, Sphere, SphereClass};

fn point(tr: &Transform, p: &Vec3) -> Vec3 {
    tr.invert_point(p)
}

/// `.ma` text: a header `nv ne nf`, then one `v x y z r` line per sphere,
/// `e i j` per valid edge and `f i j k` per valid face, 0-based.
pub fn write_ma(mesh: &MedialMesh, tr: &Transform) -> String {
    let edges: Vec<&MedialEdge> = mesh.valid_edges().collect();
    let faces: Vec<&MedialFace> = mesh.valid_faces().collect();
    let mut s = String::new();
    writeln!(s, "{} {} {}", mesh.spheres.len(), edges.len(), faces.len()).unwrap();
    for sp in &mesh.spheres {
        let c = point(tr, &sp.center);
        writeln!(s, "v {} {} {} {}", c.x, c.y, c.z, tr.invert_length(sp.radius)).unwrap();
    }
    for e in edges {
        writeln!(s, "e {} {}", e.v[0], e.v[1]).unwrap();
    }
    for f in faces {
        writeln!(s, "f {} {} {}", f.v[0], f.v[1], f.v[2]).unwrap();
    }
    s
}

fn parse_err(line: usize, msg: impl Into<String>) -> MedialError {
    MedialError::Parse { line, msg: msg.into() }
}

fn fields<T: std::str::FromStr>(parts: &[&str], n: usize, line: usize) -> Result<Vec<T>> {
    if parts.len() != n {
        return Err(parse_err(line, format!("expected {n} values, found {}", parts.len())));
    }
    parts
        .iter()
        .map(|p| p.parse::<T>().map_err(|_| parse_err(line, format!("bad number {p:?}"))))
        .collect()
}

/// Parse `.ma` text. The header line is optional; when present its counts
/// must match. Blank lines and `#` comments are skipped. Spheres come back
/// with class `Unknown`, and every edge and face is valid.
pub fn read_ma(text: &str) -> Result<MedialMesh> {
    let mut mesh = MedialMesh::default();
    let mut header: Option<[usize; 3]> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        match parts[0] {
            "v" => {
                let v: Vec<f64> = fields(&parts[1..], 4, line)?;
                mesh.spheres.push(Sphere::new(Vec3::new(v[0], v[1], v[2]), v[3]));
            }
            "e" => {
                let v: Vec<usize> = fields(&parts[1..], 2, line)?;
                mesh.edges.push(MedialEdge { v: [v[0], v[1]], valid: true });
            }
            "f" => {
                let v: Vec<usize> = fields(&parts[1..], 3, line)?;
                mesh.faces.push(MedialFace { v: [v[0], v[1], v[2]], valid: true, sheet: None });
            }
            _ if header.is_none() && mesh.spheres.is_empty() => {
                let v: Vec<usize> = fields(&parts, 3, line)?;
                header = Some([v[0], v[1], v[2]]);
            }
            other => return Err(parse_err(line, format!("unknown record {other:?}"))),
        }
    }
    let n = mesh.spheres.len();
    if let Some([nv, ne, nf]) = header {
        if [nv, ne, nf] != [n, mesh.edges.len(), mesh.faces.len()] {
            return Err(parse_err(1, "header counts do not match the records"));
        }
    }
    if mesh.edges.iter().flat_map(|e| e.v).chain(mesh.faces.iter().flat_map(|f| f.v)).any(|i| i >= n) {
        return Err(parse_err(0, "index out of range"));
    }
    mesh.source = (0..n).collect();
    Ok(mesh)
}

/// Distinct color per sheet id from a fixed golden-ratio hue walk.
fn sheet_color(id: Option<usize>) -> [u8; 3] {
    let Some(id) = id else { return [128, 128, 128] };
    let h = (id as f64 * 0.618_033_988_749_895).fract() * 6.0;
    let x = 1.0 - ((h % 2.0) - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [r, g, b].map(|c: f64| (55.0 + 200.0 * c).round() as u8)
}

/// ASCII PLY of the valid faces with one color per sheet.
pub fn write_sheets_ply(mesh: &MedialMesh, tr: &Transform) -> String {
    let faces: Vec<&MedialFace> = mesh.valid_faces().collect();
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    writeln!(s, "element vertex {}", mesh.spheres.len()).unwrap();
    s.push_str("property double x\nproperty double y\nproperty double z\nproperty double radius\n");
    writeln!(s, "element face {}", faces.len()).unwrap();
    s.push_str("property list uchar int vertex_indices\nproperty uchar red\nproperty uchar green\nproperty uchar blue\nproperty int sheet\nend_header\n");
    for sp in &mesh.spheres {
        let c = point(tr, &sp.center);
        writeln!(s, "{} {} {} {}", c.x, c.y, c.z, tr.invert_length(sp.radius)).unwrap();
    }
    for f in faces {
        let [r, g, b] = sheet_color(f.sheet);
        let id = f.sheet.map_or(-1, |x| x as i64);
        writeln!(s, "3 {} {} {} {r} {g} {b} {id}", f.v[0], f.v[1], f.v[2]).unwrap();
    }
    s
}

/// OBJ with the seam spheres as vertices and one `l` polyline per seam;
/// closed seams repeat their first vertex.
pub fn write_seams_obj(mesh: &MedialMesh, tr: &Transform) -> String {
    let mut s = String::from("# seams\n");
    let mut slot = vec![0usize; mesh.spheres.len()];
    let mut used: Vec<usize> = mesh.seams.iter().flat_map(|seam| seam.spheres.iter().copied()).collect();
    used.sort_unstable();
    used.dedup();
    for (k, &i) in used.iter().enumerate() {
        slot[i] = k + 1;
        let c = point(tr, &mesh.spheres[i].center);
        writeln!(s, "v {} {} {}", c.x, c.y, c.z).unwrap();
    }
    for seam in &mesh.seams {
        s.push('l');
        for &i in &seam.spheres {
            write!(s, " {}", slot[i]).unwrap();
        }
        if seam.closed {
            write!(s, " {}", slot[seam.spheres[0]]).unwrap();
        }
        s.push('\n');
    }
    s
}

/// OBJ point cloud of the junction spheres.
pub fn write_junctions_obj(mesh: &MedialMesh, tr: &Transform) -> String {
    let mut s = String::from("# junctions\n");
    for &i in &mesh.junctions {
        let c = point(tr, &mesh.spheres[i].center);
        writeln!(s, "v {} {} {}", c.x, c.y, c.z).unwrap();
    }
    for k in 1..=mesh.junctions.len() {
        writeln!(s, "p {k}").unwrap();
    }
    s
}

#[derive(Serialize)]
struct StructureDoc<'a> {
    classes: Vec<&'static str>,
    pinned: Vec<usize>,
    face_sheets: Vec<Option<usize>>,
    seams: &'a [crate::rpd::Seam],
    junctions: &'a [usize],
}

/// Per-sphere classes, per-valid-face sheet ids, seams and junctions as JSON.
pub fn write_structure_json(mesh: &MedialMesh) -> String {
    let doc = StructureDoc {
        classes: mesh.spheres.iter().map(|s| s.class.label()).collect(),
        pinned: (0..mesh.spheres.len()).filter(|&i| mesh.spheres[i].pinned).collect(),
        face_sheets: mesh.valid_faces().map(|f| f.sheet).collect(),
        seams: &mesh.seams,
        junctions: &mesh.junctions,
    };
    serde_json::to_string_pretty(&doc).expect("structure serializes")
}

/// Mark zero-radius spheres of a mesh read from `.ma` as pinned feature
/// spheres: corners when they sit on a feature corner vertex, edges
/// otherwise.
pub fn restore_pins(mesh: &mut MedialMesh, corners: &[Vec3], tol: f64) {
    for s in mesh.spheres.iter_mut().filter(|s| s.radius == 0.0) {
        s.pinned = true;
        s.class = if corners.iter().any(|c| (c - s.center).norm() <= tol) {
            SphereClass::T1Corner
        } else {
            SphereClass::T1Edge
        };
    }
}
