//! Tetrahedral input domains: loading, validation, normalization and sharp
//! feature detection on the boundary surface.

mod features;
mod medit;
mod vtk;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MedialError, Result};
use crate::geom::{tet_volume, triangle_normal, Aabb, Vec3};

pub use features::{detect_features, parse_manual_edges, FeatureKind};
pub use medit::{read_medit, write_medit};
pub use vtk::read_vtk;

/// Outward-facing vertex order of the face opposite local vertex `k` of a
/// positively oriented tet.
pub const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

/// A boundary edge with its two incident boundary triangles.
#[derive(Clone, Debug)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub tris: [usize; 2],
    /// Interior dihedral angle in radians, `pi` on flat regions.
    pub dihedral: f64,
    pub kind: FeatureKind,
}

/// A chain of feature edges, as vertex indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub verts: Vec<usize>,
    pub closed: bool,
    pub kind: FeatureKind,
}

#[derive(Clone, Debug)]
pub struct TetDomain {
    pub vertices: Vec<Vec3>,
    pub tets: Vec<[usize; 4]>,
    /// Outward oriented boundary triangles.
    pub boundary_tris: Vec<[usize; 3]>,
    /// For each tet, the boundary triangle on the face opposite local vertex `k`.
    pub tet_boundary: Vec<[Option<usize>; 4]>,
    pub edges: Vec<BoundaryEdge>,
    /// Boundary edge indices of each triangle; slot `k` joins corners `k` and `k + 1`.
    pub tri_edges: Vec<[usize; 3]>,
    pub feature_edges: Vec<usize>,
    pub feature_corners: Vec<usize>,
    pub polylines: Vec<Polyline>,
    /// Boundary triangle components split by convex-sharp edges.
    pub tri_patch: Vec<usize>,
    pub bbox: Aabb,
    pub bbox_diag: f64,
}

/// `x_normalized = scale * x_input + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub scale: f64,
    pub offset: [f64; 3],
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub fn identity() -> Self {
        Self { scale: 1.0, offset: [0.0; 3] }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        p * self.scale + Vec3::from(self.offset)
    }

    pub fn invert_point(&self, p: &Vec3) -> Vec3 {
        (p - Vec3::from(self.offset)) / self.scale
    }

    pub fn invert_length(&self, l: f64) -> f64 {
        l / self.scale
    }
}

impl TetDomain {
    /// Validate a raw tet mesh and derive its boundary surface. Feature sets are
    /// left empty; call [`detect_features`] afterwards.
    pub fn from_parts(vertices: Vec<Vec3>, mut tets: Vec<[usize; 4]>) -> Result<Self> {
        if tets.is_empty() {
            return Err(MedialError::EmptyMesh);
        }
        let n = vertices.len();
        for (t, tet) in tets.iter().enumerate() {
            for &v in tet {
                if v >= n {
                    return Err(MedialError::BadIndex { tet: t, vertex: v, count: n });
                }
            }
        }
        let vols: Vec<f64> = tets
            .iter()
            .map(|t| tet_volume(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]], &vertices[t[3]]))
            .collect();
        // A mesh written with the opposite handedness is accepted as a whole.
        if vols.iter().all(|&v| v < 0.0) {
            log::warn!("all tets are negatively oriented; flipping");
            for t in tets.iter_mut() {
                t.swap(2, 3);
            }
        } else if let Some((t, &v)) = vols.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            return Err(MedialError::InvertedTet { tet: t, volume: v });
        }

        let mut faces: HashMap<[usize; 3], (usize, usize, u8)> = HashMap::new();
        for (t, tet) in tets.iter().enumerate() {
            for (k, f) in TET_FACES.iter().enumerate() {
                let mut key = [tet[f[0]], tet[f[1]], tet[f[2]]];
                key.sort_unstable();
                let e = faces.entry(key).or_insert((t, k, 0));
                e.2 += 1;
                if e.2 > 2 {
                    return Err(MedialError::NonManifoldFace(key));
                }
            }
        }
        let mut tet_boundary = vec![[None; 4]; tets.len()];
        let mut bfaces: Vec<(usize, usize)> = faces
            .values()
            .filter(|(_, _, c)| *c == 1)
            .map(|&(t, k, _)| (t, k))
            .collect();
        bfaces.sort_unstable();
        let mut boundary_tris = Vec::with_capacity(bfaces.len());
        for &(t, k) in &bfaces {
            let f = TET_FACES[k];
            let tet = tets[t];
            tet_boundary[t][k] = Some(boundary_tris.len());
            boundary_tris.push([tet[f[0]], tet[f[1]], tet[f[2]]]);
        }

        let (edges, tri_edges) = build_edges(&vertices, &boundary_tris)?;
        check_vertex_fans(&boundary_tris, &edges, &tri_edges)?;
        let comps = components(boundary_tris.len(), &edges, |_| true);
        let ncomp = comps.iter().copied().max().map_or(0, |m| m + 1);
        if ncomp != 1 {
            return Err(MedialError::MultipleComponents(ncomp));
        }

        let bbox = Aabb::from_points(vertices.iter());
        let bbox_diag = bbox.diagonal();
        let ntri = boundary_tris.len();
        Ok(Self {
            vertices,
            tets,
            boundary_tris,
            tet_boundary,
            edges,
            tri_edges,
            feature_edges: Vec::new(),
            feature_corners: Vec::new(),
            polylines: Vec::new(),
            tri_patch: vec![0; ntri],
            bbox,
            bbox_diag,
        })
    }

    pub fn tet_points(&self, t: usize) -> [Vec3; 4] {
        let tet = self.tets[t];
        [
            self.vertices[tet[0]],
            self.vertices[tet[1]],
            self.vertices[tet[2]],
            self.vertices[tet[3]],
        ]
    }

    pub fn tri_points(&self, f: usize) -> [Vec3; 3] {
        let t = self.boundary_tris[f];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn tri_normal(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.tri_points(f);
        triangle_normal(&a, &b, &c)
    }

    pub fn volume(&self) -> f64 {
        (0..self.tets.len())
            .map(|t| {
                let [a, b, c, d] = self.tet_points(t);
                tet_volume(&a, &b, &c, &d)
            })
            .sum()
    }

    /// Volume enclosed by the boundary surface (divergence theorem).
    pub fn enclosed_volume(&self) -> f64 {
        (0..self.boundary_tris.len())
            .map(|f| {
                let [a, b, c] = self.tri_points(f);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.boundary_tris.len())
            .map(|f| {
                let [a, b, c] = self.tri_points(f);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }

    /// Euler characteristic of the boundary surface.
    pub fn boundary_euler(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for t in &self.boundary_tris {
            for &v in t {
                used[v] = true;
            }
        }
        let nv = used.iter().filter(|&&u| u).count() as i64;
        nv - self.edges.len() as i64 + self.boundary_tris.len() as i64
    }

    /// Apply an affine map `x -> scale * x + offset` to every vertex.
    pub fn transformed(&self, tr: &Transform) -> TetDomain {
        let mut d = self.clone();
        for v in d.vertices.iter_mut() {
            *v = tr.apply(v);
        }
        d.bbox = Aabb::from_points(d.vertices.iter());
        d.bbox_diag = d.bbox.diagonal();
        d
    }

    /// Edge index joining boundary vertices `a` and `b`, if any.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.iter().position(|e| e.v == [a.min(b), a.max(b)])
    }
}

/// Load a tet mesh by extension: `.mesh` (MEDIT) or `.vtk` (legacy ASCII).
pub fn load_tet_mesh(path: &Path) -> Result<TetDomain> {
    let text = std::fs::read_to_string(path).map_err(|e| MedialError::io(path, e))?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let (verts, tets) = match ext.as_str() {
        "mesh" => read_medit(&text)?,
        "vtk" => read_vtk(&text)?,
        other => return Err(MedialError::UnsupportedFormat(other.to_string())),
    };
    TetDomain::from_parts(verts, tets)
}

/// Uniformly scale and translate the domain into `[0, 1000]^3` with the
/// longest axis spanning exactly 1000.
pub fn normalize(domain: &TetDomain) -> Result<(TetDomain, Transform)> {
    let ext = domain.bbox.extent();
    let longest = ext.max();
    if !(longest > 0.0) || !longest.is_finite() {
        return Err(MedialError::ZeroExtent);
    }
    let scale = 1000.0 / longest;
    let offset = -domain.bbox.min * scale;
    let tr = Transform { scale, offset: [offset.x, offset.y, offset.z] };
    let mut d = domain.transformed(&tr);
    // Pin the extreme coordinates so repeated normalization is exact.
    let axis = d.bbox.longest_axis();
    for v in d.vertices.iter_mut() {
        for k in 0..3 {
            if v[k] < 0.0 {
                v[k] = 0.0;
            }
        }
        if v[axis] > 1000.0 {
            v[axis] = 1000.0;
        }
    }
    d.bbox = Aabb::from_points(d.vertices.iter());
    d.bbox_diag = d.bbox.diagonal();
    Ok((d, tr))
}

fn build_edges(vertices: &[Vec3], tris: &[[usize; 3]]) -> Result<(Vec<BoundaryEdge>, Vec<[usize; 3]>)> {
    let mut map: HashMap<(usize, usize), usize> = HashMap::new();
    let mut slots: Vec<Vec<(usize, bool)>> = Vec::new();
    let mut tri_edges = vec![[0usize; 3]; tris.len()];
    for (f, t) in tris.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let id = *map.entry(key).or_insert_with(|| {
                slots.push(Vec::new());
                slots.len() - 1
            });
            slots[id].push((f, a < b));
            tri_edges[f][k] = id;
        }
    }
    let mut keys = vec![(0, 0); slots.len()];
    for (k, &id) in &map {
        keys[id] = *k;
    }
    let mut edges = Vec::with_capacity(slots.len());
    for (id, s) in slots.iter().enumerate() {
        let (a, b) = keys[id];
        if s.len() != 2 || s[0].1 == s[1].1 {
            return Err(MedialError::NonManifoldEdge { a, b, count: s.len() });
        }
        let (t0, t1) = (s[0].0, s[1].0);
        let dihedral = dihedral_angle(vertices, &tris[t0], &tris[t1], a, b);
        edges.push(BoundaryEdge {
            v: [a, b],
            tris: [t0, t1],
            dihedral,
            kind: FeatureKind::Smooth,
        });
    }
    Ok((edges, tri_edges))
}

/// Interior dihedral angle at the edge `(a, b)` shared by two outward triangles.
fn dihedral_angle(vertices: &[Vec3], t0: &[usize; 3], t1: &[usize; 3], a: usize, b: usize) -> f64 {
    let n0 = triangle_normal(&vertices[t0[0]], &vertices[t0[1]], &vertices[t0[2]]);
    let n1 = triangle_normal(&vertices[t1[0]], &vertices[t1[1]], &vertices[t1[2]]);
    let opp = t1.iter().copied().find(|&v| v != a && v != b).unwrap_or(a);
    let bend = n0.dot(&n1).clamp(-1.0, 1.0).acos();
    if n0.dot(&(vertices[opp] - vertices[a])) > 0.0 {
        std::f64::consts::PI + bend
    } else {
        std::f64::consts::PI - bend
    }
}

fn check_vertex_fans(tris: &[[usize; 3]], edges: &[BoundaryEdge], tri_edges: &[[usize; 3]]) -> Result<()> {
    let mut vtris: HashMap<usize, Vec<usize>> = HashMap::new();
    for (f, t) in tris.iter().enumerate() {
        for &v in t {
            vtris.entry(v).or_default().push(f);
        }
    }
    let mut verts: Vec<_> = vtris.into_iter().collect();
    verts.sort_unstable_by_key(|(v, _)| *v);
    for (v, fan) in verts {
        // Walk around v through edges incident to v; a disk visits every triangle.
        let start = fan[0];
        let mut seen = 1usize;
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let next = tri_edges[cur]
                .iter()
                .map(|&e| &edges[e])
                .filter(|e| e.v[0] == v || e.v[1] == v)
                .map(|e| if e.tris[0] == cur { e.tris[1] } else { e.tris[0] })
                .find(|&t| t != prev);
            match next {
                Some(t) if t == start => break,
                Some(t) => {
                    prev = cur;
                    cur = t;
                    seen += 1;
                    if seen > fan.len() {
                        return Err(MedialError::NonManifoldVertex(v));
                    }
                }
                None => return Err(MedialError::NonManifoldVertex(v)),
            }
        }
        if seen != fan.len() {
            return Err(MedialError::NonManifoldVertex(v));
        }
    }
    Ok(())
}

/// Label triangles by connectivity across edges accepted by `cross`.
pub(crate) fn components(ntri: usize, edges: &[BoundaryEdge], cross: impl Fn(&BoundaryEdge) -> bool) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..ntri).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in edges.iter().filter(|e| cross(e)) {
        let (a, b) = (find(&mut parent, e.tris[0]), find(&mut parent, e.tris[1]));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut label = vec![usize::MAX; ntri];
    let mut next = 0;
    let mut out = vec![0; ntri];
    for f in 0..ntri {
        let r = find(&mut parent, f);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        out[f] = label[r];
    }
    out
}
