use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom::{angle_between, closest_point_on_triangle, SurfaceIndex, SurfacePoint};
use crate::rpd::{MedialEdge, MedialFace, MedialMesh, Sphere, SphereClass};

const SHIFTS: usize = 10;
const SHIFT_FRACTION: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct TangentSearch {
    pub tangents: Vec<SurfacePoint>,
    /// Shifts taken before the second tangent appeared.
    pub steps: usize,
    pub spike: bool,
}

/// Find a second tangent by shifting the sphere away from its closest point
/// in steps of `0.01 r`, at most ten times. A point counts when it is as close
/// as the closest point and seen at least `angle` away from the first one.
pub fn recover_second_tangent(sphere: &Sphere, index: &SurfaceIndex, angle: f64) -> TangentSearch {
    let h1 = index.closest(&sphere.center);
    let p1 = h1.point;
    let n1 = if h1.dist > 0.0 { (p1.position - sphere.center) / h1.dist } else { p1.normal };
    let tol = 1e-9 * index.bbox_diag();
    for k in 0..=SHIFTS {
        let c = sphere.center - n1 * (SHIFT_FRACTION * sphere.radius * k as f64);
        let to_p1 = p1.position - c;
        let near = index.closest(&c);
        let far = index.closest_where(&c, |f| {
            let [a, b, d] = index.tri(f);
            let q = closest_point_on_triangle(&c, a, b, d).0;
            angle_between(&(q - c), &to_p1) >= angle
        });
        if let Some(q) = far {
            if q.dist <= near.dist + tol {
                return TangentSearch { tangents: vec![p1, q.point], steps: k, spike: false };
            }
        }
    }
    TangentSearch { tangents: vec![p1], steps: SHIFTS, spike: true }
}

/// Split valid faces 1-to-4 until every valid edge is at most `max_edge`
/// long. New spheres are appended after the originals with their exact
/// distance to the surface as radius.
pub fn subdivide(mesh: &MedialMesh, max_edge: f64, index: &SurfaceIndex) -> MedialMesh {
    let mut out = MedialMesh {
        spheres: mesh.spheres.clone(),
        edges: mesh.valid_edges().copied().collect(),
        faces: mesh.valid_faces().copied().collect(),
        source: mesh.source.clone(),
        ..Default::default()
    };
    for _ in 0..8 {
        let long = out.faces.iter().any(|f| {
            (0..3).any(|k| (out.spheres[f.v[k]].center - out.spheres[f.v[(k + 1) % 3]].center).norm() > max_edge)
        });
        if !long {
            break;
        }
        let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut faces = Vec::with_capacity(out.faces.len() * 4);
        for f in &out.faces {
            let m = [0, 1, 2].map(|k| {
                let (a, b) = (f.v[k], f.v[(k + 1) % 3]);
                *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let c = (out.spheres[a].center + out.spheres[b].center) / 2.0;
                    let r = index.closest(&c).dist;
                    out.spheres.push(Sphere { class: SphereClass::T2Sheet, ..Sphere::new(c, r) });
                    out.spheres.len() - 1
                })
            });
            let [a, b, c] = f.v;
            for v in [[a, m[0], m[2]], [m[0], b, m[1]], [m[2], m[1], c], [m[0], m[1], m[2]]] {
                faces.push(MedialFace { v, valid: true, sheet: f.sheet });
            }
        }
        let mut edges: BTreeSet<(usize, usize)> = out
            .edges
            .iter()
            .filter(|e| !mid.contains_key(&(e.v[0].min(e.v[1]), e.v[0].max(e.v[1]))))
            .map(|e| (e.v[0].min(e.v[1]), e.v[0].max(e.v[1])))
            .collect();
        for (&(a, b), &m) in &mid {
            edges.insert((a.min(m), a.max(m)));
            edges.insert((b.min(m), b.max(m)));
        }
        for f in &faces {
            for k in 0..3 {
                let (a, b) = (f.v[k], f.v[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        out.edges = edges.into_iter().map(|(a, b)| MedialEdge { v: [a, b], valid: true }).collect();
        out.faces = faces;
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MserReport {
    pub mser: f64,
    /// Seam and junction spheres evaluated.
    pub total: usize,
    pub misclassified: usize,
    /// Sheet spheres without a second tangent.
    pub spikes: usize,
    /// Indices of misclassified spheres.
    pub wrong: Vec<usize>,
}

/// Fraction of T3/T4 spheres whose tangent count, gathered from neighboring
/// sheet spheres of the mesh subdivided to edges of at most `2 sigma`, is
/// below 3 (seams) or 4 (junctions), or does not exceed every neighbor's.
pub fn mser(mesh: &MedialMesh, index: &SurfaceIndex, sigma: f64, angle: f64) -> MserReport {
    let n0 = mesh.spheres.len();
    let sub = subdivide(mesh, 2.0 * sigma, index);
    let adj = sub.adjacency();
    let targets: Vec<usize> = (0..n0)
        .filter(|&i| matches!(mesh.spheres[i].class, SphereClass::T3Seam | SphereClass::T4Junction))
        .collect();
    let is_sheet = |i: usize| i >= n0 || mesh.spheres[i].class == SphereClass::T2Sheet;
    let sheet_needed: BTreeSet<usize> = targets
        .iter()
        .flat_map(|&i| adj[i].iter().copied())
        .chain((0..n0).filter(|&i| mesh.spheres[i].class == SphereClass::T2Sheet))
        .filter(|&j| is_sheet(j))
        .collect();
    let needed: Vec<usize> = sheet_needed.into_iter().collect();
    let found: Vec<TangentSearch> = needed
        .par_iter()
        .map(|&j| recover_second_tangent(&sub.spheres[j], index, angle))
        .collect();
    let tangents: BTreeMap<usize, &TangentSearch> = needed.iter().copied().zip(found.iter()).collect();
    let spikes = (0..n0).filter(|i| tangents.get(i).is_some_and(|t| t.spike)).count();

    let verdicts: Vec<(usize, bool)> = targets
        .par_iter()
        .map(|&i| {
            let s = &sub.spheres[i];
            let nbs: Vec<usize> = adj[i].iter().copied().filter(|&j| is_sheet(j)).collect();
            let pts: Vec<SurfacePoint> = nbs.iter().flat_map(|j| tangents[j].tangents.iter().copied()).collect();
            let count = tangent_count(s, &pts, index, angle);
            let nb_max = nbs.iter().map(|j| tangents[j].tangents.len()).max().unwrap_or(0);
            let need = if s.class == SphereClass::T4Junction { 4 } else { 3 };
            (i, count >= need && count > nb_max)
        })
        .collect();
    let wrong: Vec<usize> = verdicts.iter().filter(|v| !v.1).map(|v| v.0).collect();
    let total = targets.len();
    MserReport {
        mser: if total == 0 { 0.0 } else { wrong.len() as f64 / total as f64 },
        total,
        misclassified: wrong.len(),
        spikes,
        wrong,
    }
}

/// Cluster tangent points by patch and normal, then count clusters whose
/// closest point to the sphere is within the shift reach of its radius.
fn tangent_count(s: &Sphere, pts: &[SurfacePoint], index: &SurfaceIndex, angle: f64) -> usize {
    let n = pts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in 0..i {
            if index.patch(pts[i].tri) == index.patch(pts[j].tri) && angle_between(&pts[i].normal, &pts[j].normal) < angle {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(pts[i].tri);
    }
    let reach = SHIFTS as f64 * SHIFT_FRACTION * s.radius + 1e-9 * index.bbox_diag();
    groups
        .values()
        .filter(|tris| {
            let region = index.one_ring(tris);
            index.closest_in(&s.center, &region).is_some_and(|h| h.dist - s.radius <= reach)
        })
        .count()
}
