//! Exact closest-point queries against the boundary surface.

use serde::{Deserialize, Serialize};

use super::{closest_point_on_triangle, Aabb, Bvh, TriRegion, Vec3};
use crate::mesh_io::{FeatureKind, TetDomain};

/// A point on the boundary surface with its outward unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub position: Vec3,
    pub normal: Vec3,
    pub tri: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceHit {
    pub point: SurfacePoint,
    pub dist: f64,
    pub bary: [f64; 3],
    pub region: TriRegion,
}

/// Closest-point index over the boundary triangles of a domain.
#[derive(Clone, Debug)]
pub struct SurfaceIndex {
    tris: Vec<[Vec3; 3]>,
    tri_verts: Vec<[usize; 3]>,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
    edge_pn: Vec<[Vec3; 3]>,
    vertex_pn: Vec<Vec3>,
    smooth: Vec<[Vec3; 3]>,
    patch: Vec<usize>,
    vert_tris: Vec<Vec<usize>>,
    bvh: Bvh,
    diag: f64,
}

fn corner_angle(t: &[Vec3; 3], k: usize) -> f64 {
    super::angle_between(&(t[(k + 1) % 3] - t[k]), &(t[(k + 2) % 3] - t[k]))
}

impl SurfaceIndex {
    pub fn new(domain: &TetDomain) -> Self {
        let nt = domain.boundary_tris.len();
        let tris: Vec<[Vec3; 3]> = (0..nt).map(|f| domain.tri_points(f)).collect();
        let normals: Vec<Vec3> = (0..nt).map(|f| domain.tri_normal(f)).collect();
        let areas: Vec<f64> = tris
            .iter()
            .map(|t| super::triangle_area(&t[0], &t[1], &t[2]))
            .collect();

        let edge_pn = (0..nt)
            .map(|f| {
                let mut pn = [Vec3::zeros(); 3];
                for (k, slot) in pn.iter_mut().enumerate() {
                    let e = &domain.edges[domain.tri_edges[f][k]];
                    *slot = (normals[e.tris[0]] + normals[e.tris[1]]).normalize();
                }
                pn
            })
            .collect();

        let mut vertex_pn = vec![Vec3::zeros(); domain.vertices.len()];
        for (f, t) in domain.boundary_tris.iter().enumerate() {
            for k in 0..3 {
                vertex_pn[t[k]] += normals[f] * corner_angle(&tris[f], k);
            }
        }
        for v in vertex_pn.iter_mut() {
            if v.norm() > 0.0 {
                v.normalize_mut();
            }
        }

        // Vertex normals restricted to the triangle's own smooth region (bounded
        // by sharp edges of either kind), with Max's weights (exact when the
        // one-ring lies on a sphere).
        let region = crate::mesh_io::components(domain.boundary_tris.len(), &domain.edges, |e| e.kind == FeatureKind::Smooth);
        let mut acc: std::collections::HashMap<(usize, usize), Vec3> = std::collections::HashMap::new();
        for (f, t) in domain.boundary_tris.iter().enumerate() {
            let p = &tris[f];
            for k in 0..3 {
                let e1 = p[(k + 1) % 3] - p[k];
                let e2 = p[(k + 2) % 3] - p[k];
                let w = e1.cross(&e2) / (e1.norm_squared() * e2.norm_squared());
                *acc.entry((t[k], region[f])).or_insert_with(Vec3::zeros) += w;
            }
        }
        let smooth = domain
            .boundary_tris
            .iter()
            .enumerate()
            .map(|(f, t)| [0, 1, 2].map(|k| acc[&(t[k], region[f])].normalize()))
            .collect();

        let mut vert_tris = vec![Vec::new(); domain.vertices.len()];
        for (f, t) in domain.boundary_tris.iter().enumerate() {
            for &v in t {
                vert_tris[v].push(f);
            }
        }
        let boxes: Vec<Aabb> = tris.iter().map(|t| Aabb::from_points(t.iter())).collect();
        Self {
            bvh: Bvh::build(&boxes),
            tris,
            tri_verts: domain.boundary_tris.clone(),
            normals,
            areas,
            edge_pn,
            vertex_pn,
            smooth,
            patch: domain.tri_patch.clone(),
            vert_tris,
            diag: domain.bbox_diag,
        }
    }

    pub fn num_tris(&self) -> usize {
        self.tris.len()
    }

    pub fn tri(&self, f: usize) -> &[Vec3; 3] {
        &self.tris[f]
    }

    pub fn tri_verts(&self, f: usize) -> [usize; 3] {
        self.tri_verts[f]
    }

    pub fn tri_normal(&self, f: usize) -> Vec3 {
        self.normals[f]
    }

    pub fn tri_area(&self, f: usize) -> f64 {
        self.areas[f]
    }

    pub fn patch(&self, f: usize) -> usize {
        self.patch[f]
    }

    pub fn bbox_diag(&self) -> f64 {
        self.diag
    }

    /// `tris` plus every triangle sharing a vertex with one of them, sorted.
    pub fn one_ring(&self, tris: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = tris
            .iter()
            .flat_map(|&f| self.tri_verts[f].into_iter().flat_map(|v| self.vert_tris[v].iter().copied()))
            .chain(tris.iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn hit(&self, x: &Vec3, f: usize) -> SurfaceHit {
        let [a, b, c] = &self.tris[f];
        let (q, bary, region) = closest_point_on_triangle(x, a, b, c);
        SurfaceHit {
            point: SurfacePoint { position: q, normal: self.normals[f], tri: f },
            dist: (x - q).norm(),
            bary,
            region,
        }
    }

    /// Exact closest point on the surface; ties keep the lowest triangle index.
    pub fn closest(&self, x: &Vec3) -> SurfaceHit {
        let (f, _) = self
            .bvh
            .nearest(x, |f| {
                let [a, b, c] = &self.tris[f];
                (x - closest_point_on_triangle(x, a, b, c).0).norm_squared()
            })
            .expect("surface index is never empty");
        self.hit(x, f)
    }

    /// Closest point over the triangles accepted by `keep`.
    pub fn closest_where(&self, x: &Vec3, keep: impl Fn(usize) -> bool) -> Option<SurfaceHit> {
        self.bvh
            .nearest(x, |f| {
                if !keep(f) {
                    return f64::INFINITY;
                }
                let [a, b, c] = &self.tris[f];
                (x - closest_point_on_triangle(x, a, b, c).0).norm_squared()
            })
            .filter(|(_, d)| d.is_finite())
            .map(|(f, _)| self.hit(x, f))
    }

    /// Closest point over an explicit triangle set (linear scan).
    pub fn closest_in(&self, x: &Vec3, tris: &[usize]) -> Option<SurfaceHit> {
        let mut best: Option<SurfaceHit> = None;
        for &f in tris {
            let h = self.hit(x, f);
            if best.is_none_or(|b| h.dist < b.dist || (h.dist == b.dist && f < b.point.tri)) {
                best = Some(h);
            }
        }
        best
    }

    /// Pseudonormal of the feature a hit landed on; its sign against `x - q`
    /// decides inside/outside robustly at edges and vertices.
    pub fn pseudonormal(&self, hit: &SurfaceHit) -> Vec3 {
        let f = hit.point.tri;
        match hit.region {
            TriRegion::Face => self.normals[f],
            TriRegion::Edge(k) => self.edge_pn[f][k as usize],
            TriRegion::Vertex(k) => self.vertex_pn[self.tri_verts[f][k as usize]],
        }
    }

    /// Distance to the surface, negative inside the solid.
    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        let h = self.closest(x);
        if (x - h.point.position).dot(&self.pseudonormal(&h)) > 0.0 {
            h.dist
        } else {
            -h.dist
        }
    }

    pub fn is_inside(&self, x: &Vec3) -> bool {
        self.signed_distance(x) <= 0.0
    }

    /// Smooth outward normal at barycentric `bary` of triangle `f`,
    /// interpolated from patch-restricted vertex normals. Flat regions get the
    /// exact face normal and the normal never blends across a convex crease.
    pub fn smooth_normal(&self, f: usize, bary: [f64; 3]) -> Vec3 {
        let s = &self.smooth[f];
        let n = s[0] * bary[0] + s[1] * bary[1] + s[2] * bary[2];
        if n.norm() > 1e-12 {
            n.normalize()
        } else {
            self.normals[f]
        }
    }

    /// Surface point at `pos` on triangle `f` carrying the smooth normal.
    pub fn surface_point_at(&self, f: usize, pos: Vec3) -> SurfacePoint {
        let [a, b, c] = &self.tris[f];
        let (q, bary, _) = closest_point_on_triangle(&pos, a, b, c);
        SurfacePoint { position: q, normal: self.smooth_normal(f, bary), tri: f }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(index: &SurfaceIndex, x: &Vec3) -> (usize, f64) {
        (0..index.num_tris())
            .map(|f| {
                let [a, b, c] = index.tri(f);
                (f, (x - closest_point_on_triangle(x, a, b, c).0).norm())
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .unwrap()
    }

    #[test]
    fn cube_center_is_500_from_a_face_center() {
        let d = fixtures::box_mesh(Vec3::repeat(1000.0), [1, 1, 1]);
        let idx = SurfaceIndex::new(&d);
        let h = idx.closest(&Vec3::repeat(500.0));
        assert!((h.dist - 500.0).abs() < 1e-9);
        let p = h.point.position;
        let on_axis = (0..3).filter(|&k| (p[k] - 500.0).abs() < 1e-9).count();
        assert_eq!(on_axis, 2);
    }

    #[test]
    fn surface_point_is_its_own_closest() {
        let d = fixtures::ball(500.0, 2);
        let idx = SurfaceIndex::new(&d);
        let [a, b, c] = *idx.tri(17);
        let x = (a + b + c) / 3.0;
        let h = idx.closest(&x);
        assert!(h.dist < 1e-9);
        assert!((h.point.position - x).norm() < 1e-9);
    }

    #[test]
    fn random_queries_match_exhaustive_scan() {
        let d = fixtures::ball(500.0, 2);
        let idx = SurfaceIndex::new(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let x = Vec3::new(rng.gen_range(-700.0..700.0), rng.gen_range(-700.0..700.0), rng.gen_range(-700.0..700.0));
            let h = idx.closest(&x);
            let (_, dist) = brute(&idx, &x);
            assert!((h.dist - dist).abs() < 1e-9);
        }
    }

    #[test]
    fn inside_test_on_l_shape() {
        let d = fixtures::l_shape(1000.0, 500.0, 2);
        let idx = SurfaceIndex::new(&d);
        assert!(idx.is_inside(&Vec3::new(250.0, 250.0, 250.0)));
        assert!(!idx.is_inside(&Vec3::new(750.0, 750.0, 250.0)));
        assert!(!idx.is_inside(&Vec3::new(250.0, 250.0, -1.0)));
        assert!(idx.signed_distance(&Vec3::new(250.0, 250.0, 100.0)) < -99.0);
    }

    #[test]
    fn smooth_normal_is_face_normal_on_flat_patch() {
        let d = crate::mesh_io::detect_features(&fixtures::box_mesh(Vec3::repeat(1000.0), [2, 2, 2]), 0.5, &[]);
        let idx = SurfaceIndex::new(&d);
        for f in 0..idx.num_tris() {
            let n = idx.smooth_normal(f, [0.2, 0.3, 0.5]);
            assert!((n - idx.tri_normal(f)).norm() < 1e-12);
        }
    }

    #[test]
    fn smooth_normal_does_not_bend_around_concave_edges() {
        let d = crate::mesh_io::detect_features(&fixtures::l_shape(1000.0, 250.0, 2), 0.5, &[]);
        let idx = SurfaceIndex::new(&d);
        for f in 0..idx.num_tris() {
            let n = idx.smooth_normal(f, [0.2, 0.3, 0.5]);
            assert!((n - idx.tri_normal(f)).norm() < 1e-12, "triangle {f}: {n:?}");
        }
    }
}
