//! Convex polyhedra clipped by half-spaces.

use std::collections::HashMap;

use super::{tet_volume, Vec3};

/// Origin of a polytope face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaceTag {
    /// Lies on the boundary surface, on the given boundary triangle.
    Boundary(usize),
    /// Bisector shared with the power cell of the given sphere.
    Bisector(usize),
    /// Interior face of a tetrahedron shared with a neighboring tet.
    Internal,
}

/// Oriented plane `n . x = d` with unit `n`; the kept side is `n . x <= d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    pub n: Vec3,
    pub d: f64,
    pub tag: FaceTag,
}

impl Plane {
    pub fn new(n: Vec3, d: f64, tag: FaceTag) -> Self {
        let l = n.norm();
        Self { n: n / l, d: d / l, tag }
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        self.n.dot(x) - self.d
    }

    pub fn flipped(&self, tag: FaceTag) -> Self {
        Self { n: -self.n, d: -self.d, tag }
    }
}

/// A face as a counter-clockwise (seen from outside) loop of vertex indices.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFace {
    pub verts: Vec<usize>,
    pub tag: FaceTag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexCellPiece {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<PolyFace>,
    pub source_tet: usize,
}

impl ConvexCellPiece {
    /// A tetrahedron with outward faces; `tags[k]` is the tag of the face
    /// opposite corner `k`.
    pub fn from_tet(p: [Vec3; 4], tags: [FaceTag; 4], source_tet: usize) -> Self {
        let faces = crate::mesh_io::TET_FACES
            .iter()
            .zip(tags)
            .map(|(f, tag)| PolyFace { verts: f.to_vec(), tag })
            .collect();
        Self { vertices: p.to_vec(), faces, source_tet }
    }

    pub fn centroid_estimate(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }

    /// Fan decomposition into tetrahedra `(apex, a, b, c)` of positive volume.
    pub fn tets(&self) -> Vec<[Vec3; 4]> {
        let apex = self.centroid_estimate();
        let mut out = Vec::new();
        for f in &self.faces {
            let v0 = self.vertices[f.verts[0]];
            for w in f.verts[1..].windows(2) {
                out.push([apex, v0, self.vertices[w[0]], self.vertices[w[1]]]);
            }
        }
        out
    }

    pub fn volume(&self) -> f64 {
        self.tets().iter().map(|t| tet_volume(&t[0], &t[1], &t[2], &t[3])).sum()
    }

    /// Volume-weighted centroid.
    pub fn centroid(&self) -> Vec3 {
        let mut acc = Vec3::zeros();
        let mut vol = 0.0;
        for t in self.tets() {
            let v = tet_volume(&t[0], &t[1], &t[2], &t[3]);
            acc += (t[0] + t[1] + t[2] + t[3]) * (v / 4.0);
            vol += v;
        }
        if vol > 0.0 {
            acc / vol
        } else {
            self.centroid_estimate()
        }
    }

    pub fn face_points(&self, f: usize) -> Vec<Vec3> {
        self.faces[f].verts.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn face_area(&self, f: usize) -> f64 {
        polygon_area(&self.face_points(f))
    }

    /// Largest signed distance of any vertex past any face plane; zero or
    /// negative for a convex piece.
    pub fn convexity_violation(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for f in 0..self.faces.len() {
            let pts = self.face_points(f);
            let n = polygon_normal(&pts);
            if n.norm() == 0.0 {
                continue;
            }
            let c = pts.iter().sum::<Vec3>() / pts.len() as f64;
            for v in &self.vertices {
                worst = worst.max(n.dot(&(v - c)));
            }
        }
        worst
    }
}

/// Unit normal of a planar polygon by Newell's method.
pub fn polygon_normal(pts: &[Vec3]) -> Vec3 {
    let mut n = Vec3::zeros();
    for i in 0..pts.len() {
        let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
        n += a.cross(&b);
    }
    let l = n.norm();
    if l > 0.0 {
        n / l
    } else {
        n
    }
}

pub fn polygon_area(pts: &[Vec3]) -> f64 {
    let mut n = Vec3::zeros();
    for w in pts[1..].windows(2) {
        n += (w[0] - pts[0]).cross(&(w[1] - pts[0]));
    }
    0.5 * n.norm()
}

/// Intersect `piece` with the half-space `plane.eval(x) <= 0`. Vertices within
/// `eps` of the plane are snapped onto it. Returns `None` when nothing of
/// positive extent remains.
pub fn clip_convex(piece: &ConvexCellPiece, plane: &Plane, eps: f64) -> Option<ConvexCellPiece> {
    let s: Vec<f64> = piece
        .vertices
        .iter()
        .map(|v| {
            let d = plane.eval(v);
            if d.abs() <= eps {
                0.0
            } else {
                d
            }
        })
        .collect();
    if s.iter().all(|&d| d <= 0.0) {
        return Some(piece.clone());
    }
    if s.iter().all(|&d| d >= 0.0) {
        return None;
    }

    let mut verts: Vec<Vec3> = Vec::with_capacity(piece.vertices.len() + 4);
    let mut remap = vec![usize::MAX; piece.vertices.len()];
    let mut on_plane: Vec<usize> = Vec::new();
    for (i, v) in piece.vertices.iter().enumerate() {
        if s[i] <= 0.0 {
            remap[i] = verts.len();
            if s[i] == 0.0 {
                on_plane.push(verts.len());
            }
            verts.push(*v);
        }
    }
    let mut cut: HashMap<(usize, usize), usize> = HashMap::new();
    let mut faces = Vec::with_capacity(piece.faces.len() + 1);
    for f in &piece.faces {
        let mut loop_ = Vec::with_capacity(f.verts.len() + 1);
        for k in 0..f.verts.len() {
            let a = f.verts[k];
            let b = f.verts[(k + 1) % f.verts.len()];
            if s[a] <= 0.0 {
                loop_.push(remap[a]);
            }
            if (s[a] < 0.0 && s[b] > 0.0) || (s[a] > 0.0 && s[b] < 0.0) {
                let key = (a.min(b), a.max(b));
                let id = *cut.entry(key).or_insert_with(|| {
                    // Interpolate from the lower index so both faces sharing the
                    // edge get the identical point.
                    let (p, q) = (key.0, key.1);
                    let t = s[p] / (s[p] - s[q]);
                    let x = piece.vertices[p] + (piece.vertices[q] - piece.vertices[p]) * t;
                    verts.push(x);
                    on_plane.push(verts.len() - 1);
                    verts.len() - 1
                });
                loop_.push(id);
            }
        }
        if loop_.len() >= 3 {
            faces.push(PolyFace { verts: loop_, tag: f.tag });
        }
    }

    if on_plane.len() >= 3 {
        let c = on_plane.iter().map(|&i| verts[i]).sum::<Vec3>() / on_plane.len() as f64;
        let u = super::any_orthogonal(&plane.n);
        let w = plane.n.cross(&u);
        let mut keyed: Vec<(f64, usize)> = on_plane
            .iter()
            .map(|&i| {
                let r = verts[i] - c;
                (r.dot(&w).atan2(r.dot(&u)), i)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        faces.push(PolyFace { verts: keyed.into_iter().map(|(_, i)| i).collect(), tag: plane.tag });
    }

    // Compact away vertices no face references.
    let mut used = vec![usize::MAX; verts.len()];
    let mut out_verts = Vec::with_capacity(verts.len());
    for f in faces.iter_mut() {
        for v in f.verts.iter_mut() {
            if used[*v] == usize::MAX {
                used[*v] = out_verts.len();
                out_verts.push(verts[*v]);
            }
            *v = used[*v];
        }
    }
    if faces.len() < 4 {
        return None;
    }
    Some(ConvexCellPiece { vertices: out_verts, faces, source_tet: piece.source_tet })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_cube() -> ConvexCellPiece {
        let v: Vec<Vec3> = (0..8)
            .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        let quads = [
            [0, 2, 3, 1], // z = 0
            [4, 5, 7, 6], // z = 1
            [0, 1, 5, 4], // y = 0
            [2, 6, 7, 3], // y = 1
            [0, 4, 6, 2], // x = 0
            [1, 3, 7, 5], // x = 1
        ];
        ConvexCellPiece {
            vertices: v,
            faces: quads.iter().map(|q| PolyFace { verts: q.to_vec(), tag: FaceTag::Internal }).collect(),
            source_tet: 0,
        }
    }

    #[test]
    fn cube_volume_and_half_clip() {
        let c = unit_cube();
        assert!((c.volume() - 1.0).abs() < 1e-15);
        let h = clip_convex(&c, &Plane::new(Vec3::x(), 0.5, FaceTag::Bisector(3)), 1e-12).unwrap();
        assert!((h.volume() - 0.5).abs() < 1e-15);
        assert_eq!(h.faces.len(), 6);
        assert_eq!(h.faces.iter().filter(|f| f.tag == FaceTag::Bisector(3)).count(), 1);
        assert!(h.convexity_violation() < 1e-12);
    }

    #[test]
    fn plane_outside_leaves_piece_unchanged() {
        let c = unit_cube();
        let h = clip_convex(&c, &Plane::new(Vec3::x(), 2.0, FaceTag::Internal), 1e-12).unwrap();
        assert_eq!(h, c);
        assert!(clip_convex(&c, &Plane::new(Vec3::x(), -0.5, FaceTag::Internal), 1e-12).is_none());
        // Touching along a face keeps everything.
        assert_eq!(clip_convex(&c, &Plane::new(Vec3::x(), 1.0, FaceTag::Internal), 1e-12).unwrap(), c);
    }

    #[test]
    fn corner_cut_matches_closed_form() {
        let c = unit_cube();
        // x + y + z <= 0.5 leaves the corner tet with volume 0.5^3 / 6.
        let h = clip_convex(&c, &Plane::new(Vec3::repeat(1.0), 0.5, FaceTag::Internal), 1e-12).unwrap();
        assert!((h.volume() - 0.125 / 6.0).abs() < 1e-15);
        // Through a vertex: x + y + z <= 1 gives 1/6.
        let h = clip_convex(&c, &Plane::new(Vec3::repeat(1.0), 1.0, FaceTag::Internal), 1e-12).unwrap();
        assert!((h.volume() - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn random_clips_match_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut piece = unit_cube();
        let mut planes = Vec::new();
        let mut last = piece.volume();
        for _ in 0..100 {
            let n = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let p = Plane::new(n, n.dot(&Vec3::repeat(0.5)) + 0.45 * n.norm(), FaceTag::Internal);
            let Some(next) = clip_convex(&piece, &p, 1e-12) else { break };
            let v = next.volume();
            assert!(v <= last + 1e-12);
            assert!(next.convexity_violation() < 1e-9);
            last = v;
            piece = next;
            planes.push(p);
        }
        let n = 400_000;
        let hits = (0..n)
            .filter(|_| {
                let x = Vec3::new(rng.gen(), rng.gen(), rng.gen());
                planes.iter().all(|p| p.eval(&x) <= 0.0)
            })
            .count();
        let mc = hits as f64 / n as f64;
        assert!(mc > 0.01, "degenerate test setup");
        assert!((piece.volume() - mc).abs() / mc < 0.01, "{} vs {}", piece.volume(), mc);
    }

    proptest! {
        #[test]
        fn clip_halves_add_up(nx in -1.0f64..1.0, ny in -1.0f64..1.0, nz in -1.0f64..1.0, d in -0.5f64..1.5) {
            let n = Vec3::new(nx, ny, nz);
            prop_assume!(n.norm() > 1e-3);
            let c = unit_cube();
            let p = Plane::new(n, d * n.norm(), FaceTag::Internal);
            let a = clip_convex(&c, &p, 1e-12).map_or(0.0, |x| x.volume());
            let b = clip_convex(&c, &p.flipped(FaceTag::Internal), 1e-12).map_or(0.0, |x| x.volume());
            prop_assert!((a + b - 1.0).abs() < 1e-9);
        }
    }
}
