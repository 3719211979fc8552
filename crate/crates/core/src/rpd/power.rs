use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{BisectorFace, PowerCell, Rpd, Sphere};
use crate::geom::polytope::polygon_area;
use crate::geom::{clip_convex, ConvexCellPiece, FaceTag, KdTree, Plane, Vec3};
use crate::mesh_io::TetDomain;

/// Half-space `power_i(x) <= power_j(x)` as a plane tagged with `j`. The pair
/// is evaluated in canonical order so that the planes of `(i, j)` and `(j, i)`
/// are exact negations of each other.
pub fn bisector_plane(spheres: &[Sphere], i: usize, j: usize) -> Plane {
    let (lo, hi) = (i.min(j), i.max(j));
    let (a, b) = (&spheres[lo], &spheres[hi]);
    let n = (b.center - a.center) * 2.0;
    let d = b.center.norm_squared() - b.radius * b.radius - a.center.norm_squared() + a.radius * a.radius;
    let p = Plane::new(n, d, FaceTag::Bisector(hi));
    if i == lo {
        p
    } else {
        p.flipped(FaceTag::Bisector(lo))
    }
}

/// Spheres with the same center and radius as a lower-indexed one.
fn duplicates(spheres: &[Sphere], tree: &KdTree, eps: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, s) in spheres.iter().enumerate() {
        let near = tree.knn(&s.center, 8, Some(i));
        if near
            .iter()
            .any(|&j| j < i && (spheres[j].center - s.center).norm() <= eps && (spheres[j].radius - s.radius).abs() <= eps)
        {
            log::warn!("sphere {i} duplicates a lower-indexed sphere; dropped");
            out.push(i);
        }
    }
    out
}

/// Clip one tet into the power cells of every sphere that can reach it.
fn clip_tet(domain: &TetDomain, t: usize, spheres: &[Sphere], tree: &LiveTree, eps: f64) -> Vec<(usize, ConvexCellPiece)> {
    let p = domain.tet_points(t);
    let tags = [0, 1, 2, 3].map(|k| domain.tet_boundary[t][k].map_or(FaceTag::Internal, FaceTag::Boundary));
    let c = (p[0] + p[1] + p[2] + p[3]) / 4.0;
    let rho = p.iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
    let Some(i0) = tree.power_nearest(&c) else { return Vec::new() };
    // Any cell meeting the tet must beat sphere i0 somewhere in it.
    let bound = p.iter().map(|v| spheres[i0].power(v)).fold(f64::NEG_INFINITY, f64::max);
    let mut cands = Vec::new();
    tree.power_candidates(&c, rho, bound + eps * eps, &mut cands);

    let base = ConvexCellPiece::from_tet(p, tags, t);
    let mut out = Vec::new();
    let mut others: Vec<(f64, usize)> = Vec::with_capacity(cands.len());
    for &i in &cands {
        others.clear();
        others.extend(
            cands
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| ((spheres[j].center - spheres[i].center).norm_squared(), j)),
        );
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut piece = Some(base.clone());
        for &(_, j) in &others {
            let cur = piece.as_mut().unwrap();
            let plane = bisector_plane(spheres, i, j);
            if cur.vertices.iter().all(|v| plane.eval(v) <= eps) {
                // A bisector lying on a tet face never cuts; tag the face instead.
                for f in cur.faces.iter_mut() {
                    if f.tag == FaceTag::Internal && f.verts.iter().all(|&v| plane.eval(&cur.vertices[v]).abs() <= eps) {
                        f.tag = FaceTag::Bisector(j);
                    }
                }
                continue;
            }
            piece = clip_convex(cur, &plane, eps);
            if piece.is_none() {
                break;
            }
        }
        if let Some(pc) = piece {
            if pc.volume() > 0.0 {
                out.push((i, pc));
            }
        }
    }
    out
}

/// Restricted power diagram of `spheres` over the domain, cut tet by tet.
pub fn compute_rpd(domain: &TetDomain, spheres: &[Sphere]) -> Rpd {
    let eps = 1e-9 * domain.bbox_diag;
    let n = spheres.len();
    let centers: Vec<Vec3> = spheres.iter().map(|s| s.center).collect();
    let w: Vec<f64> = spheres.iter().map(|s| s.radius * s.radius).collect();
    let plain = KdTree::new(&centers);
    let dropped = duplicates(spheres, &plain, eps);
    let mut alive = vec![true; n];
    for &d in &dropped {
        alive[d] = false;
    }
    let ids: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    let live_centers: Vec<Vec3> = ids.iter().map(|&i| centers[i]).collect();
    let live_w: Vec<f64> = ids.iter().map(|&i| w[i]).collect();
    let tree = LiveTree { tree: KdTree::with_weights(&live_centers, &live_w), ids };

    let per_tet: Vec<Vec<(usize, ConvexCellPiece)>> = (0..domain.tets.len())
        .into_par_iter()
        .map(|t| clip_tet(domain, t, spheres, &tree, eps))
        .collect();

    let mut cells: Vec<PowerCell> = (0..n).map(|i| PowerCell { sphere: i, ..Default::default() }).collect();
    for list in per_tet {
        for (i, piece) in list {
            cells[i].pieces.push(piece);
        }
    }

    let mut faces: BTreeMap<(usize, usize), BisectorFace> = BTreeMap::new();
    for cell in cells.iter_mut() {
        let i = cell.sphere;
        let mut nb = std::collections::BTreeSet::new();
        let mut vol = 0.0;
        for piece in &cell.pieces {
            vol += piece.volume();
            for (f, face) in piece.faces.iter().enumerate() {
                match face.tag {
                    FaceTag::Boundary(_) => cell.touches_boundary = true,
                    FaceTag::Bisector(j) => {
                        let a = polygon_area(&piece.face_points(f));
                        if a <= 0.0 {
                            continue;
                        }
                        let key = (i.min(j), i.max(j));
                        let bf = faces.entry(key).or_insert_with(|| BisectorFace { i: key.0, j: key.1, ..Default::default() });
                        bf.area[usize::from(i > j)] += a;
                        nb.insert(j);
                    }
                    FaceTag::Internal => {}
                }
            }
        }
        cell.volume = vol;
        cell.neighbors = nb.into_iter().collect();
    }
    // A power edge of cells i, j, k is a piece edge of cell i lying on both
    // bisectors (i, j) and (i, k). Tested geometrically, since the edge may
    // run along a tet edge where no two bisector faces of one piece meet.
    let mut power_edges: BTreeMap<[usize; 3], f64> = BTreeMap::new();
    for cell in &cells {
        let i = cell.sphere;
        let planes: Vec<(usize, Plane)> = cell.neighbors.iter().map(|&j| (j, bisector_plane(spheres, i, j))).collect();
        let mut on = Vec::new();
        for piece in &cell.pieces {
            let mut seen = std::collections::BTreeSet::new();
            for face in &piece.faces {
                let vs = &face.verts;
                for k in 0..vs.len() {
                    let (a, b) = (vs[k], vs[(k + 1) % vs.len()]);
                    if !seen.insert((a.min(b), a.max(b))) {
                        continue;
                    }
                    let (pa, pb) = (piece.vertices[a], piece.vertices[b]);
                    let len = (pa - pb).norm();
                    if len <= eps {
                        continue;
                    }
                    on.clear();
                    on.extend(
                        planes
                            .iter()
                            .filter(|(_, p)| p.eval(&pa).abs() <= eps && p.eval(&pb).abs() <= eps)
                            .map(|(j, _)| *j),
                    );
                    for x in 0..on.len() {
                        for y in x + 1..on.len() {
                            let mut tri = [i, on[x], on[y]];
                            tri.sort_unstable();
                            let e = power_edges.entry(tri).or_insert(0.0);
                            *e = e.max(len);
                        }
                    }
                }
            }
        }
    }
    // Keep the polygons from the side that saw the larger area.
    for cell in &cells {
        let i = cell.sphere;
        for piece in &cell.pieces {
            for (f, face) in piece.faces.iter().enumerate() {
                if let FaceTag::Bisector(j) = face.tag {
                    let key = (i.min(j), i.max(j));
                    if let Some(bf) = faces.get_mut(&key) {
                        let side = usize::from(i > j);
                        let chosen = usize::from(bf.area[0] < bf.area[1]);
                        if side == chosen {
                            bf.polygons.push((piece.source_tet, piece.face_points(f)));
                        }
                    }
                }
            }
        }
    }
    Rpd { cells, faces, power_edges, dropped, eps }
}

/// A weighted kd-tree over the surviving spheres, answering in original indices.
struct LiveTree {
    tree: KdTree,
    ids: Vec<usize>,
}

impl LiveTree {
    fn power_nearest(&self, x: &Vec3) -> Option<usize> {
        self.tree.power_nearest(x).map(|k| self.ids[k])
    }

    fn power_candidates(&self, c: &Vec3, rho: f64, bound: f64, out: &mut Vec<usize>) {
        self.tree.power_candidates(c, rho, bound, out);
        for v in out.iter_mut() {
            *v = self.ids[*v];
        }
        out.sort_unstable();
    }
}
