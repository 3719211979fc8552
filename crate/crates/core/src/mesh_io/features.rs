use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{components, Polyline, TetDomain};
use crate::error::{MedialError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    Smooth,
    Convex,
    Concave,
}

/// Flag boundary edges whose interior dihedral angle deviates from flat by
/// more than `phi`, mark corners, chain feature polylines and split the
/// surface into patches bounded by convex-sharp edges.
///
/// `manual` lists extra vertex pairs to treat as sharp regardless of angle.
/// `phi <= 0` disables angle-based detection.
pub fn detect_features(domain: &TetDomain, phi: f64, manual: &[[usize; 2]]) -> TetDomain {
    use std::f64::consts::PI;
    let mut d = domain.clone();
    for e in d.edges.iter_mut() {
        e.kind = if phi > 0.0 && e.dihedral < PI - phi {
            FeatureKind::Convex
        } else if phi > 0.0 && e.dihedral > PI + phi {
            FeatureKind::Concave
        } else {
            FeatureKind::Smooth
        };
    }
    for &[a, b] in manual {
        if let Some(e) = d.edge_between(a, b) {
            let edge = &mut d.edges[e];
            edge.kind = if edge.dihedral > PI { FeatureKind::Concave } else { FeatureKind::Convex };
        } else {
            log::warn!("manual feature edge ({a}, {b}) is not a boundary edge; ignored");
        }
    }
    d.feature_edges = (0..d.edges.len()).filter(|&e| d.edges[e].kind != FeatureKind::Smooth).collect();

    let mut valence: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in &d.feature_edges {
        if d.edges[e].kind == FeatureKind::Convex {
            for v in d.edges[e].v {
                *valence.entry(v).or_default() += 1;
            }
        }
    }
    d.feature_corners = valence.iter().filter(|(_, &c)| c != 2).map(|(&v, _)| v).collect();
    d.polylines = chain(&d, FeatureKind::Convex);
    d.polylines.extend(chain(&d, FeatureKind::Concave));
    d.tri_patch = components(d.boundary_tris.len(), &d.edges, |e| e.kind != FeatureKind::Convex);
    d
}

/// Split the feature edges of one kind into maximal chains through valence-2 vertices.
fn chain(d: &TetDomain, kind: FeatureKind) -> Vec<Polyline> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &e in &d.feature_edges {
        if d.edges[e].kind == kind {
            let [a, b] = d.edges[e].v;
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
    }
    let mut used = std::collections::HashSet::new();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut out = Vec::new();
    let walk = |start: usize, first: usize, used: &mut std::collections::HashSet<(usize, usize)>| {
        let mut verts = vec![start, first];
        used.insert(key(start, first));
        let mut cur = first;
        while adj[&cur].len() == 2 && cur != start {
            let next = adj[&cur].iter().copied().find(|&n| !used.contains(&key(cur, n)));
            match next {
                Some(n) => {
                    used.insert(key(cur, n));
                    verts.push(n);
                    cur = n;
                }
                None => break,
            }
        }
        verts
    };
    for (&v, nbrs) in &adj {
        if nbrs.len() == 2 {
            continue;
        }
        for &n in nbrs {
            if !used.contains(&key(v, n)) {
                let verts = walk(v, n, &mut used);
                out.push(Polyline { verts, closed: false, kind });
            }
        }
    }
    // Whatever remains consists of closed loops.
    for (&v, nbrs) in &adj {
        for &n in nbrs {
            if !used.contains(&key(v, n)) {
                let mut verts = walk(v, n, &mut used);
                if verts.last() == Some(&v) {
                    verts.pop();
                }
                out.push(Polyline { verts, closed: true, kind });
            }
        }
    }
    out
}

/// Parse a sidecar of manually marked sharp edges: one `a b` vertex pair per
/// line (0-based), `#` starts a comment.
pub fn parse_manual_edges(text: &str) -> Result<Vec<[usize; 2]>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| MedialError::Parse { line: i + 1, msg: e.to_string() })?;
        if nums.len() != 2 {
            return Err(MedialError::Parse { line: i + 1, msg: "expected two vertex indices".into() });
        }
        out.push([nums[0], nums[1]]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geom::Vec3;
    use std::f64::consts::PI;

    /// Brute-force dihedral from scratch: the angle between the two half-planes
    /// measured through the solid, via a probe point just inside each face.
    fn brute_dihedral(d: &TetDomain, e: usize) -> f64 {
        let edge = &d.edges[e];
        let (a, b) = (d.vertices[edge.v[0]], d.vertices[edge.v[1]]);
        let axis = (b - a).normalize();
        let dirs: Vec<Vec3> = edge
            .tris
            .iter()
            .map(|&t| {
                let opp = d.boundary_tris[t].iter().copied().find(|v| !edge.v.contains(v)).unwrap();
                let w = d.vertices[opp] - a;
                (w - axis * axis.dot(&w)).normalize()
            })
            .collect();
        let open = dirs[0].dot(&dirs[1]).clamp(-1.0, 1.0).acos();
        // Probe the bisector of the two half-planes; inside the solid means the
        // interior angle is the smaller one.
        let mid = a + (b - a) * 0.5 + (dirs[0] + dirs[1]).normalize() * 1e-6;
        let inside = d
            .tets
            .iter()
            .enumerate()
            .any(|(t, _)| point_in_tet(&d.tet_points(t), &mid));
        if inside {
            open
        } else {
            2.0 * PI - open
        }
    }

    fn point_in_tet(p: &[Vec3; 4], x: &Vec3) -> bool {
        use crate::geom::tet_volume;
        let v = tet_volume(&p[0], &p[1], &p[2], &p[3]);
        let l = [
            tet_volume(x, &p[1], &p[2], &p[3]),
            tet_volume(&p[0], x, &p[2], &p[3]),
            tet_volume(&p[0], &p[1], x, &p[3]),
            tet_volume(&p[0], &p[1], &p[2], x),
        ];
        l.iter().all(|&li| li / v >= -1e-12)
    }

    #[test]
    fn cube_has_twelve_convex_edges_and_eight_corners() {
        let d = fixtures::box_mesh(Vec3::repeat(1000.0), [1, 1, 1]);
        for e in 0..d.edges.len() {
            assert!((d.edges[e].dihedral - brute_dihedral(&d, e)).abs() < 1e-9, "edge {e}");
        }
        let d = detect_features(&d, 30f64.to_radians(), &[]);
        assert_eq!(d.edges.len(), 18);
        assert_eq!(d.feature_edges.len(), 12);
        assert!(d.feature_edges.iter().all(|&e| d.edges[e].kind == FeatureKind::Convex));
        assert_eq!(d.feature_corners.len(), 8);
        assert_eq!(d.polylines.len(), 12);
        assert_eq!(*d.tri_patch.iter().max().unwrap(), 5);
    }

    #[test]
    fn refined_ball_has_no_features() {
        let d = fixtures::ball(500.0, 4);
        let d = detect_features(&d, 30f64.to_radians(), &[]);
        assert!(d.feature_edges.is_empty());
        assert!(d.feature_corners.is_empty());
    }

    #[test]
    fn l_shape_has_one_concave_chain() {
        let d = fixtures::l_shape(1000.0, 500.0, 3);
        for e in 0..d.edges.len() {
            assert!((d.edges[e].dihedral - brute_dihedral(&d, e)).abs() < 1e-9, "edge {e}");
        }
        let d = detect_features(&d, 30f64.to_radians(), &[]);
        let concave: Vec<_> = d.polylines.iter().filter(|p| p.kind == FeatureKind::Concave).collect();
        assert_eq!(concave.len(), 1);
        assert!(!concave[0].closed);
        for &e in &d.feature_edges {
            if d.edges[e].kind == FeatureKind::Concave {
                assert!((d.edges[e].dihedral - 1.5 * PI).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_phi_disables_detection() {
        let d = fixtures::box_mesh(Vec3::repeat(1.0), [1, 1, 1]);
        let d = detect_features(&d, 0.0, &[]);
        assert!(d.feature_edges.is_empty());
    }

    #[test]
    fn features_survive_reindexing() {
        let d = fixtures::box_mesh(Vec3::new(1000.0, 400.0, 300.0), [3, 2, 1]);
        let n = d.vertices.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        assert!(!n.is_multiple_of(7));
        let mut verts = vec![Vec3::zeros(); n];
        for i in 0..n {
            verts[perm[i]] = d.vertices[i];
        }
        let tets = d.tets.iter().map(|t| t.map(|v| perm[v])).collect();
        let r = TetDomain::from_parts(verts, tets).unwrap();
        let a = detect_features(&d, 0.5, &[]);
        let b = detect_features(&r, 0.5, &[]);
        let mut ea: Vec<_> = a.feature_edges.iter().map(|&e| {
            let [p, q] = a.edges[e].v.map(|v| perm[v]);
            (p.min(q), p.max(q))
        }).collect();
        let mut eb: Vec<_> = b.feature_edges.iter().map(|&e| (b.edges[e].v[0], b.edges[e].v[1])).collect();
        ea.sort_unstable();
        eb.sort_unstable();
        assert_eq!(ea, eb);
    }

    #[test]
    fn manual_sidecar_parses() {
        let e = parse_manual_edges("# sharp\n0 1\n 2 3 # trailing\n\n").unwrap();
        assert_eq!(e, vec![[0, 1], [2, 3]]);
        assert!(parse_manual_edges("0 1 2").is_err());
    }

    #[test]
    fn manual_edge_on_flat_face_is_flagged() {
        let d = fixtures::box_mesh(Vec3::repeat(1.0), [1, 1, 1]);
        let diag = d
            .edges
            .iter()
            .find(|e| (e.dihedral - PI).abs() < 1e-9)
            .map(|e| e.v)
            .unwrap();
        let f = detect_features(&d, 30f64.to_radians(), &[diag]);
        assert_eq!(f.feature_edges.len(), 13);
    }
}
