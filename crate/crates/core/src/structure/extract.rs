use std::collections::{BTreeMap, BTreeSet};

use crate::rpd::{MedialMesh, Seam, SphereClass};

fn seam_node(c: SphereClass) -> bool {
    c.is_seam_like()
}

/// Label sheets, seams and junctions in place.
///
/// Seams are maximal chains of valid edges between T3, T4 and corner spheres,
/// split at junctions: T4 spheres and seam nodes meeting three or more seam
/// edges. Sheets are the components of valid faces glued across shared valid
/// edges that are not seam edges.
pub fn extract_structure(mesh: &mut MedialMesh) {
    let n = mesh.spheres.len();
    let mut seam_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut seam_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for e in mesh.valid_edges() {
        let [a, b] = e.v;
        if seam_node(mesh.spheres[a].class) && seam_node(mesh.spheres[b].class) {
            seam_adj[a].push(b);
            seam_adj[b].push(a);
            seam_edges.insert((a.min(b), a.max(b)));
        }
    }
    for l in seam_adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let is_junction =
        |i: usize| mesh.spheres[i].class == SphereClass::T4Junction || seam_adj[i].len() >= 3;
    mesh.junctions = (0..n).filter(|&i| is_junction(i)).collect();

    // Chains start at nodes that are not interior chain points.
    let interior = |i: usize| seam_adj[i].len() == 2 && !is_junction(i);
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut seams = Vec::new();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    for start in 0..n {
        if interior(start) {
            continue;
        }
        for &next in &seam_adj[start] {
            if used.contains(&key(start, next)) {
                continue;
            }
            let mut chain = vec![start];
            let (mut prev, mut cur) = (start, next);
            used.insert(key(prev, cur));
            loop {
                chain.push(cur);
                if !interior(cur) {
                    break;
                }
                let nx = seam_adj[cur].iter().copied().find(|&x| x != prev).unwrap();
                if used.contains(&key(cur, nx)) {
                    break;
                }
                used.insert(key(cur, nx));
                prev = cur;
                cur = nx;
            }
            seams.push(Seam { spheres: chain, closed: false });
        }
    }
    // What is left are cycles of interior nodes.
    for start in 0..n {
        for &next in &seam_adj[start] {
            if used.contains(&key(start, next)) {
                continue;
            }
            let mut chain = vec![start];
            let (mut prev, mut cur) = (start, next);
            used.insert(key(prev, cur));
            while cur != start {
                chain.push(cur);
                let nx = seam_adj[cur].iter().copied().find(|&x| x != prev).unwrap();
                used.insert(key(cur, nx));
                prev = cur;
                cur = nx;
            }
            seams.push(Seam { spheres: chain, closed: true });
        }
    }
    mesh.seams = seams;

    // Sheets: union faces across shared non-seam edges.
    let mut by_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, f) in mesh.faces.iter().enumerate() {
        if !f.valid {
            continue;
        }
        for t in 0..3 {
            let (a, b) = (f.v[t], f.v[(t + 1) % 3]);
            by_edge.entry(key(a, b)).or_default().push(k);
        }
    }
    let mut parent: Vec<usize> = (0..mesh.faces.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (e, fs) in &by_edge {
        if seam_edges.contains(e) {
            continue;
        }
        for w in fs.windows(2) {
            let (ra, rb) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    for k in 0..mesh.faces.len() {
        if mesh.faces[k].valid {
            let r = find(&mut parent, k);
            let next = ids.len();
            mesh.faces[k].sheet = Some(*ids.entry(r).or_insert(next));
        } else {
            mesh.faces[k].sheet = None;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::rpd::{MedialEdge, MedialFace, Sphere};

    fn mesh(classes: &[SphereClass], edges: &[[usize; 2]], faces: &[[usize; 3]]) -> MedialMesh {
        MedialMesh {
            spheres: classes
                .iter()
                .enumerate()
                .map(|(i, &c)| Sphere { class: c, ..Sphere::new(Vec3::new(i as f64, 0.0, 0.0), 1.0) })
                .collect(),
            edges: edges.iter().map(|&v| MedialEdge { v, valid: true }).collect(),
            faces: faces.iter().map(|&v| MedialFace { v, valid: true, sheet: None }).collect(),
            source: (0..classes.len()).collect(),
            ..Default::default()
        }
    }

    use SphereClass::*;

    #[test]
    fn flat_sheet_has_no_seams() {
        let mut m = mesh(&[T2Sheet; 4], &[[0, 1], [1, 2], [0, 2], [1, 3], [2, 3]], &[[0, 1, 2], [1, 2, 3]]);
        extract_structure(&mut m);
        assert!(m.seams.is_empty() && m.junctions.is_empty());
        assert_eq!(m.sheet_count(), 1);
    }

    #[test]
    fn seam_splits_sheets() {
        // Three fins around the seam 0-1.
        let cls = [T3Seam, T3Seam, T2Sheet, T2Sheet, T2Sheet];
        let edges = [[0, 1], [0, 2], [1, 2], [0, 3], [1, 3], [0, 4], [1, 4]];
        let mut m = mesh(&cls, &edges, &[[0, 1, 2], [0, 1, 3], [0, 1, 4]]);
        extract_structure(&mut m);
        assert_eq!(m.seams, vec![Seam { spheres: vec![0, 1], closed: false }]);
        assert_eq!(m.sheet_count(), 3);
        assert!(m.faces.iter().all(|f| f.sheet.is_some()));
    }

    #[test]
    fn junction_splits_chains() {
        // Star of three seam arms meeting at node 0.
        let cls = [T3Seam, T3Seam, T3Seam, T3Seam, T3Seam];
        let mut m = mesh(&cls, &[[0, 1], [0, 2], [0, 3], [3, 4]], &[]);
        extract_structure(&mut m);
        assert_eq!(m.junctions, vec![0]);
        assert_eq!(m.seams.len(), 3);
        assert!(m.seams.iter().all(|s| s.spheres[0] == 0));
    }

    #[test]
    fn loop_is_closed() {
        let mut m = mesh(&[T3Seam; 4], &[[0, 1], [1, 2], [2, 3], [3, 0]], &[]);
        extract_structure(&mut m);
        assert_eq!(m.seams.len(), 1);
        assert!(m.seams[0].closed);
        assert_eq!(m.seams[0].spheres.len(), 4);
    }
}
