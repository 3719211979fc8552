use std::collections::{BTreeMap, BTreeSet};

use crate::metrics::face_quality;
use crate::rpd::MedialMesh;

fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
    t.sort_unstable();
    t
}

/// Sphere quadruples whose four triangles are all valid faces.
pub fn pockets(mesh: &MedialMesh) -> Vec<[usize; 4]> {
    let faces: BTreeSet<[usize; 3]> = mesh.valid_faces().map(|f| sorted3(f.v)).collect();
    let adj = mesh.adjacency();
    let mut out = BTreeSet::new();
    for &[a, b, c] in &faces {
        for &d in &adj[a] {
            if d == b || d == c {
                continue;
            }
            if faces.contains(&sorted3([a, b, d])) && faces.contains(&sorted3([a, c, d])) && faces.contains(&sorted3([b, c, d])) {
                let mut q = [a, b, c, d];
                q.sort_unstable();
                out.insert(q);
            }
        }
    }
    out.into_iter().collect()
}

/// Open every closed pocket by removing one face, preferring faces that bound
/// a single pocket and, among those, the one of lowest quality. Returns the
/// number of faces removed.
pub fn enforce_thinness(mesh: &mut MedialMesh) -> usize {
    let mut removed = 0;
    loop {
        let ps = pockets(mesh);
        if ps.is_empty() {
            return removed;
        }
        let mut count: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for q in &ps {
            for skip in 0..4 {
                let t: Vec<usize> = (0..4).filter(|&k| k != skip).map(|k| q[k]).collect();
                *count.entry([t[0], t[1], t[2]]).or_default() += 1;
            }
        }
        let index: BTreeMap<[usize; 3], usize> = mesh
            .faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.valid)
            .map(|(k, f)| (sorted3(f.v), k))
            .collect();
        let quality = |t: &[usize; 3]| {
            let [a, b, c] = t.map(|i| mesh.spheres[i].center);
            face_quality(&a, &b, &c)
        };
        let pick = count
            .iter()
            .min_by(|(ta, ca), (tb, cb)| {
                let fa = usize::from(**ca > 1);
                let fb = usize::from(**cb > 1);
                fa.cmp(&fb).then(quality(ta).total_cmp(&quality(tb))).then(ta.cmp(tb))
            })
            .map(|(t, _)| *t)
            .expect("pockets have faces");
        mesh.faces[index[&pick]].valid = false;
        removed += 1;
    }
}
