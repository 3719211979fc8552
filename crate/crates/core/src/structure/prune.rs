use std::collections::HashSet;

use crate::geom::SurfaceIndex;
use crate::rpd::{clusters_linked, MedialMesh, Rpd, Sample};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PruneReport {
    pub edges_pruned: usize,
    pub faces_pruned: usize,
    /// Pruned edges by original sphere index.
    pub pruned: Vec<(usize, usize)>,
}

/// For each cell cluster, whether some face cluster links to it; `None`
/// when a face cluster links to no cell cluster.
fn reached(
    fs: &[Sample],
    fc: &[Vec<usize>],
    cs: &[Sample],
    cc: &[Vec<usize>],
    radius: f64,
    angle: f64,
    index: &SurfaceIndex,
) -> Option<Vec<bool>> {
    let mut reached = vec![false; cc.len()];
    for f in fc {
        let mut any = false;
        for (k, c) in cc.iter().enumerate() {
            if clusters_linked(fs, f, cs, c, radius, angle, index) {
                reached[k] = true;
                any = true;
            }
        }
        if !any {
            return None;
        }
    }
    Some(reached)
}

/// Whether the clusters of `fs` reach exactly the clusters of `cs`: each face
/// cluster links to some cell cluster and each cell cluster is reached.
pub fn cluster_sets_match(
    fs: &[Sample],
    fc: &[Vec<usize>],
    cs: &[Sample],
    cc: &[Vec<usize>],
    radius: f64,
    angle: f64,
    index: &SurfaceIndex,
) -> bool {
    reached(fs, fc, cs, cc, radius, angle, index).is_some_and(|r| r.iter().all(|&x| x))
}

/// Invalidate every edge whose bisector face sees different sub-volumes than
/// both endpoint cells, then every face with an invalid edge. A face that
/// sees two or more sub-volumes shared by both endpoints also keeps its edge:
/// it lies on the sheet common to two seam spheres. Faces of the diagram and
/// cells must carry samples and clusters.
pub fn prune_invalid(mesh: &mut MedialMesh, rpd: &Rpd, index: &SurfaceIndex, angle: f64) -> PruneReport {
    let mut report = PruneReport::default();
    let mut bad: HashSet<(usize, usize)> = HashSet::new();
    for e in mesh.edges.iter_mut().filter(|e| e.valid) {
        let (a, b) = (mesh.source[e.v[0]], mesh.source[e.v[1]]);
        let Some(face) = rpd.face(a, b) else { continue };
        if face.samples.is_empty() || face.clusters.is_empty() {
            continue;
        }
        let radius = [mesh.spheres[e.v[0]].radius, mesh.spheres[e.v[1]].radius];
        let r: Vec<Option<Vec<bool>>> = [a, b]
            .iter()
            .zip(radius)
            .map(|(&i, rad)| {
                let cell = &rpd.cells[i];
                if cell.clusters.is_empty() {
                    return None;
                }
                reached(&face.samples, &face.clusters, &cell.samples, &cell.clusters, rad, angle, index)
            })
            .collect();
        let same = r.iter().flatten().any(|x| x.iter().all(|&y| y));
        let shared = face.clusters.len() >= 2 && r.iter().all(|x| x.is_some());
        let ok = same || shared;
        if !ok {
            e.valid = false;
            report.edges_pruned += 1;
            report.pruned.push((a.min(b), a.max(b)));
            bad.insert((e.v[0].min(e.v[1]), e.v[0].max(e.v[1])));
        }
    }
    for f in mesh.faces.iter_mut().filter(|f| f.valid) {
        let [a, b, c] = f.v;
        if [(a, b), (b, c), (a, c)].iter().any(|&(x, y)| bad.contains(&(x.min(y), x.max(y)))) {
            f.valid = false;
            report.faces_pruned += 1;
        }
    }
    report
}
