use crate::config::Config;
use crate::geom::{KdTree, SurfaceIndex, Vec3};
use crate::rpd::{clusters_linked, MedialMesh, Rpd, Sample, Sphere, SphereClass};
use crate::spheres::{cluster_regions, optimize_sphere_tangents};

/// Sub-volumes seen by the bisector face of `(a, b)` and both cells, with
/// linked clusters merged. Returns one surface region per sub-volume.
fn union_regions(rpd: &Rpd, a: usize, b: usize, radius: f64, angle: f64, index: &SurfaceIndex) -> Vec<Vec<usize>> {
    let mut groups: Vec<(&[Sample], &Vec<usize>)> = Vec::new();
    for i in [a, b] {
        let c = &rpd.cells[i];
        groups.extend(c.clusters.iter().map(|k| (c.samples.as_slice(), k)));
    }
    if let Some(f) = rpd.face(a, b) {
        groups.extend(f.clusters.iter().map(|k| (f.samples.as_slice(), k)));
    }
    let n = groups.len();
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
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj && clusters_linked(groups[i].0, groups[i].1, groups[j].0, groups[j].1, radius, angle, index) {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut merged: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for (i, (samples, cluster)) in groups.iter().enumerate() {
        let r = find(&mut parent, i);
        let region = cluster_regions(samples, std::slice::from_ref(*cluster), index).remove(0);
        merged.entry(r).or_default().extend(region);
    }
    merged
        .into_values()
        .map(|mut r| {
            r.sort_unstable();
            r.dedup();
            r
        })
        .collect()
}

/// New spheres for valid dual edges whose bisector face and endpoint cells
/// together see three or more sub-volumes while neither endpoint is a seam or
/// junction sphere and not both are pinned. Each starts at the edge midpoint
/// and is refined to be tangent to every one of those sub-volumes.
/// Candidates within `sigma / 2` of an existing or earlier inserted sphere
/// are skipped, and at most `insert_cap` of the sphere
/// count is added.
pub fn preserve_features(
    spheres: &[Sphere],
    rpd: &Rpd,
    dual: &MedialMesh,
    index: &SurfaceIndex,
    sigma: f64,
    cfg: &Config,
) -> Vec<Sphere> {
    let cap = (cfg.insert_cap * spheres.len() as f64).floor() as usize;
    if cap == 0 {
        return Vec::new();
    }
    let diag = index.bbox_diag();
    let centers: Vec<Vec3> = spheres.iter().map(|s| s.center).collect();
    let tree = KdTree::new(&centers);
    let mut out: Vec<Sphere> = Vec::new();
    let mut edges: Vec<(usize, usize)> = dual
        .valid_edges()
        .map(|e| {
            let (a, b) = (dual.source[e.v[0]], dual.source[e.v[1]]);
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    for (a, b) in edges {
        if out.len() >= cap {
            break;
        }
        let seamish = |c: SphereClass| matches!(c, SphereClass::T3Seam | SphereClass::T4Junction);
        if seamish(spheres[a].class) || seamish(spheres[b].class) || (spheres[a].pinned && spheres[b].pinned) {
            continue;
        }
        let radius = 0.5 * (spheres[a].radius + spheres[b].radius);
        let regions = union_regions(rpd, a, b, radius, cfg.cluster_angle(), index);
        if regions.len() < 3 {
            continue;
        }
        let mid = (spheres[a].center + spheres[b].center) / 2.0;
        let start = Sphere::new(mid, index.closest(&mid).dist);
        let t = optimize_sphere_tangents(&start, &regions, index, diag);
        if t.collapsed || !(t.residual <= 1e-3 * diag) || !index.is_inside(&t.sphere.center) {
            continue;
        }
        let c = t.sphere.center;
        let crowded = tree
            .knn(&c, 1, None)
            .first()
            .is_some_and(|&j| (centers[j] - c).norm() < 0.5 * sigma)
            || out.iter().any(|s| (s.center - c).norm() < 0.5 * sigma);
        if crowded {
            continue;
        }
        out.push(Sphere::new(c, index.closest(&c).dist));
    }
    out
}
