use super::{PowerCell, Sample};
use crate::error::{MedialError, Result};
use crate::geom::SurfaceIndex;

/// Whether two samples see the same local sub-volume: their directions are
/// within `angle`, or their footpoints are within `delta` of each other on the
/// same patch (no convex-sharp edge between them).
pub fn linked(a: &Sample, b: &Sample, cos_angle: f64, delta: f64, index: &SurfaceIndex) -> bool {
    if a.n.dot(&b.n) > cos_angle {
        return true;
    }
    (a.foot.position - b.foot.position).norm() < delta && index.patch(a.foot.tri) == index.patch(b.foot.tri)
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

/// Footpoint separation below which two samples may join, for spheres of `radius`.
pub fn cluster_delta(radius: f64, angle: f64) -> f64 {
    2.0 * radius * (angle / 2.0).sin()
}

/// Group samples into sub-volume clusters by single linkage, largest first
/// (ties by smallest member).
pub fn cluster_samples(samples: &[Sample], radius: f64, angle: f64, index: &SurfaceIndex) -> Vec<Vec<usize>> {
    let n = samples.len();
    let cos_a = angle.cos();
    let delta = cluster_delta(radius, angle);
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj && linked(&samples[i], &samples[j], cos_a, delta, index) {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    out
}

/// Sub-volume clusters of a sampled cell.
pub fn subvolume_clusters(cell: &PowerCell, radius: f64, angle: f64, index: &SurfaceIndex) -> Result<Vec<Vec<usize>>> {
    if cell.samples.is_empty() {
        return Err(MedialError::NoSamples);
    }
    Ok(cluster_samples(&cell.samples, radius, angle, index))
}

/// Whether some sample of cluster `ca` (over `sa`) links to some sample of
/// cluster `cb` (over `sb`).
#[allow(clippy::too_many_arguments)]
pub fn clusters_linked(
    sa: &[Sample],
    ca: &[usize],
    sb: &[Sample],
    cb: &[usize],
    radius: f64,
    angle: f64,
    index: &SurfaceIndex,
) -> bool {
    let cos_a = angle.cos();
    let delta = cluster_delta(radius, angle);
    ca.iter()
        .any(|&i| cb.iter().any(|&j| linked(&sa[i], &sb[j], cos_a, delta, index)))
}
