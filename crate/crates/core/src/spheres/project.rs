use serde::{Deserialize, Serialize};

use super::{assemble_sqem, optimize_sphere_tangents, shrink_sphere, solve_sqem, SqemCase};
use crate::config::Config;
use crate::geom::SurfaceIndex;
use crate::rpd::{Sample, Sphere, SphereClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProjectionMethod {
    Pinned,
    Sqem,
    Tangent,
    Shrink,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub sphere: Sphere,
    pub method: ProjectionMethod,
    pub case: Option<SqemCase>,
    /// Tangency residual of the refinement step, when it ran.
    pub residual: f64,
}

/// Surface region per cluster: the footpoint triangles of its samples and
/// their one-ring, kept to the patches the footpoints lie on.
pub fn cluster_regions(samples: &[Sample], clusters: &[Vec<usize>], index: &SurfaceIndex) -> Vec<Vec<usize>> {
    clusters
        .iter()
        .map(|c| {
            let mut tris: Vec<usize> = c.iter().map(|&k| samples[k].foot.tri).collect();
            tris.sort_unstable();
            tris.dedup();
            let mut patches: Vec<usize> = tris.iter().map(|&t| index.patch(t)).collect();
            patches.sort_unstable();
            patches.dedup();
            let mut ring = index.one_ring(&tris);
            ring.retain(|t| patches.binary_search(&index.patch(*t)).is_ok());
            ring
        })
        .collect()
}

/// Move `sphere` onto the medial axis using its cell samples and their
/// clusters: SQEM first, then tangent refinement over the cluster regions,
/// and shrinking from the largest cluster when either is unusable. The radius
/// ends as the exact distance to the surface.
pub fn project_sphere(
    sphere: &Sphere,
    samples: &[Sample],
    clusters: &[Vec<usize>],
    index: &SurfaceIndex,
    cfg: &Config,
) -> Projection {
    if sphere.pinned {
        return Projection { sphere: *sphere, method: ProjectionMethod::Pinned, case: None, residual: 0.0 };
    }
    let diag = index.bbox_diag();
    let sys = assemble_sqem(samples, cfg.tau_rank).ok();
    let case = sys.as_ref().map(|s| s.case);
    let mut out = Projection { sphere: *sphere, method: ProjectionMethod::Sqem, case, residual: f64::INFINITY };
    let mut ok = false;
    if let Some(sys) = sys.as_ref().filter(|s| s.case != SqemCase::Under) {
        if let Ok(s) = solve_sqem(sys, sphere) {
            out.sphere = s;
        }
        if clusters.len() >= 2 {
            let t = optimize_sphere_tangents(&out.sphere, &cluster_regions(samples, clusters, index), index, diag);
            out.sphere = t.sphere;
            out.residual = t.residual;
            out.method = ProjectionMethod::Tangent;
            ok = t.residual <= 1e-3 * diag;
        }
    }
    if ok {
        let h = index.closest(&out.sphere.center);
        ok = index.is_inside(&out.sphere.center) && h.dist > 0.0;
    }
    if !ok {
        out.method = ProjectionMethod::Shrink;
        let foot = clusters
            .first()
            .and_then(|c| {
                c.iter()
                    .min_by(|&&a, &&b| {
                        let da = (samples[a].x - sphere.center).norm_squared();
                        let db = (samples[b].x - sphere.center).norm_squared();
                        da.total_cmp(&db).then(a.cmp(&b))
                    })
                    .map(|&k| samples[k].foot)
            })
            .unwrap_or_else(|| index.closest(&sphere.center).point);
        let pin = index.surface_point_at(foot.tri, foot.position);
        let s = shrink_sphere(&pin, index, diag);
        out.sphere = Sphere { class: s.sphere.class, ..s.sphere };
    } else {
        out.sphere.class = SphereClass::Unknown;
    }
    out.sphere.pinned = false;
    out.sphere.radius = index.closest(&out.sphere.center).dist;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geom::Vec3;
    use crate::mesh_io::detect_features;
    use crate::rpd::{cluster_samples, compute_rpd, sample_rpd};

    fn setup(d: crate::TetDomain, spheres: &[Sphere]) -> (SurfaceIndex, Vec<Sample>, Vec<Vec<usize>>) {
        let d = detect_features(&d, 30f64.to_radians(), &[]);
        let index = SurfaceIndex::new(&d);
        let mut rpd = compute_rpd(&d, spheres);
        sample_rpd(&mut rpd, &index, &Config::default(), 1);
        let samples = rpd.cells[0].samples.clone();
        let cl = cluster_samples(&samples, spheres[0].radius.max(1.0), 30f64.to_radians(), &index);
        (index, samples, cl)
    }

    fn ring(c: Vec3, half: f64) -> Vec<Sphere> {
        let mut s = vec![Sphere::new(c, 10.0)];
        for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            s.push(Sphere::new(c + Vec3::new(dx, dy, 0.0) * 2.0 * half, 10.0));
        }
        s
    }

    #[test]
    fn drifted_sphere_returns_to_midplane() {
        let mut s = ring(Vec3::new(500.0, 500.0, 20.0), 100.0);
        s.push(Sphere::new(Vec3::new(500.0, 500.0, 100.0), 10.0));
        let (index, samples, cl) = setup(fixtures::slab(1000.0, 1000.0, 200.0, 4, 4, 1), &s);
        assert_eq!(cl.len(), 1);
        let p = project_sphere(&s[0], &samples, &cl, &index, &Config::default());
        assert_eq!(p.method, ProjectionMethod::Shrink);
        assert!((p.sphere.center.z - 100.0).abs() < 1e-6);
        assert!((p.sphere.radius - 100.0).abs() < 1e-6);
    }

    #[test]
    fn midplane_sphere_stays_on_midplane() {
        let s = ring(Vec3::new(500.0, 500.0, 130.0), 100.0);
        let (index, samples, cl) = setup(fixtures::slab(1000.0, 1000.0, 200.0, 4, 4, 1), &s);
        let p = project_sphere(&s[0], &samples, &cl, &index, &Config::default());
        assert_eq!(p.case, Some(SqemCase::Plane));
        assert_eq!(p.method, ProjectionMethod::Tangent);
        assert!((p.sphere.center.z - 100.0).abs() < 1e-3);
        assert!((p.sphere.radius - 100.0).abs() < 1e-3);
    }

    #[test]
    fn seam_sphere_lands_on_seam() {
        let c = Vec3::new(60.0, 65.0, 55.0);
        let mut s = vec![Sphere::new(c, 40.0)];
        for k in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut off = Vec3::zeros();
                off[k] = 30.0 * sign;
                s.push(Sphere::new(c + off, 40.0));
            }
        }
        let (index, samples, cl) = setup(fixtures::box_mesh(Vec3::new(1000.0, 250.0, 250.0), [8, 2, 2]), &s);
        assert_eq!(cl.len(), 3);
        let p = project_sphere(&s[0], &samples, &cl, &index, &Config::default());
        let q = p.sphere.center;
        assert!((q.x - q.y).abs() < 1e-3 && (q.y - q.z).abs() < 1e-3, "{q:?} {:?}", p.method);
        assert!((p.sphere.radius - q.x).abs() < 1e-3);
    }

    #[test]
    fn pinned_unchanged() {
        let d = fixtures::box_mesh(Vec3::repeat(1000.0), [1, 1, 1]);
        let index = SurfaceIndex::new(&d);
        let s = Sphere::pinned(Vec3::zeros(), SphereClass::T1Corner);
        let p = project_sphere(&s, &[], &[], &index, &Config::default());
        assert_eq!(p.sphere, s);
        assert_eq!(p.method, ProjectionMethod::Pinned);
    }
}
