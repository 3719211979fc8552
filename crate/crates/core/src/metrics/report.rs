use serde::{Deserialize, Serialize};

use super::{expected_euler, hausdorff, mser, quantile, ter, triangle_quality};
use crate::config::Config;
use crate::error::Result;
use crate::geom::SurfaceIndex;
use crate::mesh_io::TetDomain;
use crate::rpd::{MedialMesh, SphereClass};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mser: f64,
    pub tq_avg: f64,
    pub tq_p85: f64,
    pub tq_p90: f64,
    pub ter: u8,
    pub hd_pct: f64,
    pub euler: i64,
    pub expected_euler: i64,
    pub spheres: usize,
    pub valid_edges: usize,
    pub valid_faces: usize,
    pub seam_spheres: usize,
    pub junction_spheres: usize,
    pub spikes: usize,
    pub seams: usize,
    pub junctions: usize,
}

/// Every metric of a finished medial mesh. `sigma` is the kernel width used
/// for the MSER subdivision.
pub fn evaluate(mesh: &MedialMesh, domain: &TetDomain, index: &SurfaceIndex, sigma: f64, cfg: &Config) -> Result<MetricsReport> {
    let m = mser(mesh, index, sigma, cfg.cluster_angle());
    let (tq_avg, per_face) = triangle_quality(mesh);
    let hd = hausdorff(mesh, index, cfg.hd_samples, cfg.seed)?;
    let count = |c: SphereClass| mesh.spheres.iter().filter(|s| s.class == c).count();
    Ok(MetricsReport {
        mser: m.mser,
        tq_avg,
        tq_p85: quantile(&per_face, 0.85),
        tq_p90: quantile(&per_face, 0.90),
        ter: ter(mesh, domain),
        hd_pct: hd.hd_pct,
        euler: mesh.euler(),
        expected_euler: expected_euler(domain),
        spheres: mesh.spheres.len(),
        valid_edges: mesh.valid_edges().count(),
        valid_faces: mesh.valid_faces().count(),
        seam_spheres: count(SphereClass::T3Seam),
        junction_spheres: count(SphereClass::T4Junction),
        spikes: m.spikes,
        seams: mesh.seams.len(),
        junctions: mesh.junctions.len(),
    })
}
