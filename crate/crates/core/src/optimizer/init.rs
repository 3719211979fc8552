use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{MedialError, Result};
use crate::geom::{poisson::walk_polyline, poisson_disk_pins, KdTree, SurfaceIndex, Vec3};
use crate::mesh_io::{FeatureKind, TetDomain};
use crate::rpd::{Sphere, SphereClass};
use crate::spheres::shrink_sphere;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InitReport {
    pub pins: usize,
    /// Shrinks that did not settle or ended with zero radius.
    pub rejected: usize,
    pub merged: usize,
    pub edge_spheres: usize,
    pub corner_spheres: usize,
}

/// Drop spheres closer than `min_dist` to an earlier kept sphere whose radius
/// is within 10 percent. Returns the kept spheres in input order.
pub fn dedupe(spheres: &[Sphere], min_dist: f64) -> Vec<Sphere> {
    let centers: Vec<Vec3> = spheres.iter().map(|s| s.center).collect();
    let tree = KdTree::new(&centers);
    let mut keep = vec![true; spheres.len()];
    for (i, s) in spheres.iter().enumerate() {
        let mut k = 8;
        loop {
            let near = tree.knn(&s.center, k, Some(i));
            let dup = near.iter().any(|&j| {
                let o = &spheres[j];
                j < i && keep[j] && (o.center - s.center).norm() < min_dist && {
                    let ratio = s.radius / o.radius;
                    (0.9..=1.1).contains(&ratio)
                }
            });
            if dup {
                keep[i] = false;
                break;
            }
            let far = near.last().is_none_or(|&j| (spheres[j].center - s.center).norm() >= min_dist);
            if far || near.len() < k {
                break;
            }
            k *= 2;
        }
    }
    spheres.iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| *s).collect()
}

/// Zero-radius pinned spheres every `spacing` along convex-sharp polylines
/// and at every convex corner.
pub fn feature_spheres(domain: &TetDomain, spacing: f64) -> Vec<Sphere> {
    let corners: Vec<Vec3> = domain.feature_corners.iter().map(|&v| domain.vertices[v]).collect();
    let mut out: Vec<Sphere> = corners.iter().map(|&c| Sphere::pinned(c, SphereClass::T1Corner)).collect();
    for pl in domain.polylines.iter().filter(|p| p.kind == FeatureKind::Convex) {
        for (p, _) in walk_polyline(domain, &pl.verts, pl.closed, spacing) {
            if corners.iter().all(|c| (c - p).norm() > 0.5 * spacing) {
                out.push(Sphere::pinned(p, SphereClass::T1Edge));
            }
        }
    }
    out
}

/// Shrink one sphere per surface pin, keep the settled ones, merge near
/// duplicates and add the pinned feature spheres.
pub fn initialize(domain: &TetDomain, index: &SurfaceIndex, cfg: &Config) -> Result<(Vec<Sphere>, InitReport)> {
    let diag = domain.bbox_diag;
    let rho = diag / cfg.gamma;
    let pins = poisson_disk_pins(domain, index, cfg.gamma, cfg.seed);
    if pins.is_empty() {
        return Err(MedialError::NoPins);
    }
    let shrunk: Vec<Option<Sphere>> = pins
        .par_iter()
        .map(|p| {
            let s = shrink_sphere(p, index, diag);
            (s.converged && s.sphere.radius > 1e-9 * diag).then(|| Sphere::new(s.sphere.center, s.sphere.radius))
        })
        .collect();
    let rejected = shrunk.iter().filter(|s| s.is_none()).count();
    let medial: Vec<Sphere> = shrunk.into_iter().flatten().collect();
    let kept = dedupe(&medial, 0.25 * rho);
    let features = feature_spheres(domain, rho);
    let report = InitReport {
        pins: pins.len(),
        rejected,
        merged: medial.len() - kept.len(),
        edge_spheres: features.iter().filter(|s| s.class == SphereClass::T1Edge).count(),
        corner_spheres: features.iter().filter(|s| s.class == SphereClass::T1Corner).count(),
    };
    log::info!("initialized {} spheres from {} pins ({} rejected, {} merged)", kept.len(), pins.len(), rejected, report.merged);
    let mut out = features;
    out.extend(kept);
    Ok((out, report))
}
