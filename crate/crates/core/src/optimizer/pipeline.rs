use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::preserve_features;
use super::init::{initialize, InitReport};
use super::lbfgs::{minimize, LbfgsParams};
use super::particle::{compute_sigma, total_energy_forces, Motion};
use crate::config::Config;
use crate::error::Result;
use crate::geom::{knn, SurfaceIndex, Vec3};
use crate::mesh_io::TetDomain;
use crate::rpd::{cluster_samples, compute_rpd, dual_medial_mesh, mix_seed, sample_rpd, MedialMesh, Rpd, Sphere, SphereClass};
use crate::spheres::{assemble_sqem, project_sphere};
use crate::structure::{classify_sphere, enforce_thinness, extract_structure, prune_invalid, PruneReport};

/// Diagram of `spheres` with sampled and clustered cells and bisector faces.
pub fn analyze(domain: &TetDomain, index: &SurfaceIndex, spheres: &[Sphere], cfg: &Config, seed: u64) -> Rpd {
    let mut rpd = compute_rpd(domain, spheres);
    sample_rpd(&mut rpd, index, cfg, seed);
    let angle = cfg.cluster_angle();
    rpd.cells.par_iter_mut().for_each(|c| {
        if !c.samples.is_empty() {
            c.clusters = cluster_samples(&c.samples, spheres[c.sphere].radius, angle, index);
        }
    });
    rpd.faces.par_iter_mut().for_each(|(&(i, j), f)| {
        if !f.samples.is_empty() {
            let r = 0.5 * (spheres[i].radius + spheres[j].radius);
            f.clusters = cluster_samples(&f.samples, r, angle, index);
        }
    });
    rpd
}

/// Class of every unpinned sphere from its cell's cluster count.
pub fn classify_all(spheres: &mut [Sphere], rpd: &Rpd) {
    for (s, c) in spheres.iter_mut().zip(&rpd.cells) {
        s.class = classify_sphere(s, c.clusters.len());
    }
}

/// Admissible motion of every sphere from its cell's SQEM system. Pinned
/// spheres and cells without samples stay fixed.
pub fn motions(spheres: &[Sphere], rpd: &Rpd, cfg: &Config) -> Vec<Motion> {
    spheres
        .par_iter()
        .zip(rpd.cells.par_iter())
        .map(|(s, c)| {
            if s.pinned || c.samples.is_empty() {
                return Motion::Fixed;
            }
            assemble_sqem(&c.samples, cfg.tau_rank).map_or(Motion::Fixed, |sys| Motion::from_system(&sys))
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InnerReport {
    pub free: usize,
    pub iterations: usize,
    pub evaluations: usize,
    /// Particle energy before and after, counting both directions of each pair.
    pub energy_before: f64,
    pub energy_after: f64,
    pub grad_max: f64,
    pub line_search_failed: bool,
}

/// L-BFGS on the particle energy over the centers that may move, with forces
/// restricted to each sphere's motion. Radii are left untouched.
pub fn inner_loop(spheres: &mut [Sphere], motions: &[Motion], sigma: f64, cfg: &Config) -> InnerReport {
    let free: Vec<usize> = (0..spheres.len())
        .filter(|&i| !spheres[i].pinned && motions[i] != Motion::Fixed)
        .collect();
    let mut centers: Vec<Vec3> = spheres.iter().map(|s| s.center).collect();
    let fixed_nb = (!cfg.knn_per_eval).then(|| knn(&centers, cfg.knn));
    let (e0, _) = total_energy_forces(&centers, fixed_nb.as_deref().unwrap_or(&knn(&centers, cfg.knn)), sigma);
    let mut report = InnerReport { free: free.len(), energy_before: e0, energy_after: e0, ..Default::default() };
    if free.is_empty() {
        return report;
    }
    let x0: Vec<f64> = free.iter().flat_map(|&i| centers[i].iter().copied().collect::<Vec<_>>()).collect();
    let params = LbfgsParams {
        memory: cfg.lbfgs_memory,
        max_iters: cfg.max_inner,
        grad_tol: cfg.grad_tol,
        first_step: 0.25 * sigma,
        ..Default::default()
    };
    let base = centers.clone();
    let eval = |x: &[f64]| {
        let mut c = base.clone();
        for (k, &i) in free.iter().enumerate() {
            c[i] = Vec3::new(x[3 * k], x[3 * k + 1], x[3 * k + 2]);
        }
        let nb = match &fixed_nb {
            Some(nb) => nb.clone(),
            None => knn(&c, cfg.knn),
        };
        let (e, f) = total_energy_forces(&c, &nb, sigma);
        let g: Vec<f64> = free.iter().flat_map(|&i| motions[i].apply(&f[i]).iter().copied().collect::<Vec<_>>()).collect();
        (0.5 * e, g)
    };
    let res = minimize(x0, &params, eval);
    if res.line_search_failed {
        log::debug!("inner loop: line search failed, keeping last iterate");
    }
    for (k, &i) in free.iter().enumerate() {
        centers[i] = Vec3::new(res.x[3 * k], res.x[3 * k + 1], res.x[3 * k + 2]);
        spheres[i].center = centers[i];
    }
    report.iterations = res.iterations;
    report.evaluations = res.evaluations;
    report.energy_after = 2.0 * res.f;
    report.grad_max = res.grad_max;
    report.line_search_failed = res.line_search_failed;
    report
}

/// One line of the progress log.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub iteration: usize,
    pub spheres: usize,
    pub inner: InnerReport,
    /// Unpinned spheres dropped for having an empty cell.
    pub dropped: usize,
    pub inserted: usize,
    pub seam_spheres: usize,
    pub junction_spheres: usize,
    pub relative_change: f64,
}

#[derive(Clone, Debug, Default)]
pub struct PipelineOutput {
    pub mesh: MedialMesh,
    /// Spheres the final diagram was built from.
    pub spheres: Vec<Sphere>,
    /// The final diagram, sampled and clustered.
    pub rpd: Rpd,
    pub sigma: f64,
    pub log: Vec<OuterRecord>,
    pub init: InitReport,
    pub prune: PruneReport,
    /// Faces removed to open closed pockets.
    pub thinned: usize,
    pub converged: bool,
}

fn seam_count(spheres: &[Sphere]) -> usize {
    spheres
        .iter()
        .filter(|s| matches!(s.class, SphereClass::T3Seam | SphereClass::T4Junction))
        .count()
}

fn kernel_width(dual: &MedialMesh, n: usize, domain: &TetDomain, cfg: &Config) -> Result<f64> {
    let area = dual.valid_area();
    if area > 1e-12 * domain.bbox_diag * domain.bbox_diag {
        return compute_sigma(area, n, cfg.c_sigma);
    }
    // Degenerate axis (a ball): fall back to the mean dual edge length.
    let lens: Vec<f64> = dual
        .valid_edges()
        .map(|e| (dual.spheres[e.v[0]].center - dual.spheres[e.v[1]].center).norm())
        .collect();
    let mean = if lens.is_empty() { domain.bbox_diag / cfg.gamma } else { lens.iter().sum::<f64>() / lens.len() as f64 };
    Ok(cfg.c_sigma * mean.max(domain.bbox_diag / cfg.gamma))
}

/// The full pipeline on a domain whose features are already detected.
pub fn run_pipeline(domain: &TetDomain, cfg: &Config) -> Result<PipelineOutput> {
    let index = SurfaceIndex::new(domain);
    let (spheres, init) = initialize(domain, &index, cfg)?;
    let mut out = optimize_from(domain, &index, spheres, cfg)?;
    out.init = init;
    Ok(out)
}

/// Optimize a given sphere set, then extract, prune and thin the medial mesh.
pub fn optimize_from(domain: &TetDomain, index: &SurfaceIndex, mut spheres: Vec<Sphere>, cfg: &Config) -> Result<PipelineOutput> {
    let seed = |it: usize, phase: u64| mix_seed(&[cfg.seed, it as u64, phase]);
    let mut rpd = analyze(domain, index, &spheres, cfg, seed(0, 0));
    classify_all(&mut spheres, &rpd);
    let dual = dual_medial_mesh(&rpd, &spheres);
    let sigma = kernel_width(&dual, spheres.len(), domain, cfg)?;
    log::info!("kernel width {sigma:.4} over {} spheres", spheres.len());
    let added = preserve_features(&spheres, &rpd, &dual, index, sigma, cfg);
    let mut stale = !added.is_empty();
    spheres.extend(added);

    let mut prev = seam_count(&spheres);
    let mut log = Vec::new();
    let mut converged = false;
    for it in 1..=cfg.max_outer {
        if stale {
            rpd = analyze(domain, index, &spheres, cfg, seed(it, 1));
            classify_all(&mut spheres, &rpd);
        }
        let mv = motions(&spheres, &rpd, cfg);
        let inner = inner_loop(&mut spheres, &mv, sigma, cfg);
        for s in spheres.iter_mut().filter(|s| !s.pinned) {
            s.radius = index.closest(&s.center).dist;
        }

        rpd = analyze(domain, index, &spheres, cfg, seed(it, 2));
        let projected: Vec<Option<Sphere>> = spheres
            .par_iter()
            .zip(rpd.cells.par_iter())
            .map(|(s, c)| {
                if s.pinned {
                    Some(*s)
                } else if c.is_empty() || c.samples.is_empty() {
                    None
                } else {
                    Some(project_sphere(s, &c.samples, &c.clusters, index, cfg).sphere)
                }
            })
            .collect();
        let before = spheres.len();
        spheres = projected.into_iter().flatten().collect();
        let dropped = before - spheres.len();

        rpd = analyze(domain, index, &spheres, cfg, seed(it, 3));
        classify_all(&mut spheres, &rpd);
        let dual = dual_medial_mesh(&rpd, &spheres);
        let added = preserve_features(&spheres, &rpd, &dual, index, sigma, cfg);
        let inserted = added.len();
        stale = inserted > 0;
        spheres.extend(added);

        let count = seam_count(&spheres);
        let change = if count == prev { 0.0 } else { count.abs_diff(prev) as f64 / count.max(1) as f64 };
        let rec = OuterRecord {
            iteration: it,
            spheres: spheres.len(),
            inner,
            dropped,
            inserted,
            seam_spheres: spheres.iter().filter(|s| s.class == SphereClass::T3Seam).count(),
            junction_spheres: spheres.iter().filter(|s| s.class == SphereClass::T4Junction).count(),
            relative_change: change,
        };
        log::info!(
            "outer {it}: {} spheres, energy {:.4} -> {:.4}, {} seam, {} junction, change {change:.2e}",
            rec.spheres,
            rec.inner.energy_before,
            rec.inner.energy_after,
            rec.seam_spheres,
            rec.junction_spheres
        );
        log.push(rec);
        prev = count;
        if change < cfg.outer_tol && inserted == 0 {
            converged = true;
            break;
        }
    }
    if stale {
        rpd = analyze(domain, index, &spheres, cfg, seed(cfg.max_outer + 1, 1));
        classify_all(&mut spheres, &rpd);
    }

    let mut mesh = dual_medial_mesh(&rpd, &spheres);
    let prune = prune_invalid(&mut mesh, &rpd, index, cfg.cluster_angle());
    let thinned = enforce_thinness(&mut mesh);
    extract_structure(&mut mesh);
    Ok(PipelineOutput { mesh, spheres, rpd, sigma, log, init: InitReport::default(), prune, thinned, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_midplane_particles_separate() {
        let mut s = vec![
            Sphere::new(Vec3::new(500.0, 500.0, 100.0), 100.0),
            Sphere::new(Vec3::new(505.0, 500.0, 100.0), 100.0),
        ];
        let mv = vec![Motion::Plane(Vec3::z()); 2];
        let r = inner_loop(&mut s, &mv, 10.0, &Config::default());
        let d = (s[0].center - s[1].center).norm();
        assert!(d > 5.0, "{d}");
        assert!(r.energy_after <= r.energy_before);
        assert!(s.iter().all(|s| (s.center.z - 100.0).abs() < 1e-12));
    }

    #[test]
    fn all_fixed_exits_at_once() {
        let mut s = vec![Sphere::new(Vec3::zeros(), 1.0), Sphere::new(Vec3::x(), 1.0)];
        let r = inner_loop(&mut s, &[Motion::Fixed; 2], 1.0, &Config::default());
        assert_eq!((r.free, r.iterations), (0, 0));
        assert_eq!(s[1].center, Vec3::x());
    }

    #[test]
    fn pinned_spheres_never_move() {
        let mut s = vec![Sphere::pinned(Vec3::zeros(), SphereClass::T1Edge), Sphere::new(Vec3::new(0.1, 0.0, 0.0), 1.0)];
        inner_loop(&mut s, &[Motion::Free; 2], 1.0, &Config::default());
        assert_eq!(s[0].center, Vec3::zeros());
        assert!(s[1].center.x > 0.1);
    }
}
