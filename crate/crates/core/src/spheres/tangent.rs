use nalgebra::{DMatrix, DVector};

use crate::geom::{SurfaceIndex, Vec3};
use crate::rpd::Sphere;

const MAX_ITERS: usize = 20;

/// Outcome of tangent-point refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangents {
    pub sphere: Sphere,
    /// Largest `| |p_c - center| - r |` over the regions at the result.
    pub residual: f64,
    /// Tangent point per region at the result.
    pub points: Vec<Vec3>,
    pub iterations: usize,
    /// Fewer than two regions: the input is returned untouched.
    pub collapsed: bool,
}

fn evaluate(s: &Sphere, regions: &[Vec<usize>], index: &SurfaceIndex) -> (Vec<Vec3>, Vec<f64>) {
    let mut pts = Vec::with_capacity(regions.len());
    let mut res = Vec::with_capacity(regions.len());
    for reg in regions {
        let h = index.closest_in(&s.center, reg).expect("regions are non-empty");
        pts.push(h.point.position);
        res.push(h.dist - s.radius);
    }
    (pts, res)
}

/// Gauss-Newton on `sum_c (|p_c - center| - r)^2`, where `p_c` is the closest
/// point of region `c` (a triangle list) to the current center. Steps are
/// minimum-norm and halved until the energy does not increase.
pub fn optimize_sphere_tangents(sphere: &Sphere, regions: &[Vec<usize>], index: &SurfaceIndex, diag: f64) -> Tangents {
    let regions: Vec<Vec<usize>> = regions.iter().filter(|r| !r.is_empty()).cloned().collect();
    if regions.len() < 2 {
        return Tangents { sphere: *sphere, residual: f64::INFINITY, points: Vec::new(), iterations: 0, collapsed: true };
    }
    let tol = 1e-6 * diag;
    let mut cur = *sphere;
    let (mut pts, mut res) = evaluate(&cur, &regions, index);
    let mut energy: f64 = res.iter().map(|r| r * r).sum();
    let mut iterations = 0;
    while iterations < MAX_ITERS {
        iterations += 1;
        let m = regions.len();
        let mut j = DMatrix::zeros(m, 4);
        for c in 0..m {
            let d = pts[c] - cur.center;
            let u = if d.norm() > 0.0 { d / d.norm() } else { Vec3::zeros() };
            j[(c, 0)] = -u.x;
            j[(c, 1)] = -u.y;
            j[(c, 2)] = -u.z;
            j[(c, 3)] = -1.0;
        }
        let rhs = -DVector::from_column_slice(&res);
        let svd = j.svd(true, true);
        let Ok(delta) = svd.solve(&rhs, 1e-10) else { break };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let cand = Sphere {
                center: cur.center + Vec3::new(delta[0], delta[1], delta[2]) * step,
                radius: (cur.radius + delta[3] * step).max(0.0),
                ..cur
            };
            let (p2, r2) = evaluate(&cand, &regions, index);
            let e2: f64 = r2.iter().map(|r| r * r).sum();
            if e2 <= energy {
                cur = cand;
                pts = p2;
                res = r2;
                energy = e2;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || delta.norm() * step < tol {
            break;
        }
    }
    let residual = res.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    Tangents { sphere: cur, residual, points: pts, iterations, collapsed: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn tris_where(index: &SurfaceIndex, f: impl Fn(&[Vec3; 3]) -> bool) -> Vec<usize> {
        (0..index.num_tris()).filter(|&t| f(index.tri(t))).collect()
    }

    #[test]
    fn slab_walls_give_midplane() {
        let d = fixtures::slab(1000.0, 1000.0, 200.0, 4, 4, 1);
        let index = SurfaceIndex::new(&d);
        let bottom = tris_where(&index, |t| t.iter().all(|v| v.z == 0.0));
        let top = tris_where(&index, |t| t.iter().all(|v| v.z == 200.0));
        let start = Sphere::new(Vec3::new(400.0, 500.0, 130.0), 60.0);
        let out = optimize_sphere_tangents(&start, &[bottom, top], &index, d.bbox_diag);
        assert!(!out.collapsed);
        assert!((out.sphere.center.z - 100.0).abs() < 1e-6 * d.bbox_diag);
        assert!((out.sphere.radius - 100.0).abs() < 1e-6 * d.bbox_diag);
        assert!(out.residual < 1e-6 * d.bbox_diag);
        assert!((out.sphere.center.x - 400.0).abs() < 1e-6);
    }

    #[test]
    fn box_seam_equidistant_to_three_walls() {
        let d = fixtures::box_mesh(Vec3::new(1000.0, 250.0, 250.0), [8, 2, 2]);
        let index = SurfaceIndex::new(&d);
        let walls = [
            tris_where(&index, |t| t.iter().all(|v| v.x == 0.0)),
            tris_where(&index, |t| t.iter().all(|v| v.y == 0.0)),
            tris_where(&index, |t| t.iter().all(|v| v.z == 0.0)),
        ];
        let start = Sphere::new(Vec3::new(70.0, 55.0, 62.0), 40.0);
        let out = optimize_sphere_tangents(&start, &walls, &index, d.bbox_diag);
        let c = out.sphere.center;
        assert!((c.x - c.y).abs() < 1e-6 && (c.y - c.z).abs() < 1e-6);
        assert!((out.sphere.radius - c.x).abs() < 1e-6);
    }

    #[test]
    fn optimal_input_unchanged() {
        let d = fixtures::slab(1000.0, 1000.0, 200.0, 4, 4, 1);
        let index = SurfaceIndex::new(&d);
        let bottom = tris_where(&index, |t| t.iter().all(|v| v.z == 0.0));
        let top = tris_where(&index, |t| t.iter().all(|v| v.z == 200.0));
        let start = Sphere::new(Vec3::new(400.0, 500.0, 100.0), 100.0);
        let out = optimize_sphere_tangents(&start, &[bottom, top], &index, d.bbox_diag);
        assert!((out.sphere.center - start.center).norm() < 1e-9);
        assert!(out.iterations <= 1);
    }

    #[test]
    fn single_region_collapses() {
        let d = fixtures::slab(1000.0, 1000.0, 200.0, 4, 4, 1);
        let index = SurfaceIndex::new(&d);
        let s = Sphere::new(Vec3::new(500.0, 500.0, 100.0), 10.0);
        let out = optimize_sphere_tangents(&s, &[vec![0], vec![]], &index, d.bbox_diag);
        assert!(out.collapsed);
        assert_eq!(out.sphere, s);
    }
}
