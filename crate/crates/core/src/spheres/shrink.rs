use crate::geom::{SurfaceIndex, SurfacePoint, Vec3};
use crate::rpd::{Sphere, SphereClass};

const MAX_ITERS: usize = 30;

/// Outcome of shrinking a ball tangent at a pin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shrunk {
    pub sphere: Sphere,
    /// The second contact, once one was found.
    pub contact: Option<Vec3>,
    pub iterations: usize,
    pub converged: bool,
}

/// Shrink the ball tangent at `pin` until it is empty: starting from radius
/// `diag / 2`, the center moves along the inward normal and the radius is
/// reset to the ball through `pin` and the current nearest surface point.
/// Balls that never settle come back flagged as spikes.
pub fn shrink_sphere(pin: &SurfacePoint, index: &SurfaceIndex, diag: f64) -> Shrunk {
    let p = pin.position;
    let n = pin.normal;
    let tol = 1e-6 * diag;
    let inside_tol = 1e-4 * diag;
    let mut r = diag / 2.0;
    let mut contact = None;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERS {
        iterations += 1;
        let center = p - n * r;
        let hit = index.closest(&center);
        if hit.dist >= r - inside_tol {
            converged = true;
            break;
        }
        let q = hit.point.position;
        let d = p - q;
        let denom = 2.0 * d.dot(&n);
        if denom <= 1e-12 * diag {
            break;
        }
        let next = (d.norm_squared() / denom).min(r);
        contact = Some(q);
        let step = r - next;
        r = next;
        if step < tol {
            converged = true;
            break;
        }
    }
    let class = if converged { SphereClass::Unknown } else { SphereClass::T1Spike };
    Shrunk {
        sphere: Sphere { center: p - n * r, radius: r, class, pinned: false },
        contact,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mesh_io::detect_features;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cube_face_center() {
        let d = fixtures::box_mesh(Vec3::repeat(1000.0), [2, 2, 2]);
        let index = SurfaceIndex::new(&d);
        let f = (0..index.num_tris()).find(|&f| index.tri(f).iter().all(|v| v.z == 0.0)).unwrap();
        let pin = index.surface_point_at(f, Vec3::new(500.0, 500.0, 0.0));
        let s = shrink_sphere(&pin, &index, d.bbox_diag);
        assert!(s.converged);
        assert!((s.sphere.center - Vec3::repeat(500.0)).norm() < 1e-6);
        assert!((s.sphere.radius - 500.0).abs() < 1e-6);
    }

    #[test]
    fn slab_pins_land_on_midplane() {
        let d = detect_features(&fixtures::slab(1000.0, 1000.0, 200.0, 4, 4, 1), 0.5, &[]);
        let index = SurfaceIndex::new(&d);
        for f in 0..index.num_tris() {
            let t = index.tri(f);
            if index.tri_normal(f).z.abs() < 0.9 {
                continue;
            }
            let c = (t[0] + t[1] + t[2]) / 3.0;
            if c.x < 150.0 || c.x > 850.0 || c.y < 150.0 || c.y > 850.0 {
                continue;
            }
            let s = shrink_sphere(&index.surface_point_at(f, c), &index, d.bbox_diag);
            assert!((s.sphere.center.z - 100.0).abs() < 1e-6, "{:?}", s);
            assert!((s.sphere.radius - 100.0).abs() < 1e-6);
        }
    }

    #[test]
    fn ball_pins_reach_center() {
        let d = fixtures::ball(500.0, 6);
        let index = SurfaceIndex::new(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let f = rng.gen_range(0..index.num_tris());
            let t = index.tri(f);
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
            let pos = t[0] + (t[1] - t[0]) * a + (t[2] - t[0]) * b;
            let s = shrink_sphere(&index.surface_point_at(f, pos), &index, d.bbox_diag);
            assert!(s.converged && s.iterations <= 30);
            assert!(s.sphere.center.norm() < 1e-4 * d.bbox_diag, "{:?}", s.sphere.center);
        }
    }

    #[test]
    fn result_is_empty() {
        let d = fixtures::l_shape(1000.0, 300.0, 2);
        let index = SurfaceIndex::new(&d);
        for f in (0..index.num_tris()).step_by(7) {
            let t = index.tri(f);
            let s = shrink_sphere(&index.surface_point_at(f, (t[0] + t[1] + t[2]) / 3.0), &index, d.bbox_diag);
            for v in &d.vertices {
                assert!((v - s.sphere.center).norm() >= s.sphere.radius - 1e-4 * d.bbox_diag);
            }
        }
    }
}
