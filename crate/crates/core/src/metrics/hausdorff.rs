use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MedialError, Result};
use crate::geom::{Aabb, Bvh, SurfaceIndex, Vec3};
use crate::rpd::{mix_seed, MedialMesh};

#[derive(Clone, Copy, Debug)]
enum Prim {
    Ball(usize),
    Cone(usize, usize),
    Slab(usize, usize, usize),
}

/// Union of the spheres, the round cones of valid edges and the slabs of
/// valid faces, each an interpolation of its spheres.
#[derive(Clone, Debug)]
pub struct Envelope {
    centers: Vec<Vec3>,
    radii: Vec<f64>,
    prims: Vec<Prim>,
    bvh: Bvh,
}

fn ball_sdf(x: &Vec3, c: &Vec3, r: f64) -> f64 {
    (x - c).norm() - r
}

fn cone_sdf(x: &Vec3, c0: &Vec3, r0: f64, c1: &Vec3, r1: f64) -> f64 {
    let e = c1 - c0;
    let len = e.norm();
    if len <= 0.0 {
        return ball_sdf(x, c0, r0.max(r1));
    }
    let a = e / len;
    let w = x - c0;
    let p = w.dot(&a);
    let h = (w - a * p).norm();
    let k = (r1 - r0) / len;
    let s = if k.abs() < 1.0 { (p + k * h / (1.0 - k * k).sqrt()).clamp(0.0, len) } else if k > 0.0 { len } else { 0.0 };
    ((p - s).powi(2) + h * h).sqrt() - r0 - k * s
}

/// Interior stationary point of the slab: the direction `u` from the medial
/// point satisfies `u . e_j = -(r_j - r_0)`.
fn slab_interior(x: &Vec3, c: [&Vec3; 3], r: [f64; 3]) -> Option<f64> {
    let e1 = c[1] - c[0];
    let e2 = c[2] - c[0];
    let nrm = e1.cross(&e2);
    let n2 = nrm.norm_squared();
    if n2 <= 1e-24 * (e1.norm_squared() * e2.norm_squared()).max(1e-300) {
        return None;
    }
    let (d1, d2) = (r[1] - r[0], r[2] - r[0]);
    // In-plane part of u from the Gram system, then the normal part.
    let g11 = e1.dot(&e1);
    let g12 = e1.dot(&e2);
    let g22 = e2.dot(&e2);
    let det = g11 * g22 - g12 * g12;
    let a = (-d1 * g22 + d2 * g12) / det;
    let b = (-d2 * g11 + d1 * g12) / det;
    let t = e1 * a + e2 * b;
    let rest = 1.0 - t.norm_squared();
    if rest <= 0.0 {
        return None;
    }
    let n = nrm / n2.sqrt();
    let side = if (x - c[0]).dot(&n) >= 0.0 { 1.0 } else { -1.0 };
    let u = t + n * (side * rest.sqrt());
    // x - s u = c0 + b1 e1 + b2 e2.
    let s = (x - c[0]).dot(&n) / u.dot(&n);
    if !(s.is_finite()) || s < 0.0 {
        return None;
    }
    let q = x - u * s - c[0];
    let (q1, q2) = (q.dot(&e1), q.dot(&e2));
    let b1 = (q1 * g22 - q2 * g12) / det;
    let b2 = (q2 * g11 - q1 * g12) / det;
    if b1 < 0.0 || b2 < 0.0 || b1 + b2 > 1.0 {
        return None;
    }
    Some(s - (r[0] + b1 * d1 + b2 * d2))
}

impl Envelope {
    pub fn new(mesh: &MedialMesh) -> Result<Self> {
        if mesh.spheres.is_empty() {
            return Err(MedialError::EmptyMedialMesh);
        }
        let centers: Vec<Vec3> = mesh.spheres.iter().map(|s| s.center).collect();
        let radii: Vec<f64> = mesh.spheres.iter().map(|s| s.radius).collect();
        let mut prims: Vec<Prim> = (0..centers.len()).map(Prim::Ball).collect();
        prims.extend(mesh.valid_edges().map(|e| Prim::Cone(e.v[0], e.v[1])));
        prims.extend(mesh.valid_faces().map(|f| Prim::Slab(f.v[0], f.v[1], f.v[2])));
        let ids = |p: &Prim| -> Vec<usize> {
            match *p {
                Prim::Ball(a) => vec![a],
                Prim::Cone(a, b) => vec![a, b],
                Prim::Slab(a, b, c) => vec![a, b, c],
            }
        };
        let boxes: Vec<Aabb> = prims.iter().map(|p| Aabb::from_points(ids(p).iter().map(|&i| &centers[i]))).collect();
        let rmax: Vec<f64> = prims.iter().map(|p| ids(p).iter().map(|&i| radii[i]).fold(0.0, f64::max)).collect();
        let bvh = Bvh::build_with_radius(&boxes, &rmax);
        Ok(Self { centers, radii, prims, bvh })
    }

    fn prim_sdf(&self, x: &Vec3, p: &Prim) -> f64 {
        let (c, r) = (&self.centers, &self.radii);
        match *p {
            Prim::Ball(a) => ball_sdf(x, &c[a], r[a]),
            Prim::Cone(a, b) => cone_sdf(x, &c[a], r[a], &c[b], r[b]),
            Prim::Slab(a, b, k) => {
                let edges = cone_sdf(x, &c[a], r[a], &c[b], r[b])
                    .min(cone_sdf(x, &c[b], r[b], &c[k], r[k]))
                    .min(cone_sdf(x, &c[a], r[a], &c[k], r[k]));
                slab_interior(x, [&c[a], &c[b], &c[k]], [r[a], r[b], r[k]]).map_or(edges, |v| v.min(edges))
            }
        }
    }

    /// Signed distance to the envelope, negative inside.
    pub fn sdf(&self, x: &Vec3) -> f64 {
        self.bvh
            .nearest_by(
                |node| node.bbox.distance_sq(x).sqrt() - node.max_radius,
                |k| self.prim_sdf(x, &self.prims[k]),
            )
            .map_or(f64::INFINITY, |(_, d)| d)
    }

    /// March from `start` along `dir` until leaving the envelope.
    fn march(&self, start: Vec3, dir: &Vec3, step_tol: f64) -> Vec3 {
        let mut y = start;
        for _ in 0..200 {
            let d = self.sdf(&y);
            if d >= -step_tol {
                break;
            }
            y += dir * (-d).max(step_tol);
        }
        y
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HausdorffReport {
    /// Largest distance from a surface sample to the envelope, model units.
    pub surface_to_envelope: f64,
    /// Largest distance from an envelope sample to the surface, model units.
    pub envelope_to_surface: f64,
    /// `max` of both as a percentage of the bounding-box diagonal.
    pub hd_pct: f64,
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm_squared();
        if n > 1e-6 && n <= 1.0 {
            return v / n.sqrt();
        }
    }
}

fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c < u * cdf.last().copied().unwrap_or(0.0)).min(cdf.len().saturating_sub(1))
}

/// Two-sided Hausdorff distance between the boundary surface and the envelope
/// of the valid medial mesh, from `n_samples` random samples on each side.
pub fn hausdorff(mesh: &MedialMesh, index: &SurfaceIndex, n_samples: usize, seed: u64) -> Result<HausdorffReport> {
    let env = Envelope::new(mesh)?;
    let diag = index.bbox_diag();
    let mut cdf = Vec::with_capacity(index.num_tris());
    let mut acc = 0.0;
    for f in 0..index.num_tris() {
        acc += index.tri_area(f);
        cdf.push(acc);
    }
    let chunk = 1024;
    let chunks = n_samples.div_ceil(chunk);
    let s2e = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, 1, c as u64]));
            let mut worst: f64 = 0.0;
            for _ in 0..chunk.min(n_samples - c * chunk) {
                let f = pick(&cdf, rng.gen());
                let t = index.tri(f);
                let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
                if a + b > 1.0 {
                    a = 1.0 - a;
                    b = 1.0 - b;
                }
                let x = t[0] + (t[1] - t[0]) * a + (t[2] - t[0]) * b;
                worst = worst.max(env.sdf(&x).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);

    // Envelope samples start on a sphere or on a slab's interpolated sphere.
    let faces: Vec<[usize; 3]> = mesh.valid_faces().map(|f| f.v).collect();
    let tol = 1e-7 * diag;
    let e2s = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, 2, c as u64]));
            let mut worst: f64 = 0.0;
            for _ in 0..chunk.min(n_samples - c * chunk) {
                let (center, r) = if faces.is_empty() || rng.gen_bool(0.5) {
                    let k = rng.gen_range(0..env.centers.len());
                    (env.centers[k], env.radii[k])
                } else {
                    let [i, j, k] = faces[rng.gen_range(0..faces.len())];
                    let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
                    if a + b > 1.0 {
                        a = 1.0 - a;
                        b = 1.0 - b;
                    }
                    let w = 1.0 - a - b;
                    (
                        env.centers[i] * w + env.centers[j] * a + env.centers[k] * b,
                        env.radii[i] * w + env.radii[j] * a + env.radii[k] * b,
                    )
                };
                let dir = unit_vector(&mut rng);
                let y = env.march(center + dir * r, &dir, tol);
                worst = worst.max(index.closest(&y).dist);
            }
            worst
        })
        .reduce(|| 0.0, f64::max);

    Ok(HausdorffReport { surface_to_envelope: s2e, envelope_to_surface: e2s, hd_pct: 100.0 * s2e.max(e2s) / diag })
}
