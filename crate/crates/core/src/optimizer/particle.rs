use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MedialError, Result};
use crate::geom::Vec3;
use crate::spheres::{SqemCase, SqemSystem};

/// Kernel width `c_sigma * sqrt(area / n)`.
pub fn compute_sigma(area: f64, n: usize, c_sigma: f64) -> Result<f64> {
    if n == 0 {
        return Err(MedialError::InvalidArgument("kernel width needs at least one sphere".into()));
    }
    if !(area > 0.0) {
        return Err(MedialError::InvalidArgument(format!("kernel width needs a positive area, got {area}")));
    }
    Ok(c_sigma * (area / n as f64).sqrt())
}

/// Gaussian energy of a pair and the force on `i`,
/// `((theta_j - theta_i) / sigma^2) * E`.
pub fn particle_pair(ti: &Vec3, tj: &Vec3, sigma: f64) -> (f64, Vec3) {
    let d = tj - ti;
    let e = (-d.norm_squared() / (2.0 * sigma * sigma)).exp();
    (e, d * (e / (sigma * sigma)))
}

/// Unordered pairs `(i, j)`, `i < j`, where either lists the other.
pub fn symmetric_pairs(neighbors: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let set: BTreeSet<(usize, usize)> = neighbors
        .iter()
        .enumerate()
        .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j != i).map(move |&j| (i.min(j), i.max(j))))
        .collect();
    set.into_iter().collect()
}

/// Total energy over both directions of every symmetrized pair and the
/// per-particle force sums. The force field is the gradient of half the
/// returned energy.
pub fn total_energy_forces(centers: &[Vec3], neighbors: &[Vec<usize>], sigma: f64) -> (f64, Vec<Vec3>) {
    let pairs = symmetric_pairs(neighbors);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for &(i, j) in &pairs {
        adj[i].push(j);
        adj[j].push(i);
    }
    let per: Vec<(f64, Vec3)> = adj
        .par_iter()
        .enumerate()
        .map(|(i, nb)| {
            nb.iter().fold((0.0, Vec3::zeros()), |(e, f), &j| {
                let (ej, fj) = particle_pair(&centers[i], &centers[j], sigma);
                (e + ej, f + fj)
            })
        })
        .collect();
    let energy = per.iter().map(|p| p.0).sum();
    (energy, per.into_iter().map(|p| p.1).collect())
}

/// Admissible motion of one sphere during the particle step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Motion {
    Fixed,
    Line(Vec3),
    Plane(Vec3),
    Free,
}

impl Motion {
    pub fn from_system(sys: &SqemSystem) -> Self {
        match sys.case {
            SqemCase::FullRank | SqemCase::Under => Motion::Fixed,
            SqemCase::Line => sys.direction.map_or(Motion::Fixed, Motion::Line),
            SqemCase::Plane => match (sys.normal, sys.direction) {
                (Some(n), _) => Motion::Plane(n),
                (None, Some(v)) => Motion::Line(v),
                _ => Motion::Fixed,
            },
        }
    }

    pub fn apply(&self, g: &Vec3) -> Vec3 {
        match self {
            Motion::Fixed => Vec3::zeros(),
            Motion::Line(v) => v * v.dot(g),
            Motion::Plane(n) => g - n * n.dot(g),
            Motion::Free => *g,
        }
    }
}

/// Restrict a force to the motions the sphere's SQEM case allows.
pub fn project_gradient(f: &Vec3, sys: &SqemSystem) -> Vec3 {
    Motion::from_system(sys).apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::knn;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_arithmetic() {
        assert!((compute_sigma(100.0, 100, 0.3).unwrap() - 0.3).abs() < 1e-15);
        let a = compute_sigma(50.0, 10, 0.3).unwrap();
        let b = compute_sigma(50.0, 40, 0.3).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!(compute_sigma(1.0, 0, 0.3).is_err());
        assert!(compute_sigma(0.0, 3, 0.3).is_err());
    }

    #[test]
    fn pair_values() {
        let s = 2.0;
        let (e, _) = particle_pair(&Vec3::zeros(), &Vec3::new(s * 2f64.sqrt(), 0.0, 0.0), s);
        assert!((e - (-1f64).exp()).abs() < 1e-15);
        let (e, f) = particle_pair(&Vec3::repeat(1.0), &Vec3::repeat(1.0), s);
        assert_eq!((e, f), (1.0, Vec3::zeros()));
    }

    #[test]
    fn two_particles_count_both_directions() {
        let c = [Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)];
        let (e, _) = total_energy_forces(&c, &[vec![1], vec![]], 1.0);
        assert!((e - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn triangle_forces_point_inward_gradient() {
        let c: Vec<Vec3> = (0..3)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / 3.0;
                Vec3::new(a.cos(), a.sin(), 0.0)
            })
            .collect();
        let (_, f) = total_energy_forces(&c, &knn(&c, 2), 1.0);
        for (p, fi) in c.iter().zip(&f) {
            // The gradient points at the centroid; descent pushes outward.
            assert!((-fi).normalize().dot(&p.normalize()) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn forces_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sigma = 0.3;
        let c: Vec<Vec3> = (0..50).map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen())).collect();
        let nb = knn(&c, 10);
        let (_, f) = total_energy_forces(&c, &nb, sigma);
        let h = 1e-5 * sigma;
        for i in 0..c.len() {
            for k in 0..3 {
                let mut p = c.clone();
                p[i][k] += h;
                let ep = total_energy_forces(&p, &nb, sigma).0;
                p[i][k] -= 2.0 * h;
                let em = total_energy_forces(&p, &nb, sigma).0;
                let fd = (ep - em) / (4.0 * h);
                assert!((fd - f[i][k]).abs() <= 1e-6 * f[i][k].abs().max(1e-3), "{fd} vs {}", f[i][k]);
            }
        }
    }

    #[test]
    fn forces_sum_to_zero_on_symmetric_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c: Vec<Vec3> = (0..50).map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen())).collect();
        let (_, f) = total_energy_forces(&c, &knn(&c, 10), 0.2);
        let max = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(f.iter().sum::<Vec3>().norm() <= 1e-9 * max);
    }

    #[test]
    fn motion_formulas() {
        let g = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(Motion::Line(Vec3::z()).apply(&g), Vec3::new(0.0, 0.0, 3.0));
        assert_eq!(Motion::Plane(Vec3::z()).apply(&g), Vec3::new(1.0, 2.0, 0.0));
        assert_eq!(Motion::Fixed.apply(&g), Vec3::zeros());
    }

    proptest! {
        #[test]
        fn projections_are_idempotent(gx in -1e3..1e3f64, gy in -1e3..1e3f64, gz in -1e3..1e3f64,
                                      vx in -1.0..1.0f64, vy in -1.0..1.0f64, vz in 0.1..1.0f64) {
            let g = Vec3::new(gx, gy, gz);
            let v = Vec3::new(vx, vy, vz).normalize();
            for m in [Motion::Line(v), Motion::Plane(v)] {
                let once = m.apply(&g);
                prop_assert!((m.apply(&once) - once).norm() <= 1e-9 * (1.0 + g.norm()));
            }
        }
    }
}
