use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{MedialError, Result};
use crate::geom::Vec3;
use crate::rpd::{Sample, Sphere};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SqemCase {
    FullRank,
    Line,
    Plane,
    Under,
}

/// Weighted least squares over `(center, radius)` with one row
/// `n . center + r = n . p` per sample.
#[derive(Clone, Debug)]
pub struct SqemSystem {
    pub a: Matrix4<f64>,
    pub b: Vector4<f64>,
    /// Weighted sum of squared right-hand sides.
    pub c: f64,
    pub weight: f64,
    /// Eigenvalues of `a`, descending.
    pub sigma: [f64; 4],
    /// Matching unit eigenvectors as columns.
    pub vectors: Matrix4<f64>,
    pub case: SqemCase,
    /// LINE: unit motion direction.
    pub direction: Option<Vec3>,
    /// PLANE: unit normal of the motion plane.
    pub normal: Option<Vec3>,
    pub tau: f64,
}

/// Accumulate the system over `samples`, each row weighted by its volume.
pub fn assemble_sqem(samples: &[Sample], tau: f64) -> Result<SqemSystem> {
    if samples.is_empty() {
        return Err(MedialError::NoSamples);
    }
    let mut a = Matrix4::zeros();
    let mut b = Vector4::zeros();
    let mut c = 0.0;
    let mut weight = 0.0;
    for s in samples {
        let row = Vector4::new(s.n.x, s.n.y, s.n.z, 1.0);
        let rhs = s.foot.position.dot(&s.n);
        a += row * row.transpose() * s.weight;
        b += row * (rhs * s.weight);
        c += rhs * rhs * s.weight;
        weight += s.weight;
    }
    Ok(from_normal_equations(a, b, c, weight, tau))
}

pub(crate) fn from_normal_equations(a: Matrix4<f64>, b: Vector4<f64>, c: f64, weight: f64, tau: f64) -> SqemSystem {
    let eig = SymmetricEigen::new(a);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let sigma = order.map(|k| eig.eigenvalues[k].max(0.0));
    let mut vectors = Matrix4::zeros();
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    let mut sys = SqemSystem {
        a,
        b,
        c,
        weight,
        sigma,
        vectors,
        case: SqemCase::Under,
        direction: None,
        normal: None,
        tau,
    };
    sys.case = classify_case(&sys);
    let spatial = |k: usize| Vec3::new(sys.vectors[(0, k)], sys.vectors[(1, k)], sys.vectors[(2, k)]);
    match sys.case {
        SqemCase::Line => {
            let v = spatial(3);
            if v.norm() > 1e-9 {
                sys.direction = Some(v.normalize());
            }
        }
        SqemCase::Plane => {
            let n = spatial(2).cross(&spatial(3));
            if n.norm() > 1e-9 {
                sys.normal = Some(n.normalize());
            } else {
                // Both null vectors move along one spatial line.
                let v = if spatial(2).norm() > spatial(3).norm() { spatial(2) } else { spatial(3) };
                if v.norm() > 1e-9 {
                    sys.direction = Some(v.normalize());
                }
            }
        }
        _ => {}
    }
    sys
}

/// Case from the eigenvalue ratios against `tau`.
pub fn classify_case(sys: &SqemSystem) -> SqemCase {
    let s = sys.sigma;
    if s[0] <= 0.0 {
        return SqemCase::Under;
    }
    let r = |k: usize| s[k] / s[0];
    if r(1) <= sys.tau {
        SqemCase::Under
    } else if r(2) <= sys.tau {
        SqemCase::Plane
    } else if r(3) <= sys.tau {
        SqemCase::Line
    } else {
        SqemCase::FullRank
    }
}

impl SqemSystem {
    /// Weighted sum of squared row residuals at `m`.
    pub fn residual(&self, m: &Vector4<f64>) -> f64 {
        ((m.transpose() * self.a * m)[0] - 2.0 * self.b.dot(m) + self.c).max(0.0)
    }

    /// Root-mean-square plane distance at sphere `s`.
    pub fn rms(&self, s: &Sphere) -> f64 {
        if self.weight <= 0.0 {
            return 0.0;
        }
        (self.residual(&to_vec4(s)) / self.weight).sqrt()
    }

    /// Pseudo-inverse of `a` keeping eigenvalues above `tau * sigma_1`.
    pub fn pinv(&self) -> Matrix4<f64> {
        let mut out = Matrix4::zeros();
        for k in 0..4 {
            if self.sigma[0] > 0.0 && self.sigma[k] > self.tau * self.sigma[0] {
                let v = self.vectors.column(k);
                out += v * v.transpose() / self.sigma[k];
            }
        }
        out
    }

    /// Number of well-conditioned directions.
    pub fn rank(&self) -> usize {
        match self.case {
            SqemCase::FullRank => 4,
            SqemCase::Line => 3,
            SqemCase::Plane => 2,
            SqemCase::Under => usize::from(self.sigma[0] > 0.0),
        }
    }
}

pub(crate) fn to_vec4(s: &Sphere) -> Vector4<f64> {
    Vector4::new(s.center.x, s.center.y, s.center.z, s.radius)
}

/// Closest point of the solution set to `current` in `(center, radius)`
/// space, radius clamped at zero. UNDER systems have no usable solution set.
pub fn solve_sqem(sys: &SqemSystem, current: &Sphere) -> Result<Sphere> {
    if sys.case == SqemCase::Under {
        return Err(MedialError::Underdetermined);
    }
    let m0 = to_vec4(current);
    let m = m0 + sys.pinv() * (sys.b - sys.a * m0);
    Ok(Sphere { center: Vec3::new(m[0], m[1], m[2]), radius: m[3].max(0.0), ..*current })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::SurfacePoint;

    fn wall(p: Vec3, outward: Vec3, w: f64) -> Sample {
        Sample {
            x: p - outward,
            foot: SurfacePoint { position: p, normal: outward, tri: 0 },
            n: outward,
            dist: 1.0,
            weight: w,
        }
    }

    fn slab() -> Vec<Sample> {
        let mut s = Vec::new();
        for k in 0..5 {
            let xy = Vec3::new(100.0 * k as f64, 37.0 * k as f64, 0.0);
            s.push(wall(xy, Vec3::new(0.0, 0.0, -1.0), 1.0));
            s.push(wall(xy + Vec3::new(0.0, 0.0, 200.0), Vec3::new(0.0, 0.0, 1.0), 1.0));
        }
        s
    }

    fn corner() -> Vec<Sample> {
        (0..3)
            .map(|k| {
                let mut n = Vec3::zeros();
                n[k] = -1.0;
                wall(Vec3::new(5.0, 5.0, 5.0) - Vec3::new(5.0, 5.0, 5.0).component_mul(&-n), n, 1.0)
            })
            .collect()
    }

    #[test]
    fn single_plane_is_rank_one() {
        let s = vec![wall(Vec3::zeros(), Vec3::new(0.0, 0.0, -1.0), 1.0); 3];
        let sys = assemble_sqem(&s, 1e-2).unwrap();
        assert_eq!(sys.case, SqemCase::Under);
        let tangent = Sphere::new(Vec3::new(3.0, 4.0, 7.0), 7.0);
        assert!(sys.residual(&to_vec4(&tangent)) < 1e-12);
    }

    #[test]
    fn slab_is_plane_case() {
        let sys = assemble_sqem(&slab(), 1e-2).unwrap();
        assert_eq!(sys.case, SqemCase::Plane);
        let n = sys.normal.unwrap();
        assert!((n.z.abs() - 1.0).abs() < 1e-12);
        let s = solve_sqem(&sys, &Sphere::new(Vec3::new(500.0, 500.0, 140.0), 30.0)).unwrap();
        assert!((s.center - Vec3::new(500.0, 500.0, 100.0)).norm() < 1e-9);
        assert!((s.radius - 100.0).abs() < 1e-9);
    }

    #[test]
    fn corner_is_line_case() {
        let sys = assemble_sqem(&corner(), 1e-2).unwrap();
        assert_eq!(sys.case, SqemCase::Line);
        let v = sys.direction.unwrap();
        assert!((v.abs() - Vec3::repeat(1.0 / 3f64.sqrt())).norm() < 1e-9);
        let s = solve_sqem(&sys, &Sphere::new(Vec3::new(40.0, 10.0, 25.0), 3.0)).unwrap();
        // On the diagonal with radius equal to each coordinate.
        assert!((s.center.x - s.center.y).abs() < 1e-9 && (s.center.y - s.center.z).abs() < 1e-9);
        assert!((s.radius - s.center.x).abs() < 1e-9);
    }

    #[test]
    fn four_walls_full_rank() {
        let mut s = corner();
        s.push(wall(Vec3::new(100.0, 5.0, 5.0), Vec3::new(1.0, 0.0, 0.0), 1.0));
        let sys = assemble_sqem(&s, 1e-2).unwrap();
        assert_eq!(sys.case, SqemCase::FullRank);
        let out = solve_sqem(&sys, &Sphere::new(Vec3::new(1.0, 2.0, 3.0), 1.0)).unwrap();
        let direct = sys.a.lu().solve(&sys.b).unwrap();
        assert!((to_vec4(&out) - direct).norm() < 1e-9 * direct.norm());
        assert!((out.radius - 50.0).abs() < 1e-9 && (out.center - Vec3::new(50.0, 50.0, 50.0)).norm() < 1e-9);
        assert!(sys.rms(&out) < 1e-6);
    }

    #[test]
    fn solve_is_idempotent_and_never_worse() {
        let sys = assemble_sqem(&slab(), 1e-2).unwrap();
        let start = Sphere::new(Vec3::new(10.0, 20.0, 170.0), 5.0);
        let once = solve_sqem(&sys, &start).unwrap();
        let twice = solve_sqem(&sys, &once).unwrap();
        assert!((to_vec4(&once) - to_vec4(&twice)).norm() < 1e-9);
        assert!(sys.residual(&to_vec4(&once)) <= sys.residual(&to_vec4(&start)));
    }

    #[test]
    fn under_cannot_solve() {
        let s = vec![wall(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), 1.0)];
        let sys = assemble_sqem(&s, 1e-2).unwrap();
        assert!(solve_sqem(&sys, &Sphere::new(Vec3::zeros(), 1.0)).is_err());
        assert!(assemble_sqem(&[], 1e-2).is_err());
    }

    #[test]
    fn duplicating_samples_keeps_case() {
        for set in [slab(), corner()] {
            let once = assemble_sqem(&set, 1e-2).unwrap();
            let doubled: Vec<Sample> = set.iter().chain(set.iter()).copied().collect();
            assert_eq!(assemble_sqem(&doubled, 1e-2).unwrap().case, once.case);
        }
    }
}
