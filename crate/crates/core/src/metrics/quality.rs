use crate::geom::{triangle_area, Vec3};
use crate::rpd::MedialMesh;

/// `(6 / sqrt 3) * S / (p * h)` with area `S`, half-perimeter `p` and longest
/// edge `h`; 1 for an equilateral triangle, 0 when degenerate.
pub fn face_quality(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let s = triangle_area(a, b, c);
    let (l0, l1, l2) = ((b - a).norm(), (c - b).norm(), (a - c).norm());
    let p = 0.5 * (l0 + l1 + l2);
    let h = l0.max(l1).max(l2);
    if s <= 0.0 || p * h <= 0.0 {
        return 0.0;
    }
    (6.0 / 3f64.sqrt() * s / (p * h)).min(1.0)
}

/// Average quality over valid faces and the per-face values in face order.
pub fn triangle_quality(mesh: &MedialMesh) -> (f64, Vec<f64>) {
    let q: Vec<f64> = mesh
        .valid_faces()
        .map(|f| {
            let [a, b, c] = f.v.map(|i| mesh.spheres[i].center);
            face_quality(&a, &b, &c)
        })
        .collect();
    let avg = if q.is_empty() { 0.0 } else { q.iter().sum::<f64>() / q.len() as f64 };
    (avg, q)
}

/// Linear-interpolated quantile, `t` in `[0, 1]`.
pub fn quantile(values: &[f64], t: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let x = t.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (x - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let e = face_quality(&Vec3::zeros(), &Vec3::new(1.0, 0.0, 0.0), &Vec3::new(0.5, 3f64.sqrt() / 2.0, 0.0));
        assert!((e - 1.0).abs() < 1e-9);
        let r = face_quality(&Vec3::zeros(), &Vec3::new(1.0, 0.0, 0.0), &Vec3::new(0.0, 1.0, 0.0));
        let expect = (6.0 / 3f64.sqrt()) * 0.5 / ((2.0 + 2f64.sqrt()) / 2.0 * 2f64.sqrt());
        assert!((r - expect).abs() < 1e-12 && (r - 0.718).abs() < 1e-3);
        let needle = face_quality(&Vec3::zeros(), &Vec3::new(1.0, 0.0, 0.0), &Vec3::new(0.5, 1e-9, 0.0));
        assert!(needle < 1e-8);
        assert_eq!(face_quality(&Vec3::zeros(), &Vec3::zeros(), &Vec3::zeros()), 0.0);
    }

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[], 0.5), 0.0);
        assert!((quantile(&[0.0, 1.0], 0.85) - 0.85).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn quality_in_unit_interval(p in proptest::array::uniform9(-10.0..10.0f64)) {
            let q = face_quality(&Vec3::new(p[0], p[1], p[2]), &Vec3::new(p[3], p[4], p[5]), &Vec3::new(p[6], p[7], p[8]));
            prop_assert!((0.0..=1.0).contains(&q));
        }
    }
}
