//! Poisson-disk sampling of the boundary surface.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SurfaceIndex, SurfacePoint, Vec3};
use crate::mesh_io::{FeatureKind, TetDomain};

/// Uniform hash grid storing accepted points.
struct Grid {
    cell: f64,
    min_dist_sq: f64,
    cells: HashMap<[i64; 3], Vec<Vec3>>,
}

impl Grid {
    fn new(min_dist: f64) -> Self {
        Self { cell: min_dist, min_dist_sq: min_dist * min_dist, cells: HashMap::new() }
    }

    fn key(&self, p: &Vec3) -> [i64; 3] {
        [0, 1, 2].map(|k| (p[k] / self.cell).floor() as i64)
    }

    fn free(&self, p: &Vec3) -> bool {
        let k = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(v) = self.cells.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        if v.iter().any(|q| (q - p).norm_squared() < self.min_dist_sq) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn insert(&mut self, p: Vec3) {
        let k = self.key(&p);
        self.cells.entry(k).or_default().push(p);
    }
}

/// Points on the surface with pairwise distance at least `min_dist`, by
/// area-weighted dart throwing followed by a sweep over a fine barycentric
/// lattice of every triangle so that no triangle can take another point.
/// `seeds` are accepted first unconditionally.
pub fn poisson_disk_surface(
    index: &SurfaceIndex,
    min_dist: f64,
    seed: u64,
    seeds: Vec<SurfacePoint>,
) -> Vec<SurfacePoint> {
    let mut grid = Grid::new(min_dist);
    let mut out = Vec::new();
    for s in seeds {
        grid.insert(s.position);
        out.push(s);
    }
    let n = index.num_tris();
    let mut cdf = Vec::with_capacity(n);
    let mut total = 0.0;
    for f in 0..n {
        total += index.tri_area(f);
        cdf.push(total);
    }
    if total <= 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let expected = (total / (std::f64::consts::PI * 0.25 * min_dist * min_dist)).ceil() as usize + 1;
    let max_misses = 30 * expected.max(10);
    let mut misses = 0;
    while misses < max_misses {
        let u: f64 = rng.gen::<f64>() * total;
        let f = cdf.partition_point(|&c| c < u).min(n - 1);
        let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
        if a + b > 1.0 {
            a = 1.0 - a;
            b = 1.0 - b;
        }
        let t = index.tri(f);
        let p = t[0] + (t[1] - t[0]) * a + (t[2] - t[0]) * b;
        if grid.free(&p) {
            grid.insert(p);
            out.push(index.surface_point_at(f, p));
            misses = 0;
        } else {
            misses += 1;
        }
    }
    // Maximality sweep.
    let step = 0.25 * min_dist;
    for f in 0..n {
        let t = index.tri(f);
        let longest = (0..3).map(|k| (t[(k + 1) % 3] - t[k]).norm()).fold(0.0, f64::max);
        let m = ((longest / step).ceil() as usize).max(1);
        for i in 0..=m {
            for j in 0..=(m - i) {
                let (a, b) = (i as f64 / m as f64, j as f64 / m as f64);
                let p = t[0] + (t[1] - t[0]) * a + (t[2] - t[0]) * b;
                if grid.free(&p) {
                    grid.insert(p);
                    out.push(index.surface_point_at(f, p));
                }
            }
        }
    }
    out
}

/// Pins for sphere-shrinking: disks of radius `bbox_diag / gamma` that do not
/// overlap (centers at least twice that apart), plus forced pins every
/// `bbox_diag / gamma` along concave-sharp polylines whose normals bisect the
/// two incident faces.
pub fn poisson_disk_pins(domain: &TetDomain, index: &SurfaceIndex, gamma: f64, seed: u64) -> Vec<SurfacePoint> {
    let rho = domain.bbox_diag / gamma;
    let mut forced = Vec::new();
    for pl in domain.polylines.iter().filter(|p| p.kind == FeatureKind::Concave) {
        for (p, e) in walk_polyline(domain, &pl.verts, pl.closed, rho) {
            let edge = &domain.edges[e];
            let n = (index.tri_normal(edge.tris[0]) + index.tri_normal(edge.tris[1])).normalize();
            forced.push(SurfacePoint { position: p, normal: n, tri: edge.tris[0] });
        }
    }
    poisson_disk_surface(index, 2.0 * rho, seed, forced)
}

/// Points at arc-length spacing about `spacing` along a vertex chain (endpoints
/// included for open chains), each with the boundary edge it lies on.
pub fn walk_polyline(domain: &TetDomain, verts: &[usize], closed: bool, spacing: f64) -> Vec<(Vec3, usize)> {
    let mut segs: Vec<(usize, usize)> = verts.windows(2).map(|w| (w[0], w[1])).collect();
    if closed && verts.len() > 2 {
        segs.push((*verts.last().unwrap(), verts[0]));
    }
    let lens: Vec<f64> = segs.iter().map(|&(a, b)| (domain.vertices[b] - domain.vertices[a]).norm()).collect();
    let total: f64 = lens.iter().sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let count = (total / spacing).round().max(1.0) as usize;
    let n_pts = if closed { count } else { count + 1 };
    let mut out = Vec::with_capacity(n_pts);
    let mut seg = 0;
    let mut acc = 0.0;
    for i in 0..n_pts {
        let s = total * i as f64 / count as f64;
        while seg + 1 < segs.len() && acc + lens[seg] < s {
            acc += lens[seg];
            seg += 1;
        }
        let (a, b) = segs[seg];
        let t = if lens[seg] > 0.0 { ((s - acc) / lens[seg]).clamp(0.0, 1.0) } else { 0.0 };
        let p = domain.vertices[a] + (domain.vertices[b] - domain.vertices[a]) * t;
        let e = domain.edge_between(a, b).expect("polyline follows boundary edges");
        out.push((p, e));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mesh_io::detect_features;

    fn cube_index() -> (TetDomain, SurfaceIndex) {
        let d = detect_features(&fixtures::box_mesh(Vec3::repeat(1000.0), [2, 2, 2]), 30f64.to_radians(), &[]);
        let idx = SurfaceIndex::new(&d);
        (d, idx)
    }

    fn min_pair_dist(p: &[SurfacePoint]) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..p.len() {
            for j in 0..i {
                m = m.min((p[i].position - p[j].position).norm());
            }
        }
        m
    }

    #[test]
    fn cube_pins_respect_spacing_and_count() {
        let (d, idx) = cube_index();
        let pins = poisson_disk_pins(&d, &idx, 40.0, 1);
        let r = d.bbox_diag / 40.0;
        assert!((r - 43.30127).abs() < 1e-4);
        assert!(min_pair_dist(&pins) >= r);
        assert!((400..=900).contains(&pins.len()), "{}", pins.len());
        for p in &pins {
            assert!((p.normal.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tiny_gamma_gives_one_pin() {
        let (d, idx) = cube_index();
        assert_eq!(poisson_disk_pins(&d, &idx, 0.2, 1).len(), 1);
    }

    #[test]
    fn doubling_gamma_doubles_count() {
        let (d, idx) = cube_index();
        let a = poisson_disk_pins(&d, &idx, 20.0, 3).len();
        let b = poisson_disk_pins(&d, &idx, 40.0, 3).len();
        assert!(b >= 2 * a, "{a} -> {b}");
    }

    #[test]
    fn sampling_is_maximal_on_lattice() {
        let (_, idx) = cube_index();
        let pts = poisson_disk_surface(&idx, 100.0, 9, Vec::new());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // No random surface point is farther than the disk diameter from every sample.
        for _ in 0..2000 {
            let f = rng.gen_range(0..idx.num_tris());
            let t = idx.tri(f);
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
            let p = t[0] + (t[1] - t[0]) * a + (t[2] - t[0]) * b;
            let near = pts.iter().map(|q| (q.position - p).norm()).fold(f64::INFINITY, f64::min);
            assert!(near < 100.0 * 1.2, "{near}");
        }
    }

    #[test]
    fn concave_edges_get_forced_pins() {
        let d = detect_features(&fixtures::l_shape(1000.0, 500.0, 2), 30f64.to_radians(), &[]);
        let idx = SurfaceIndex::new(&d);
        let pins = poisson_disk_pins(&d, &idx, 40.0, 1);
        let rho = d.bbox_diag / 40.0;
        let on_crease = pins
            .iter()
            .filter(|p| (p.position.x - 500.0).abs() < 1e-9 && (p.position.y - 500.0).abs() < 1e-9)
            .count();
        let len = 1000.0 * 0.5;
        assert_eq!(on_crease, (len / rho).round() as usize + 1);
    }
}
