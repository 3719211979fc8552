use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{mix_seed, BisectorFace, PowerCell, Rpd, Sample};
use crate::config::Config;
use crate::geom::{tet_volume, SurfaceIndex, Vec3};

/// Sample at `x` with its closest surface point and direction toward it.
pub fn make_sample(index: &SurfaceIndex, x: Vec3, weight: f64) -> Sample {
    let h = index.closest(&x);
    let n = if h.dist > 1e-12 * index.bbox_diag() {
        (h.point.position - x) / h.dist
    } else {
        h.point.normal
    };
    Sample { x, foot: h.point, n, dist: h.dist, weight }
}

/// Uniform point in a tetrahedron.
fn in_tet(rng: &mut ChaCha8Rng, t: &[Vec3; 4]) -> Vec3 {
    let e: [f64; 4] = [0; 4].map(|_| -(1.0 - rng.gen::<f64>()).ln());
    let s: f64 = e.iter().sum();
    (t[0] * e[0] + t[1] * e[1] + t[2] * e[2] + t[3] * e[3]) / s
}

/// Split `total` items over `weights` by largest remainder.
fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 || weights.is_empty() {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut out: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut rest: Vec<(f64, usize)> = exact.iter().enumerate().map(|(i, e)| (e - e.floor(), i)).collect();
    rest.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = total - out.iter().sum::<usize>();
    for &(_, i) in rest.iter().take(missing) {
        out[i] += 1;
    }
    out
}

/// Draw volumetric samples for one cell: each piece gets its barycenter plus
/// stratified interior points, `per_piece` at least and `per_cell` spread by
/// volume, with at least `min_per_cell` in total.
pub fn sample_cell(cell: &mut PowerCell, index: &SurfaceIndex, cfg: &Config, seed: u64) {
    cell.samples.clear();
    cell.clusters.clear();
    if cell.pieces.is_empty() {
        return;
    }
    let vols: Vec<f64> = cell.pieces.iter().map(|p| p.volume()).collect();
    let mut counts: Vec<usize> = apportion(&vols, cfg.samples_per_cell)
        .into_iter()
        .map(|c| c + cfg.samples_per_piece.max(1))
        .collect();
    let total: usize = counts.iter().sum();
    if total < cfg.min_samples_per_cell {
        for (c, extra) in counts.iter_mut().zip(apportion(&vols, cfg.min_samples_per_cell - total)) {
            *c += extra;
        }
    }
    for (k, piece) in cell.pieces.iter().enumerate() {
        let count = counts[k];
        let w = vols[k] / count as f64;
        cell.samples.push(make_sample(index, piece.centroid(), w));
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, cell.sphere as u64, piece.source_tet as u64, k as u64]));
        let tets = piece.tets();
        let tv: Vec<f64> = tets.iter().map(|t| tet_volume(&t[0], &t[1], &t[2], &t[3]).max(0.0)).collect();
        for (t, m) in tets.iter().zip(apportion(&tv, count - 1)) {
            for _ in 0..m {
                let x = in_tet(&mut rng, t);
                cell.samples.push(make_sample(index, x, w));
            }
        }
    }
}

/// Uniform point in a convex polygon via its fan triangulation.
fn in_polygon(rng: &mut ChaCha8Rng, pts: &[Vec3], cdf: &[f64]) -> Vec3 {
    let u = rng.gen::<f64>() * cdf.last().copied().unwrap_or(0.0);
    let k = cdf.partition_point(|&c| c < u).min(cdf.len() - 1);
    let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
    if a + b > 1.0 {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    pts[0] + (pts[k + 1] - pts[0]) * a + (pts[k + 2] - pts[0]) * b
}

fn sample_face(face: &mut BisectorFace, index: &SurfaceIndex, per_face: usize, seed: u64) {
    face.samples.clear();
    face.clusters.clear();
    let areas: Vec<f64> = face
        .polygons
        .iter()
        .map(|(_, p)| crate::geom::polytope::polygon_area(p))
        .collect();
    let counts = apportion(&areas, per_face);
    for (k, ((tet, pts), extra)) in face.polygons.iter().zip(counts).enumerate() {
        if areas[k] <= 0.0 {
            continue;
        }
        let w = areas[k] / (extra + 1) as f64;
        let centroid = pts.iter().sum::<Vec3>() / pts.len() as f64;
        face.samples.push(make_sample(index, centroid, w));
        // Corners reach thin slivers of the face that area sampling misses.
        for p in pts {
            face.samples.push(make_sample(index, centroid + (p - centroid) * 0.99, 0.0));
        }
        let mut cdf = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        for i in 1..pts.len() - 1 {
            acc += crate::geom::triangle_area(&pts[0], &pts[i], &pts[i + 1]);
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, face.i as u64, face.j as u64, *tet as u64, k as u64]));
        for _ in 0..extra {
            let x = in_polygon(&mut rng, pts, &cdf);
            face.samples.push(make_sample(index, x, w));
        }
    }
}

/// Sample every bisector face.
pub fn sample_faces(rpd: &mut Rpd, index: &SurfaceIndex, per_face: usize, seed: u64) {
    rpd.faces
        .par_iter_mut()
        .for_each(|(_, f)| sample_face(f, index, per_face, seed ^ 0xFACE));
}

/// Sample all cells and bisector faces.
pub fn sample_rpd(rpd: &mut Rpd, index: &SurfaceIndex, cfg: &Config, seed: u64) {
    rpd.cells.par_iter_mut().for_each(|c| sample_cell(c, index, cfg, seed));
    sample_faces(rpd, index, cfg.samples_per_face, seed);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apportion_sums() {
        assert_eq!(apportion(&[1.0, 1.0, 2.0], 8), vec![2, 2, 4]);
        assert_eq!(apportion(&[1.0, 1.0, 1.0], 4).iter().sum::<usize>(), 4);
        assert_eq!(apportion(&[], 4), Vec::<usize>::new());
    }
}
