//! Analytic test shapes as tetrahedral domains.
//!
//! Boxes and extrusions use the Kuhn subdivision (six tets per hexahedron
//! around the main diagonal), which is conforming across neighboring cells.

use std::collections::HashMap;

use crate::geom::{tet_volume, Vec3};
use crate::mesh_io::TetDomain;

/// Six tets of the unit hex around the diagonal from corner 0 to corner 7,
/// corners numbered `x + 2y + 4z`.
const KUHN: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

fn orient(verts: &[Vec3], mut t: [usize; 4]) -> [usize; 4] {
    if tet_volume(&verts[t[0]], &verts[t[1]], &verts[t[2]], &verts[t[3]]) < 0.0 {
        t.swap(2, 3);
    }
    t
}

/// Tet mesh of the union of occupied cells of a `dims` grid with cell size `h`.
pub fn hex_grid(dims: [usize; 3], h: Vec3, occupied: impl Fn(usize, usize, usize) -> bool) -> TetDomain {
    let [nx, ny, nz] = dims;
    let lattice = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut verts = Vec::new();
    let mut tets = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if !occupied(i, j, k) {
                    continue;
                }
                let corner: Vec<usize> = (0..8)
                    .map(|c| {
                        let (a, b, d) = (i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                        *ids.entry(lattice(a, b, d)).or_insert_with(|| {
                            verts.push(Vec3::new(a as f64 * h.x, b as f64 * h.y, d as f64 * h.z));
                            verts.len() - 1
                        })
                    })
                    .collect();
                for t in KUHN {
                    tets.push(orient(&verts, t.map(|c| corner[c])));
                }
            }
        }
    }
    TetDomain::from_parts(verts, tets).expect("grid fixture is a valid domain")
}

/// Axis-aligned box `[0, size]` split into `res` hexes per axis.
pub fn box_mesh(size: Vec3, res: [usize; 3]) -> TetDomain {
    let h = Vec3::new(size.x / res[0] as f64, size.y / res[1] as f64, size.z / res[2] as f64);
    hex_grid(res, h, |_, _, _| true)
}

/// Thin box `[0,sx] x [0,sy] x [0,sz]`.
pub fn slab(sx: f64, sy: f64, sz: f64, nx: usize, ny: usize, nz: usize) -> TetDomain {
    box_mesh(Vec3::new(sx, sy, sz), [nx, ny, nz])
}

/// L-shaped extrusion: `[0,size]^2` minus its upper-right quadrant, extruded
/// to `height`. `n` hexes per half side.
pub fn l_shape(size: f64, height: f64, n: usize) -> TetDomain {
    let h = size / (2 * n) as f64;
    let nz = ((height / h).round() as usize).max(1);
    hex_grid([2 * n, 2 * n, nz], Vec3::new(h, h, height / nz as f64), |i, j, _| i < n || j < n)
}

/// Icosphere of `radius` centered at the origin, refined `level` times, with
/// one tet per surface triangle joined to the center (vertex 0).
pub fn ball(radius: f64, level: usize) -> TetDomain {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Vec3::from(*p).normalize())
    .collect();
    let mut f: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut m = |a: usize, b: usize, v: &mut Vec<Vec3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                v.push(((v[a] + v[b]) * 0.5).normalize());
                v.len() - 1
            })
        };
        let mut next = Vec::with_capacity(f.len() * 4);
        for &[a, b, c] in &f {
            let ab = m(a, b, &mut v);
            let bc = m(b, c, &mut v);
            let ca = m(c, a, &mut v);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        f = next;
    }
    let mut verts = vec![Vec3::zeros()];
    verts.extend(v.iter().map(|p| p * radius));
    let tets = f.iter().map(|&[a, b, c]| orient(&verts, [0, a + 1, b + 1, c + 1])).collect();
    TetDomain::from_parts(verts, tets).expect("ball fixture is a valid domain")
}

/// Solid torus around the z axis with major radius `big_r` and circular
/// cross-section of radius `small_r`, sampled by a 16-gon with a center and
/// two rings, swept over `segments` slices. Each prism is split into three
/// tets with diagonals chosen by the smallest global vertex index.
pub fn torus(big_r: f64, small_r: f64, segments: usize) -> TetDomain {
    const SIDES: usize = 16;
    let per_slice = 1 + 2 * SIDES;
    let mut section: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for ring in [0.5, 1.0] {
        for s in 0..SIDES {
            let a = std::f64::consts::TAU * s as f64 / SIDES as f64;
            section.push((ring * small_r * a.cos(), ring * small_r * a.sin()));
        }
    }
    let inner = |s: usize| 1 + s % SIDES;
    let outer = |s: usize| 1 + SIDES + s % SIDES;
    let mut tris: Vec<[usize; 3]> = Vec::new();
    for s in 0..SIDES {
        tris.push([0, inner(s), inner(s + 1)]);
        tris.push([inner(s), outer(s), outer(s + 1)]);
        tris.push([inner(s), outer(s + 1), inner(s + 1)]);
    }
    let mut verts = Vec::with_capacity(segments * per_slice);
    for k in 0..segments {
        let phi = std::f64::consts::TAU * k as f64 / segments as f64;
        for &(dr, dz) in &section {
            let r = big_r + dr;
            verts.push(Vec3::new(r * phi.cos(), r * phi.sin(), dz));
        }
    }
    let mut tets = Vec::with_capacity(segments * tris.len() * 3);
    for k in 0..segments {
        let (b0, b1) = (k * per_slice, ((k + 1) % segments) * per_slice);
        for t in &tris {
            let prism = [b0 + t[0], b0 + t[1], b0 + t[2], b1 + t[0], b1 + t[1], b1 + t[2]];
            for tet in split_prism(prism) {
                tets.push(orient(&verts, tet));
            }
        }
    }
    TetDomain::from_parts(verts, tets).expect("torus fixture is a valid domain")
}

/// Split a prism (bottom `0,1,2`, top `3,4,5` with `i + 3` above `i`) into three
/// tets whose quad diagonals start at the smaller global index.
fn split_prism(v: [usize; 6]) -> [[usize; 4]; 3] {
    const ROT: [[usize; 6]; 6] = [
        [0, 1, 2, 3, 4, 5],
        [1, 2, 0, 4, 5, 3],
        [2, 0, 1, 5, 3, 4],
        [3, 5, 4, 0, 2, 1],
        [4, 3, 5, 1, 0, 2],
        [5, 4, 3, 2, 1, 0],
    ];
    let m = (0..6).min_by_key(|&i| v[i]).unwrap();
    let p = ROT[m].map(|i| v[i]);
    if p[1].min(p[5]) < p[2].min(p[4]) {
        [[p[0], p[1], p[2], p[5]], [p[0], p[1], p[5], p[4]], [p[0], p[4], p[5], p[3]]]
    } else {
        [[p[0], p[1], p[2], p[4]], [p[0], p[4], p[2], p[5]], [p[0], p[4], p[5], p[3]]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_volume_and_surface() {
        let d = box_mesh(Vec3::new(4.0, 1.0, 1.0), [8, 2, 2]);
        assert!((d.volume() - 4.0).abs() < 1e-12);
        assert!((d.enclosed_volume() - 4.0).abs() < 1e-12);
        assert_eq!(d.boundary_euler(), 2);
    }

    #[test]
    fn l_shape_volume() {
        let d = l_shape(1000.0, 500.0, 2);
        assert!((d.volume() - 0.75 * 1e6 * 500.0).abs() < 1e-3);
        assert!((d.volume() - d.enclosed_volume()).abs() / d.volume() < 1e-12);
    }

    #[test]
    fn ball_is_closed_sphere() {
        let d = ball(1.0, 2);
        assert_eq!(d.boundary_tris.len(), 320);
        assert_eq!(d.boundary_euler(), 2);
        assert!((d.volume() - d.enclosed_volume()).abs() < 1e-12);
    }

    #[test]
    fn torus_has_genus_one() {
        let d = torus(300.0, 100.0, 24);
        assert_eq!(d.boundary_euler(), 0);
        assert!((d.volume() - d.enclosed_volume()).abs() / d.volume() < 1e-9);
    }
}
