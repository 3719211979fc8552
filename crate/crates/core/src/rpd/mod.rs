//! Restricted power diagram of a sphere set over a tetrahedral domain, its
//! volumetric samples, sub-volume clusters and dual medial mesh.

mod cluster;
mod dual;
mod power;
mod sampling;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geom::{ConvexCellPiece, SurfacePoint, Vec3};

pub use cluster::{cluster_samples, clusters_linked, subvolume_clusters};
pub use dual::{dual_medial_mesh, MedialEdge, MedialFace, MedialMesh, Seam};
pub use power::{bisector_plane, compute_rpd};
pub use sampling::{sample_cell, sample_faces, sample_rpd};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SphereClass {
    /// Two tangent regions: interior of a sheet.
    T2Sheet,
    /// Three tangent regions: on a seam.
    T3Seam,
    /// Four or more tangent regions: at a junction.
    T4Junction,
    /// Zero-radius sphere on a convex sharp edge.
    T1Edge,
    /// Zero-radius sphere at a convex corner.
    T1Corner,
    /// Single tangent region: a spike or unresolved sphere.
    T1Spike,
    #[default]
    Unknown,
}

impl SphereClass {
    pub fn is_seam_like(self) -> bool {
        matches!(self, SphereClass::T3Seam | SphereClass::T4Junction | SphereClass::T1Corner)
    }

    pub fn label(self) -> &'static str {
        match self {
            SphereClass::T2Sheet => "T2",
            SphereClass::T3Seam => "T3",
            SphereClass::T4Junction => "T4",
            SphereClass::T1Edge => "T1_2",
            SphereClass::T1Corner => "T1_3",
            SphereClass::T1Spike => "T1_spike",
            SphereClass::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
    pub class: SphereClass,
    pub pinned: bool,
}

impl Sphere {
    pub fn new(center: Vec3, radius: f64) -> Self {
        Self { center, radius, class: SphereClass::Unknown, pinned: false }
    }

    pub fn pinned(center: Vec3, class: SphereClass) -> Self {
        Self { center, radius: 0.0, class, pinned: true }
    }

    pub fn power(&self, x: &Vec3) -> f64 {
        (x - self.center).norm_squared() - self.radius * self.radius
    }
}

/// A volumetric sample of a cell or a bisector face with its closest surface point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub x: Vec3,
    pub foot: SurfacePoint,
    /// Unit direction from `x` toward `foot`; the outward surface normal when
    /// `x` lies on the surface.
    pub n: Vec3,
    pub dist: f64,
    /// Volume (or area, for face samples) represented by this sample.
    pub weight: f64,
}

#[derive(Clone, Debug, Default)]
pub struct PowerCell {
    pub sphere: usize,
    pub pieces: Vec<ConvexCellPiece>,
    pub neighbors: Vec<usize>,
    pub samples: Vec<Sample>,
    /// Sample index groups, largest first.
    pub clusters: Vec<Vec<usize>>,
    pub touches_boundary: bool,
    pub volume: f64,
}

impl PowerCell {
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}

/// The bisector face between cells `i < j`, seen from both sides.
#[derive(Clone, Debug, Default)]
pub struct BisectorFace {
    pub i: usize,
    pub j: usize,
    /// Area as accumulated from cell `i` and from cell `j`.
    pub area: [f64; 2],
    /// Polygons from the side with the larger area.
    pub polygons: Vec<(usize, Vec<Vec3>)>,
    pub samples: Vec<Sample>,
    pub clusters: Vec<Vec<usize>>,
}

impl BisectorFace {
    pub fn max_area(&self) -> f64 {
        self.area[0].max(self.area[1])
    }
}

#[derive(Clone, Debug, Default)]
pub struct Rpd {
    pub cells: Vec<PowerCell>,
    /// Keyed by `(i, j)` with `i < j`.
    pub faces: BTreeMap<(usize, usize), BisectorFace>,
    /// Length of the power edge shared by three cells, keyed by sorted triple.
    pub power_edges: BTreeMap<[usize; 3], f64>,
    /// Spheres dropped as exact duplicates of a lower-indexed sphere.
    pub dropped: Vec<usize>,
    pub eps: f64,
}

impl Rpd {
    pub fn face(&self, a: usize, b: usize) -> Option<&BisectorFace> {
        self.faces.get(&(a.min(b), a.max(b)))
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    /// Index of the cell whose pieces contain `x`, if any.
    pub fn locate(&self, x: &Vec3, tol: f64) -> Option<usize> {
        self.cells
            .iter()
            .position(|c| c.pieces.iter().any(|p| piece_contains(p, x, tol)))
    }
}

/// Whether `x` lies inside a convex piece up to `tol`.
pub fn piece_contains(p: &ConvexCellPiece, x: &Vec3, tol: f64) -> bool {
    (0..p.faces.len()).all(|f| {
        let pts = p.face_points(f);
        let n = crate::geom::polytope::polygon_normal(&pts);
        n.dot(&(x - pts[0])) <= tol
    })
}

/// Deterministic 64-bit mix of several integers, for per-item RNG seeds.
pub(crate) fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        // splitmix64 finalizer
        h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}
