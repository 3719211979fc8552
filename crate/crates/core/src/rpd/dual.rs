use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Rpd, Sphere};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MedialEdge {
    pub v: [usize; 2],
    pub valid: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MedialFace {
    pub v: [usize; 3],
    pub valid: bool,
    pub sheet: Option<usize>,
}

/// An ordered chain of seam spheres.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seam {
    pub spheres: Vec<usize>,
    pub closed: bool,
}

/// Spheres connected by edges and triangles, with sheet/seam/junction labels.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MedialMesh {
    pub spheres: Vec<Sphere>,
    pub edges: Vec<MedialEdge>,
    pub faces: Vec<MedialFace>,
    pub seams: Vec<Seam>,
    pub junctions: Vec<usize>,
    /// For each sphere, its index in the sphere list the diagram was built from.
    pub source: Vec<usize>,
}

impl MedialMesh {
    /// Edge index by unordered endpoint pair.
    pub fn edge_map(&self) -> HashMap<(usize, usize), usize> {
        self.edges
            .iter()
            .enumerate()
            .map(|(k, e)| ((e.v[0].min(e.v[1]), e.v[0].max(e.v[1])), k))
            .collect()
    }

    pub fn valid_edges(&self) -> impl Iterator<Item = &MedialEdge> {
        self.edges.iter().filter(|e| e.valid)
    }

    pub fn valid_faces(&self) -> impl Iterator<Item = &MedialFace> {
        self.faces.iter().filter(|f| f.valid)
    }

    /// `V - E + F` over valid elements, where spheres count once.
    pub fn euler(&self) -> i64 {
        self.spheres.len() as i64 - self.valid_edges().count() as i64 + self.valid_faces().count() as i64
    }

    /// Per sphere, the sorted list of valid-edge neighbors.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.spheres.len()];
        for e in self.valid_edges() {
            adj[e.v[0]].push(e.v[1]);
            adj[e.v[1]].push(e.v[0]);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// Number of distinct sheet labels.
    pub fn sheet_count(&self) -> usize {
        self.faces.iter().filter_map(|f| f.sheet).collect::<BTreeSet<_>>().len()
    }

    /// Total area of valid faces.
    pub fn valid_area(&self) -> f64 {
        self.valid_faces()
            .map(|f| {
                let [a, b, c] = f.v.map(|i| self.spheres[i].center);
                crate::geom::triangle_area(&a, &b, &c)
            })
            .sum()
    }
}

/// Dual of the diagram: an edge where two cells share a bisector face of
/// area above `eps^2`, a triangle where three cells share a power edge longer
/// than `eps` and all three edges exist. Spheres with empty cells are left
/// out and the rest renumbered.
pub fn dual_medial_mesh(rpd: &Rpd, spheres: &[Sphere]) -> MedialMesh {
    let eps = rpd.eps;
    let mut remap = vec![usize::MAX; spheres.len()];
    let mut kept = Vec::new();
    let mut source = Vec::new();
    for (i, c) in rpd.cells.iter().enumerate() {
        if !c.is_empty() {
            remap[i] = kept.len();
            kept.push(spheres[i]);
            source.push(i);
        }
    }
    let mut edges = Vec::new();
    let mut have: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (&(i, j), f) in &rpd.faces {
        if f.max_area() > eps * eps && remap[i] != usize::MAX && remap[j] != usize::MAX {
            have.insert((i, j));
            edges.push(MedialEdge { v: [remap[i], remap[j]], valid: true });
        }
    }
    let mut faces = Vec::new();
    for (&[a, b, c], &len) in &rpd.power_edges {
        if len > eps && have.contains(&(a, b)) && have.contains(&(b, c)) && have.contains(&(a, c)) {
            faces.push(MedialFace { v: [remap[a], remap[b], remap[c]], valid: true, sheet: None });
        }
    }
    MedialMesh { spheres: kept, edges, faces, seams: Vec::new(), junctions: Vec::new(), source }
}
