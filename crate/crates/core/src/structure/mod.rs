//! Sphere classification, sheet/seam/junction extraction, pruning of edges
//! that cross sub-volumes, and removal of closed pockets.

mod extract;
mod prune;
mod thin;

pub use extract::extract_structure;
pub use prune::{cluster_sets_match, prune_invalid, PruneReport};
pub use thin::{enforce_thinness, pockets};

use crate::rpd::{Sphere, SphereClass};

/// Class from the number of tangent clusters. Pinned feature spheres keep
/// their class.
pub fn classify_sphere(sphere: &Sphere, n_clusters: usize) -> SphereClass {
    if sphere.pinned {
        return sphere.class;
    }
    match n_clusters {
        0 | 1 => SphereClass::T1Spike,
        2 => SphereClass::T2Sheet,
        3 => SphereClass::T3Seam,
        _ => SphereClass::T4Junction,
    }
}
