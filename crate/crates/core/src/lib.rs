//! Structure-aware medial axis transform of tetrahedral solids.
//!
//! The pipeline places medial spheres by particle repulsion, keeps them on the
//! medial axis with spherical quadric error metrics evaluated over a
//! restricted power diagram, and dualizes the diagram into a medial mesh made
//! of sheets, seams and junctions.
//!
//! ```
//! use medial_core::{fixtures, geom::SurfaceIndex, spheres::shrink_sphere};
//!
//! let dom = fixtures::slab(1000.0, 1000.0, 200.0, 4, 4, 1);
//! let index = SurfaceIndex::new(&dom);
//! let mid = medial_core::Vec3::new(500.0, 500.0, 0.0);
//! let pin = index.surface_point_at(index.closest(&mid).point.tri, mid);
//! let s = shrink_sphere(&pin, &index, dom.bbox_diag);
//! assert!((s.sphere.radius - 100.0).abs() < 1e-6);
//! ```

pub mod config;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod geom;
pub mod mesh_io;
pub mod metrics;
pub mod optimizer;
pub mod rpd;
pub mod spheres;
pub mod structure;

pub use config::Config;
pub use error::{MedialError, Result};
pub use geom::Vec3;
pub use mesh_io::TetDomain;
pub use rpd::{MedialMesh, Sphere, SphereClass};

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/domain.md")]
    pub mod domain {}
    #[doc = include_str!("../../../book/src/power_diagram.md")]
    pub mod power_diagram {}
    #[doc = include_str!("../../../book/src/sqem.md")]
    pub mod sqem {}
    #[doc = include_str!("../../../book/src/particles.md")]
    pub mod particles {}
    #[doc = include_str!("../../../book/src/structure.md")]
    pub mod structure {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    pub mod metrics {}
    #[doc = include_str!("../../../book/src/formats.md")]
    pub mod formats {}
}
