//! Per-sphere solvers: spherical quadric error metrics, sphere shrinking,
//! tangent-point refinement and the projection policy that combines them.

mod project;
mod shrink;
mod sqem;
mod tangent;

pub use project::{cluster_regions, project_sphere, Projection, ProjectionMethod};
pub use shrink::{shrink_sphere, Shrunk};
pub use sqem::{assemble_sqem, classify_case, solve_sqem, SqemCase, SqemSystem};
pub use tangent::{optimize_sphere_tangents, Tangents};
