//! Particle optimization of medial spheres: initialization by sphere
//! shrinking, Gaussian repulsion minimized by L-BFGS under SQEM motion
//! constraints, projection back onto the medial axis and feature insertion.

mod features;
mod init;
mod lbfgs;
mod particle;
mod pipeline;

pub use features::preserve_features;
pub use init::{dedupe, feature_spheres, initialize, InitReport};
pub use lbfgs::{minimize, LbfgsParams, LbfgsResult};
pub use particle::{compute_sigma, particle_pair, project_gradient, symmetric_pairs, total_energy_forces, Motion};
pub use pipeline::{analyze, classify_all, inner_loop, motions, optimize_from, run_pipeline, InnerReport, OuterRecord, PipelineOutput};
