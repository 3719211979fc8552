//! Evaluation of a medial mesh: structure error ratio, triangle quality,
//! topology error and two-sided Hausdorff distance.

mod hausdorff;
mod mser;
mod quality;
mod report;
mod topology;

pub use hausdorff::{hausdorff, Envelope, HausdorffReport};
pub use mser::{mser, recover_second_tangent, subdivide, MserReport, TangentSearch};
pub use quality::{face_quality, quantile, triangle_quality};
pub use report::{evaluate, MetricsReport};
pub use topology::{expected_euler, ter};
