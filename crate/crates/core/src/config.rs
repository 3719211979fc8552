use serde::{Deserialize, Serialize};

/// Every tunable of the pipeline. Defaults reproduce the reference settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Pin radius is `bbox_diag / gamma`.
    pub gamma: f64,
    /// Kernel width factor: `sigma = c_sigma * sqrt(area / n)`.
    pub c_sigma: f64,
    /// Sharp-feature dihedral deviation from a flat angle, degrees.
    pub phi_deg: f64,
    /// Neighbors per particle in the energy.
    pub knn: usize,
    /// Inner loop stops when every projected gradient is below this.
    pub grad_tol: f64,
    /// Outer loop stops when the relative change of seam+junction count is below this.
    pub outer_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub lbfgs_memory: usize,
    /// Recompute neighbor lists at every energy evaluation instead of once per inner loop.
    pub knn_per_eval: bool,
    pub seed: u64,
    /// Interior samples per cell, distributed over pieces by volume.
    pub samples_per_cell: usize,
    pub samples_per_piece: usize,
    pub min_samples_per_cell: usize,
    /// Samples taken on each bisector face.
    pub samples_per_face: usize,
    /// Singular-value ratio below which a direction counts as unconstrained.
    pub tau_rank: f64,
    /// Angle below which two sample directions share a cluster, degrees.
    pub cluster_angle_deg: f64,
    /// Cap on feature-preservation insertions per outer iteration, as a fraction of the sphere count.
    pub insert_cap: f64,
    pub hd_samples: usize,
    /// Worker threads; 0 uses all available cores.
    pub threads: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            gamma: 40.0,
            c_sigma: 0.3,
            phi_deg: 30.0,
            knn: 10,
            grad_tol: 5e-3,
            outer_tol: 3e-4,
            max_outer: 30,
            max_inner: 100,
            lbfgs_memory: 7,
            knn_per_eval: true,
            seed: 1,
            samples_per_cell: 64,
            samples_per_piece: 4,
            min_samples_per_cell: 32,
            samples_per_face: 16,
            tau_rank: 1e-2,
            cluster_angle_deg: 30.0,
            insert_cap: 0.2,
            hd_samples: 100_000,
            threads: 0,
        }
    }
}

impl Config {
    pub fn phi(&self) -> f64 {
        self.phi_deg.to_radians()
    }

    pub fn cluster_angle(&self) -> f64 {
        self.cluster_angle_deg.to_radians()
    }
}
