use medial_core::fixtures;
use medial_core::geom::SurfaceIndex;
use medial_core::mesh_io::detect_features;
use medial_core::optimizer::run_pipeline;
use medial_core::rpd::{compute_rpd, Sphere};
use medial_core::{Config, Vec3};
use proptest::prelude::*;

#[test]
fn l_shape_pipeline_produces_a_connected_axis() {
    let cfg = Config { hd_samples: 2000, ..Config::default() };
    let d = detect_features(&fixtures::l_shape(1000.0, 250.0, 2), cfg.phi(), &[]);
    let out = run_pipeline(&d, &cfg).unwrap();
    assert!(out.log.len() <= cfg.max_outer);
    assert!(out.mesh.valid_faces().count() > 0);
    assert!(out.sigma > 0.0);
    let index = SurfaceIndex::new(&d);
    // Every medial sphere lies inside the solid.
    for s in out.mesh.spheres.iter().filter(|s| !s.pinned) {
        assert!(index.signed_distance(&s.center) <= 1e-6 * d.bbox_diag);
    }
    // The shape is simply connected, so the axis is too.
    assert_eq!(out.mesh.euler(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_cells_partition_the_domain(seed in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..0.3f64), 2..25)) {
        let d = fixtures::box_mesh(Vec3::new(1.0, 1.0, 1.0), [2, 1, 1]);
        let spheres: Vec<Sphere> = seed.iter().map(|&(x, y, z, r)| Sphere::new(Vec3::new(x, y, z), r)).collect();
        let rpd = compute_rpd(&d, &spheres);
        prop_assert!((rpd.total_volume() - d.volume()).abs() < 1e-9 * d.volume());
        for f in rpd.faces.values() {
            prop_assert!(f.i < f.j);
            prop_assert!(rpd.cells[f.i].neighbors.contains(&f.j));
        }
    }
}
