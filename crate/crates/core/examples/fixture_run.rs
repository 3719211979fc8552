//! Run the pipeline on a built-in fixture and print the metrics as JSON.
//!
//! `cargo run --release --example fixture_run -- box|l|l4|torus|ball`

use medial_core::{fixtures, geom::SurfaceIndex, mesh_io::detect_features, metrics::evaluate, optimizer::run_pipeline, Config, Vec3};

fn main() {
    let shape = std::env::args().nth(1).unwrap_or_else(|| "box".into());
    let cfg = Config::default();
    let domain = match shape.as_str() {
        "torus" => fixtures::torus(400.0, 100.0, 24),
        "ball" => fixtures::ball(500.0, 3),
        "l" => fixtures::l_shape(1000.0, 250.0, 2),
        "l4" => fixtures::l_shape(1000.0, 250.0, 4),
        _ => fixtures::box_mesh(Vec3::new(1000.0, 250.0, 250.0), [8, 2, 2]),
    };
    let domain = detect_features(&domain, cfg.phi(), &[]);
    let out = run_pipeline(&domain, &cfg).expect("pipeline");
    for r in &out.log {
        println!("{}", serde_json::to_string(r).unwrap());
    }
    let index = SurfaceIndex::new(&domain);
    let m = evaluate(&out.mesh, &domain, &index, out.sigma, &cfg).expect("metrics");
    println!("{}", serde_json::to_string_pretty(&m).unwrap());
}
