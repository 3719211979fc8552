//! Write a built-in fixture as a MEDIT `.mesh` file.
//!
//! `cargo run --example export_fixture -- box411|slab|torus|ball OUT.mesh`

use medial_core::{fixtures, mesh_io::write_medit, Vec3};

fn main() {
    let mut args = std::env::args().skip(1);
    let (Some(name), Some(path)) = (args.next(), args.next()) else {
        eprintln!("usage: export_fixture box411|slab|torus|ball OUT.mesh");
        std::process::exit(2);
    };
    let d = match name.as_str() {
        "box411" => fixtures::box_mesh(Vec3::new(1000.0, 250.0, 250.0), [8, 2, 2]),
        "slab" => fixtures::slab(1000.0, 1000.0, 200.0, 4, 4, 1),
        "torus" => fixtures::torus(400.0, 100.0, 24),
        "ball" => fixtures::ball(500.0, 3),
        other => {
            eprintln!("unknown fixture {other}");
            std::process::exit(2);
        }
    };
    std::fs::write(&path, write_medit(&d)).expect("write mesh");
}
