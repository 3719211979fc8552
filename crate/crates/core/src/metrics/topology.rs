use crate::mesh_io::TetDomain;
use crate::rpd::MedialMesh;

/// Euler characteristic a solid's medial axis should have: half that of its
/// boundary surface.
pub fn expected_euler(domain: &TetDomain) -> i64 {
    domain.boundary_euler() / 2
}

/// 0 when `V - E + F` over valid elements matches the solid, 1 otherwise.
pub fn ter(mesh: &MedialMesh, domain: &TetDomain) -> u8 {
    u8::from(mesh.euler() != expected_euler(domain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geom::Vec3;
    use crate::rpd::{MedialEdge, MedialFace, Sphere};

    #[test]
    fn expected_values() {
        assert_eq!(expected_euler(&fixtures::box_mesh(Vec3::repeat(1.0), [1, 1, 1])), 1);
        assert_eq!(expected_euler(&fixtures::torus(400.0, 100.0, 12)), 0);
    }

    #[test]
    fn disk_sheet_matches_box() {
        let m = MedialMesh {
            spheres: vec![Sphere::new(Vec3::zeros(), 1.0); 4],
            edges: [[0, 1], [1, 2], [0, 2], [1, 3], [2, 3]].iter().map(|&v| MedialEdge { v, valid: true }).collect(),
            faces: vec![MedialFace { v: [0, 1, 2], valid: true, sheet: None }, MedialFace { v: [1, 2, 3], valid: true, sheet: None }],
            source: (0..4).collect(),
            ..Default::default()
        };
        let slab = fixtures::slab(1000.0, 1000.0, 100.0, 2, 2, 1);
        assert_eq!(ter(&m, &slab), 0);
        let mut open = m.clone();
        open.edges[4].valid = false;
        assert_eq!(ter(&open, &slab), 1);
    }
}
