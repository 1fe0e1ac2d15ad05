//! Fixtures shared by the benchmarks.

use impedukt_core::geometry::generate_duct_mesh;
use impedukt_core::{DuctSpec, EllipseSection, Mesh, Termination};

/// Closed circular duct of radius 1 cm and length 10 cm at element size `h`.
pub fn closed_duct(h: f64) -> Mesh {
    let spec = DuctSpec {
        section: EllipseSection::circular(0.01).expect("valid radius"),
        length: 0.1,
        h,
        termination: Termination::ClosedRigid,
    };
    generate_duct_mesh(&spec).expect("valid duct")
}
