use std::f64::consts::PI;

use approx::assert_relative_eq;
use impedukt_core::geometry::{
    generate_duct_mesh, generate_radiation_domain, generate_tract_mesh, parse_mesh, write_mesh,
    BoxDims,
};
use impedukt_core::{
    AreaFunction, DuctSpec, EllipseSection, Error, FacetTag, Mesh, Region, Termination,
};
use proptest::prelude::*;

fn duct(a: f64, b: f64, length: f64, h: f64, termination: Termination) -> DuctSpec {
    DuctSpec {
        section: EllipseSection::new(a, b).unwrap(),
        length,
        h,
        termination,
    }
}

fn assert_positive_volumes(mesh: &Mesh) {
    for t in 0..mesh.n_tets() {
        assert!(mesh.tet_volume(t) > 0.0, "tet {t} has non-positive volume");
    }
}

#[test]
fn closed_duct_volume_and_tags() {
    let mesh = generate_duct_mesh(&duct(0.01, 0.01, 0.1, 0.005, Termination::ClosedRigid)).unwrap();
    mesh.validate().unwrap();
    assert_positive_volumes(&mesh);
    let exact = PI * 0.01 * 0.01 * 0.1;
    assert!((mesh.total_volume() - exact).abs() / exact < 0.05);
    let src = mesh.tagged_area(FacetTag::Source);
    assert!((src - PI * 1e-4).abs() / (PI * 1e-4) < 0.05);
    // The far end is closed, so no outer facets exist.
    assert_eq!(mesh.tagged_area(FacetTag::Outer), 0.0);
    assert_relative_eq!(mesh.tagged_area(FacetTag::Rigid), src, max_relative = 1e-12);
}

#[test]
fn open_duct_end_is_outer() {
    let mesh =
        generate_duct_mesh(&duct(0.01, 0.01, 0.05, 0.005, Termination::OpenFlanged)).unwrap();
    assert_relative_eq!(
        mesh.tagged_area(FacetTag::Outer),
        mesh.tagged_area(FacetTag::Source),
        max_relative = 1e-12
    );
    assert_eq!(mesh.tagged_area(FacetTag::Rigid), 0.0);
}

#[test]
fn centerline_nodes_are_exact() {
    let mesh = generate_duct_mesh(&duct(0.01, 0.01, 0.1, 0.005, Termination::ClosedRigid)).unwrap();
    for k in 0..=20 {
        let z = k as f64 * 0.005;
        assert!(
            mesh.node_at([0.0, 0.0, z], 1e-12).is_some(),
            "missing axis node z={z}"
        );
    }
}

#[test]
fn elliptical_duct_volume() {
    let section = impedukt_core::geometry::make_elliptical_section(PI * 1e-4, 0.8).unwrap();
    let spec = DuctSpec {
        section,
        length: 0.06,
        h: 0.003,
        termination: Termination::ClosedRigid,
    };
    let mesh = generate_duct_mesh(&spec).unwrap();
    let exact = section.area() * 0.06;
    assert!((mesh.total_volume() - exact).abs() / exact < 0.05);
}

#[test]
fn degenerate_and_coarse_ducts_fail() {
    assert!(generate_duct_mesh(&duct(0.01, 0.01, 0.0, 0.005, Termination::ClosedRigid)).is_err());
    let err =
        generate_duct_mesh(&duct(0.01, 0.01, 0.1, 0.02, Termination::ClosedRigid)).unwrap_err();
    assert!(matches!(err, Error::Mesh(_) | Error::Geometry(_)), "{err}");
}

#[test]
fn short_duct_warns() {
    let spec = duct(0.02, 0.02, 0.05, 0.005, Termination::ClosedRigid);
    assert_eq!(spec.warnings().len(), 1);
    let spec = duct(0.01, 0.01, 0.1, 0.005, Termination::ClosedRigid);
    assert!(spec.warnings().is_empty());
}

#[test]
fn radiation_domain_regions_and_tags() {
    let spec = duct(0.01, 0.01, 0.04, 0.005, Termination::OpenFlanged);
    let dims = BoxDims {
        x: 0.06,
        y: 0.06,
        z: 0.04,
    };
    let mesh = generate_radiation_domain(&spec, dims, 0.02, 0.01, 0.01).unwrap();
    mesh.validate().unwrap();
    assert_positive_volumes(&mesh);
    let interior = mesh.region_volume(Region::Interior);
    let pml = mesh.region_volume(Region::Pml);
    let duct_vol = PI * 1e-4 * 0.04;
    let box_vol = 0.06 * 0.06 * 0.04;
    assert!((interior - duct_vol - box_vol).abs() / (duct_vol + box_vol) < 0.02);
    let shell = 0.1 * 0.1 * 0.06 - box_vol;
    assert!((pml - shell).abs() / shell < 0.02, "pml {pml} vs {shell}");
    // Flange: the shell rim and box face at z = L minus the aperture.
    let flange = 0.1 * 0.1 - PI * 1e-4;
    let rigid = mesh.tagged_area(FacetTag::Rigid);
    assert!(
        (rigid - flange).abs() / flange < 0.01,
        "rigid {rigid} vs {flange}"
    );
    // Outer truncation is the far face plus the four side faces of the shell.
    let outer = 0.1 * 0.1 + 4.0 * 0.1 * 0.06;
    assert_relative_eq!(
        mesh.tagged_area(FacetTag::Outer),
        outer,
        max_relative = 1e-9
    );
}

#[test]
fn radiation_domain_rejects_closed_duct() {
    let spec = duct(0.01, 0.01, 0.04, 0.005, Termination::ClosedRigid);
    let dims = BoxDims {
        x: 0.06,
        y: 0.06,
        z: 0.04,
    };
    assert!(generate_radiation_domain(&spec, dims, 0.02, 0.01, 0.01).is_err());
}

#[test]
fn tract_mesh_follows_area_function() {
    let af =
        AreaFunction::with_eccentricity(&[(0.0, 2e-4), (0.03, 4e-4), (0.06, 1e-4)], 0.0).unwrap();
    let mesh = generate_tract_mesh(&af, 0.002).unwrap();
    mesh.validate().unwrap();
    // Trapezoid rule on the piecewise-linear area function.
    let exact = 0.03 * (2e-4 + 4e-4) / 2.0 + 0.03 * (4e-4 + 1e-4) / 2.0;
    assert!((mesh.total_volume() - exact).abs() / exact < 0.06);
    let walls: usize = mesh
        .facets
        .iter()
        .filter(|f| matches!(f.tag, FacetTag::LossyWall(_)))
        .count();
    assert!(walls > 0);
}

#[test]
fn mesh_file_round_trip() {
    let mesh =
        generate_duct_mesh(&duct(0.01, 0.008, 0.04, 0.004, Termination::OpenFlanged)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("duct.mesh");
    write_mesh(&mesh, &path).unwrap();
    let back = impedukt_core::geometry::read_mesh(&path).unwrap();
    assert_eq!(back.tets, mesh.tets);
    assert_eq!(back.facets, mesh.facets);
    assert_eq!(back.regions, mesh.regions);
    assert_eq!(back.digest(), mesh.digest());
}

#[test]
fn malformed_mesh_reports_line() {
    let err = parse_mesh("this is not a mesh\n").unwrap_err();
    assert!(matches!(err, Error::Parse { .. }), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 16,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn generated_ducts_hold_invariants(
        a in 0.008f64..0.015,
        ratio in 0.6f64..1.0,
        length in 0.02f64..0.05,
    ) {
        let spec = duct(a, a * ratio, length, 0.002, Termination::ClosedRigid);
        let mesh = generate_duct_mesh(&spec).unwrap();
        prop_assert!(mesh.validate().is_ok());
        let exact = spec.section.area() * length;
        prop_assert!((mesh.total_volume() - exact).abs() / exact < 0.06);
        for t in 0..mesh.n_tets() {
            prop_assert!(mesh.tet_volume(t) > 0.0);
        }
    }
}
