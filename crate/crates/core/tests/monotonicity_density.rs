use std::f64::consts::PI;

use proptest::prelude::*;
use varilab_core::monotonicity::{
    density_at_point_via_energy, density_limit, density_profile, diameter_bounds_check, li_yau_check, log_radii,
};
use varilab_core::zoo::{disk_rings, generate, ZooSpec};
use varilab_core::{DiscreteVarifold, Error, VertexTag};

fn flat_disk(rings: usize) -> DiscreteVarifold {
    let (p, f) = disk_rings(rings);
    let pts: Vec<Vec<f64>> = p.iter().map(|q| vec![q[0], q[1], 0.0]).collect();
    DiscreteVarifold::from_points(3, &pts, f, None).unwrap()
}

#[test]
fn unit_sphere_has_constant_monotone_quantity() {
    // on the unit sphere H/4 = −y/2 and (y−x)⊥/|y−x|² = y/2, so the
    // remainder vanishes and g ≡ Θ = 1
    let m = generate(&ZooSpec::icosphere(4)).unwrap();
    let prof = density_profile(&m, m.vertex(5), &log_radii(0.05, 1.5, 8)).unwrap();
    for (g, rem) in prof.monotone.iter().zip(&prof.remainder) {
        assert!((g - 1.0).abs() < 1e-3, "{:?}", prof.monotone);
        assert!(rem.abs() < 1e-2);
    }
    assert!((prof.limit_estimate - 1.0).abs() < 1e-3);
}

#[test]
fn flat_disk_has_unit_density() {
    let m = flat_disk(12);
    let prof = density_profile(&m, &[0.0, 0.0, 0.0], &[0.2, 0.4, 0.8]).unwrap();
    for r in &prof.ratios {
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }
    for g in &prof.monotone {
        assert!((g - 1.0).abs() < 1e-12);
    }
}

#[test]
fn monotone_quantity_is_nondecreasing() {
    let m = generate(&ZooSpec::ellipsoid(4, [1.0, 0.8, 1.3])).unwrap();
    for p in [0, 100, 1000] {
        let prof = density_profile(&m, m.vertex(p), &log_radii(0.05, 1.0, 8)).unwrap();
        for w in prof.monotone.windows(2) {
            assert!(w[1] >= w[0] - 5e-4, "{:?}", prof.monotone);
        }
        assert!(prof.monotone[7] > prof.monotone[0]);
        // g(r) − remainder(r)/π is the density, independent of r
        let base: Vec<f64> = prof.monotone.iter().zip(&prof.remainder).map(|(g, q)| g - q / PI).collect();
        for b in &base {
            assert!((b - 1.0).abs() < 5e-3, "{base:?}");
        }
    }
}

#[test]
fn density_identity_on_closed_surfaces() {
    for spec in [ZooSpec::icosphere(4), ZooSpec::ellipsoid(4, [1.0, 0.8, 1.3]), ZooSpec::clifford_torus(32)] {
        let m = generate(&spec).unwrap();
        for p in [0, 7, 100] {
            let d = density_at_point_via_energy(&m, p).unwrap();
            assert!((d - 1.0).abs() < 0.01, "{}: {d}", spec.name());
        }
    }
}

#[test]
fn multiplicity_and_junction_densities() {
    let t2 = generate(&ZooSpec::multiplicity_sphere(4, 2)).unwrap();
    let radii = log_radii(0.05, 0.2, 3);
    assert!((density_limit(&t2, t2.vertex(3), &radii).unwrap() - 2.0).abs() < 2e-3);
    let b = generate(&ZooSpec::double_bubble(32)).unwrap();
    let j = (0..b.num_vertices()).find(|&i| b.tag(i) == VertexTag::Junction).unwrap();
    let radii = log_radii(0.066, 0.14, 3);
    assert!((density_limit(&b, b.vertex(j), &radii).unwrap() - 1.5).abs() < 2e-3);
}

#[test]
fn li_yau_holds_on_zoo() {
    let torus = li_yau_check(&generate(&ZooSpec::clifford_torus(24)).unwrap()).unwrap();
    assert!(torus.li_yau_slack > 0.3 * torus.willmore);
    let s = li_yau_check(&generate(&ZooSpec::icosphere(4)).unwrap()).unwrap();
    assert!(s.li_yau_slack.abs() < 0.005 * s.willmore);
    assert!((s.max_density_estimate - 1.0).abs() < 2e-3);
    let t2 = li_yau_check(&generate(&ZooSpec::multiplicity_sphere(3, 2)).unwrap()).unwrap();
    assert!((t2.max_density_estimate - 2.0).abs() < 5e-3);
    assert!(t2.diameter_check.is_none());
}

#[test]
fn diameter_bounds() {
    let s = diameter_bounds_check(&generate(&ZooSpec::icosphere(3)).unwrap()).unwrap();
    assert!(s.lower_ok);
    assert!((s.diameter - 2.0).abs() < 1e-12);
    let mu = s.diameter / s.upper_constant;
    assert!((s.lower_bound - mu / (7.0 * (4.0 * PI).sqrt())).abs() < 1e-12);
    let t2 = generate(&ZooSpec::multiplicity_sphere(4, 2)).unwrap();
    assert!(matches!(diameter_bounds_check(&t2), Err(Error::HypothesisViolated(_))));
}

#[test]
fn open_mesh_is_rejected() {
    let m = flat_disk(4);
    assert!(matches!(li_yau_check(&m), Err(Error::NotClosed)));
    assert!(matches!(density_at_point_via_energy(&m, 0), Err(Error::NotClosed)));
}

#[test]
fn bad_radii_are_rejected() {
    let m = generate(&ZooSpec::icosphere(1)).unwrap();
    assert!(density_profile(&m, m.vertex(0), &[0.2, 0.1]).is_err());
    assert!(density_profile(&m, &[0.0, 0.0], &[0.1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn density_ratios_are_scale_invariant(lambda in 0.1f64..10.0, p in 0usize..162) {
        let m = generate(&ZooSpec::ellipsoid(2, [1.0, 0.7, 1.2])).unwrap();
        let radii = log_radii(0.1, 1.0, 5);
        let a = density_profile(&m, m.vertex(p), &radii).unwrap();
        let s = m.scaled(lambda).unwrap();
        let scaled_radii: Vec<f64> = radii.iter().map(|r| r * lambda).collect();
        let b = density_profile(&s, s.vertex(p), &scaled_radii).unwrap();
        for k in 0..radii.len() {
            prop_assert!((a.ratios[k] - b.ratios[k]).abs() < 1e-9);
            prop_assert!((a.monotone[k] - b.monotone[k]).abs() < 1e-9);
        }
    }
}
