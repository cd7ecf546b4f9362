use std::f64::consts::PI;

use proptest::prelude::*;
use varilab_core::curvature::{
    cotan_laplacian, delta_from_willmore, dirichlet_integral, mean_curvature, total_angle_defect, willmore_energy,
};
use varilab_core::linalg::{apply_rotation3, dot, norm, quaternion_rotation};
use varilab_core::zoo::{generate, ZooSpec};
use varilab_core::DiscreteVarifold;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// A smooth polynomial vector field on ℝ³.
fn field(x: &[f64]) -> [f64; 3] {
    [x[1] * x[2] + 0.3 * x[0] * x[0], x[0] - 0.5 * x[2] * x[2] * x[1], 0.2 + x[0] * x[1] * x[2]]
}

#[test]
fn first_variation_matches_finite_differences() {
    // d/dt μ(x + tX) = −∫⟨H, X⟩ dμ on a closed mesh
    let m = generate(&ZooSpec::ellipsoid(3, [1.0, 0.8, 1.3]).with_jitter(7, 0.1)).unwrap();
    let f = mean_curvature(&m).unwrap();
    let predicted: f64 = -(0..m.num_vertices()).map(|v| dot(f.h(v), &field(m.vertex(v))) * f.area(v)).sum::<f64>();
    let moved = |t: f64| {
        m.map_vertices(|x| {
            let w = field(x);
            vec![x[0] + t * w[0], x[1] + t * w[1], x[2] + t * w[2]]
        })
        .unwrap()
        .total_mass()
    };
    let t = 1e-5;
    let fd = (moved(t) - moved(-t)) / (2.0 * t);
    assert!(rel(fd, predicted) < 1e-6, "fd {fd} vs {predicted}");
}

#[test]
fn laplacian_annihilates_constants_and_is_symmetric() {
    let m = generate(&ZooSpec::clifford_torus(8)).unwrap();
    let ones = vec![1.0; m.num_vertices()];
    assert!(cotan_laplacian(&m, &ones, 1).iter().all(|x| x.abs() < 1e-12));
    // ⟨u, Lu⟩ = −½ ∫|∇u|² by the stiffness form
    let u: Vec<f64> = (0..m.num_vertices()).map(|v| m.vertex(v)[0] * m.vertex(v)[2]).collect();
    let lu = cotan_laplacian(&m, &u, 1);
    let lhs: f64 = u.iter().zip(&lu).map(|(a, b)| a * b).sum();
    assert!(rel(-lhs, dirichlet_integral(&m, &u, 1)) < 1e-12);
}

#[test]
fn sphere_curvature_points_inward_with_norm_two() {
    let m = generate(&ZooSpec::icosphere(5)).unwrap();
    let f = mean_curvature(&m).unwrap();
    let worst = (0..m.num_vertices())
        .map(|v| {
            let h = f.h(v);
            let x = m.vertex(v);
            (0..3).map(|k| (h[k] + 2.0 * x[k]).powi(2)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    assert!(worst < 0.02, "max |H + 2x| = {worst}");
}

#[test]
fn gauss_bonnet_on_closed_zoo() {
    for (spec, chi) in [
        (ZooSpec::icosphere(3), 2.0),
        (ZooSpec::ellipsoid(3, [1.0, 2.0, 0.5]).with_jitter(3, 0.2), 2.0),
        (ZooSpec::clifford_torus(16), 0.0),
    ] {
        let m = generate(&spec).unwrap();
        assert_eq!(m.euler_characteristic() as f64, chi);
        assert!((total_angle_defect(&m) - 2.0 * PI * chi).abs() < 1e-9);
        let e = willmore_energy(&m).unwrap();
        assert!((e.gauss_integral - 2.0 * PI * chi).abs() < 1e-9);
    }
}

#[test]
fn torus_energy_converges_to_closed_form() {
    // W = π²R²/(r√(R² − r²)) for the torus of revolution
    let (big, small) = (2f64.sqrt(), 1.0);
    let exact = PI * PI * big * big / (small * (big * big - small * small).sqrt());
    assert!(rel(exact, 2.0 * PI * PI) < 1e-15);
    let mut errs = Vec::new();
    for n in [16, 32, 64] {
        let w = willmore_energy(&generate(&ZooSpec::clifford_torus(n)).unwrap()).unwrap().willmore;
        errs.push(rel(w, exact));
    }
    assert!(errs[2] < 0.01);
    assert!((errs[1] / errs[2]).log2() > 1.5);
    // a fatter torus against the same formula
    let (big, small) = (3.0, 1.0);
    let exact = PI * PI * big * big / (small * (big * big - small * small).sqrt());
    let spec = ZooSpec::new(varilab_core::zoo::ZooKind::Torus { major: big, minor: small, n_major: 192, n_minor: 64 });
    let w = willmore_energy(&generate(&spec).unwrap()).unwrap().willmore;
    assert!(rel(w, exact) < 0.01);
}

#[test]
fn tracefree_energy_vanishes_on_spheres() {
    let e = willmore_energy(&generate(&ZooSpec::icosphere(5)).unwrap()).unwrap();
    assert!(e.tracefree_sq_integral.abs() < 0.02 * e.mean_sq_integral);
    assert!(e.excluded_mass == 0.0);
    assert!(!e.codim_heuristic);
}

#[test]
fn higher_codimension_embedding_keeps_energy() {
    let a = willmore_energy(&generate(&ZooSpec::icosphere(3)).unwrap()).unwrap();
    let b = willmore_energy(&generate(&ZooSpec::icosphere(3).with_ambient_dim(5)).unwrap()).unwrap();
    assert!(rel(a.willmore, b.willmore) < 1e-13);
    assert!(b.codim_heuristic);
}

#[test]
fn delta_is_clamped() {
    assert_eq!(delta_from_willmore(4.0 * PI - 0.1), 0.0);
    assert!((delta_from_willmore(4.0 * PI + 0.25) - 0.5).abs() < 1e-14);
}

fn rotated(m: &DiscreteVarifold, q: [f64; 4]) -> DiscreteVarifold {
    let r = quaternion_rotation(q);
    m.map_vertices(|x| apply_rotation3(&r, x)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn energy_is_scale_rotation_and_multiplicity_covariant(
        q in prop::array::uniform4(-1.0f64..1.0),
        lambda in 0.2f64..5.0,
        shift in prop::array::uniform3(-3.0f64..3.0),
    ) {
        prop_assume!(norm(&q) > 0.1);
        let m = generate(&ZooSpec::perturbed_sphere(3, 0.1)).unwrap();
        let w = willmore_energy(&m).unwrap().willmore;
        let moved = rotated(&m, q).scaled(lambda).unwrap().translated(&shift).unwrap();
        prop_assert!(rel(willmore_energy(&moved).unwrap().willmore, w) < 1e-10);
        let doubled = m.with_uniform_multiplicity(2).unwrap();
        prop_assert!(rel(willmore_energy(&doubled).unwrap().willmore, 2.0 * w) < 1e-12);
    }
}
