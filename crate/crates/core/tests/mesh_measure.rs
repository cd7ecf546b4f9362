use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varilab_core::mesh::io::{format_obj, format_off, load, parse_obj, parse_off, save, sidecar_path};
use varilab_core::mesh::{triangle_ball_area, triangle_halfspace_area, BallQuery};
use varilab_core::zoo::{generate, ZooSpec};
use varilab_core::{DiscreteVarifold, Error, VertexTag};

fn brute_diameter(v: &DiscreteVarifold) -> (f64, (usize, usize)) {
    let mut best = (-1.0, (0, 0));
    for i in 0..v.num_vertices() {
        for j in i + 1..v.num_vertices() {
            let d = v.dist2(i, j);
            if d > best.0 * (1.0 + 1e-12) {
                best = (d, (i, j));
            }
        }
    }
    (best.0.sqrt(), best.1)
}

fn random_cloud_mesh(seed: u64, n: usize) -> DiscreteVarifold {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    // a fan of disjoint triangles keeps every point referenced
    let faces: Vec<[usize; 3]> = (0..n / 3).map(|k| [3 * k, 3 * k + 1, 3 * k + 2]).collect();
    DiscreteVarifold::from_points(3, &pts[..3 * (n / 3)], faces, None).unwrap()
}

#[test]
fn diameter_matches_brute_force_on_sphere_ties() {
    let m = generate(&ZooSpec::icosphere(2)).unwrap();
    let d = m.diameter();
    let (value, pair) = brute_diameter(&m);
    assert!((d.value - value).abs() < 1e-12);
    assert!((d.value - 2.0).abs() < 1e-12);
    // the smallest index pair among the antipodal ties
    assert_eq!(d.pair, pair);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diameter_matches_brute_force(seed in any::<u64>(), n in 3usize..400) {
        let m = random_cloud_mesh(seed, n);
        let d = m.diameter();
        let (value, _) = brute_diameter(&m);
        prop_assert!((d.value - value).abs() <= 1e-12 * value);
    }

    #[test]
    fn ball_mass_is_monotone_and_bounded(seed in any::<u64>(), r1 in 0.05f64..1.0, dr in 0.0f64..1.0) {
        let m = generate(&ZooSpec::icosphere(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let masses = m.ball_masses(&x, &[r1, r1 + dr]);
        prop_assert!(masses[0] <= masses[1] + 1e-13);
        prop_assert!(masses[1] <= m.total_mass() * (1.0 + 1e-13));
        prop_assert!(masses[0] >= 0.0);
    }

    #[test]
    fn halfspace_clipping_partitions_area(seed in any::<u64>(), offset in -1.2f64..1.2) {
        let m = generate(&ZooSpec::ellipsoid(2, [1.0, 0.7, 1.3])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let below = m.halfspace_mass(&n, offset);
        let neg: Vec<f64> = n.iter().map(|c| -c).collect();
        let above = m.halfspace_mass(&neg, -offset);
        prop_assert!((below + above - m.total_mass()).abs() < 1e-12 * m.total_mass());
    }

    #[test]
    fn triangle_clips_agree_with_sampling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = || -> Vec<f64> { (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        let (a, b, c, x) = (p(), p(), p(), p());
        let r = 0.8;
        // stratified barycentric samples
        let k = 300;
        let mut inside = 0usize;
        let mut total = 0usize;
        for i in 0..k {
            for j in 0..k - i {
                let (s, t) = ((i as f64 + 1.0 / 3.0) / k as f64, (j as f64 + 1.0 / 3.0) / k as f64);
                let y: Vec<f64> = (0..3).map(|d| a[d] + s * (b[d] - a[d]) + t * (c[d] - a[d])).collect();
                let d2: f64 = y.iter().zip(&x).map(|(u, v)| (u - v) * (u - v)).sum();
                total += 1;
                inside += (d2 <= r * r) as usize;
            }
        }
        let e1: Vec<f64> = (0..3).map(|d| b[d] - a[d]).collect();
        let e2: Vec<f64> = (0..3).map(|d| c[d] - a[d]).collect();
        let area = 0.5 * varilab_core::linalg::twice_area(&e1, &e2);
        let mc = area * inside as f64 / total as f64;
        prop_assert!((triangle_ball_area(&a, &b, &c, &x, r) - mc).abs() < 0.02 * area + 1e-12);
        let full = triangle_halfspace_area(&a, &b, &c, &[0.0, 0.0, 1.0], 10.0);
        prop_assert!((full - area).abs() < 1e-12 * area.max(1e-300));
    }
}

#[test]
fn ball_mass_of_sphere_matches_cap_area() {
    // a ball centred on the unit sphere cuts a cap of area πr²
    let m = generate(&ZooSpec::icosphere(5)).unwrap();
    let x = m.vertex(0).to_vec();
    for r in [0.3, 0.6, 1.2] {
        let got = m.ball_mass(&BallQuery::new(x.clone(), r).unwrap());
        let exact = PI * r * r * m.total_mass() / (4.0 * PI);
        assert!((got - exact).abs() < 2e-3 * exact, "r={r}: {got} vs {exact}");
    }
    assert!(BallQuery::new(x, 0.0).is_err());
}

#[test]
fn mass_is_additive_under_disjoint_union() {
    let a = generate(&ZooSpec::icosphere(2)).unwrap();
    let b = generate(&ZooSpec::clifford_torus(8)).unwrap().translated(&[5.0, 0.0, 0.0]).unwrap();
    let u = a.disjoint_union(&b).unwrap();
    assert!((u.total_mass() - a.total_mass() - b.total_mass()).abs() < 1e-12 * u.total_mass());
    assert_eq!(u.num_vertices(), a.num_vertices() + b.num_vertices());
    assert_eq!(u.euler_characteristic(), 2);
}

#[test]
fn multiplicity_scales_mass() {
    let a = generate(&ZooSpec::icosphere(2)).unwrap();
    let b = a.with_uniform_multiplicity(3).unwrap();
    assert!((b.total_mass() - 3.0 * a.total_mass()).abs() < 1e-12 * b.total_mass());
}

#[test]
fn normalize_mass_hits_target() {
    let a = generate(&ZooSpec::ellipsoid(3, [1.0, 2.0, 0.5])).unwrap();
    let b = a.normalize_mass(4.0 * PI).unwrap();
    assert!((b.total_mass() - 4.0 * PI).abs() < 1e-12);
    let c0 = a.mass_centroid();
    let c1 = b.mass_centroid();
    for k in 0..3 {
        assert!((c0[k] - c1[k]).abs() < 1e-12);
    }
}

#[test]
fn tags_follow_connectivity() {
    let sphere = generate(&ZooSpec::icosphere(1)).unwrap();
    assert!(sphere.is_closed());
    assert_eq!(sphere.euler_characteristic(), 2);
    let prism = generate(&ZooSpec::y_prism(4, 1.0, 2.0)).unwrap();
    assert!(prism.has_junctions());
    assert!(prism.tags().contains(&VertexTag::Boundary));
    let bubble = generate(&ZooSpec::double_bubble(4)).unwrap();
    assert!(bubble.has_junctions());
    assert!(!bubble.tags().contains(&VertexTag::Boundary));
}

#[test]
fn validation_rejects_bad_input() {
    let pts = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]];
    assert!(matches!(DiscreteVarifold::from_points(3, &pts, vec![[0, 1, 2]], None), Err(Error::DegenerateFace { .. })));
    let good = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
    assert!(matches!(DiscreteVarifold::from_points(3, &good, vec![[0, 1, 3]], None), Err(Error::InvalidIndex { .. })));
    assert!(DiscreteVarifold::from_points(3, &good, vec![[0, 1, 2]], Some(vec![0])).is_err());
    assert!(DiscreteVarifold::from_points(3, &good, vec![[0, 1, 2]], Some(vec![-2])).is_err());
    let nan = vec![vec![f64::NAN, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
    assert!(DiscreteVarifold::from_points(3, &nan, vec![[0, 1, 2]], None).is_err());
}

#[test]
fn off_and_obj_round_trip() {
    let m = generate(&ZooSpec::icosphere(1).with_ambient_dim(4)).unwrap();
    let raw = parse_off(&format_off(&m)).unwrap();
    assert_eq!(raw.dim, 4);
    assert_eq!(raw.vertices, m.vertex_coords());
    let m3 = generate(&ZooSpec::icosphere(1)).unwrap();
    let raw = parse_obj(&format_obj(&m3)).unwrap();
    assert_eq!(raw.faces, m3.faces());
    assert_eq!(raw.vertices, m3.vertex_coords());
}

#[test]
fn save_and_load_keep_multiplicity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("double.off");
    let m = generate(&ZooSpec::multiplicity_sphere(1, 2)).unwrap();
    save(&m, &path).unwrap();
    assert!(sidecar_path(&path).exists());
    let back = load(&path).unwrap();
    assert_eq!(back.multiplicity(), m.multiplicity());
    assert_eq!(back.vertex_coords(), m.vertex_coords());
    assert!(matches!(load(&dir.path().join("x.stl")), Err(_)));
}
