//! Comparison round sphere for a closed surface with W close to 4π.
//!
//! The pipeline follows the constructive proof: normalize the mass to 4π,
//! move one end of a diameter to the origin, invert about it, fit an
//! orthogonal plane to the (nearly planar) image, and invert that plane back
//! to a sphere S_r through the origin. Each surviving vertex p then pairs
//! with q = π(A(π(p))), where A is the orthogonal projection onto the fitted
//! plane and π(x) = x/|x|². All metrics are evaluated after the similarity
//! that maps S_r to the unit sphere centred at the origin.
//!
//! The classical map Φ goes through a global conformal parameterization; the
//! perpendicular projection used here agrees with it to first order in δ.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, Matrix2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{cotan_laplacian, delta_from_willmore, dirichlet_integral, willmore_energy};
use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm, norm2, scale, sub, twice_area};
use crate::mesh::{DiscreteVarifold, VertexTag};
use crate::moebius::{invert, InversionResult};
use crate::sum::csum;
use crate::zoo::real_spherical_harmonic;

/// Coverage below this fraction aborts the pipeline.
pub const MIN_COVERAGE: f64 = 0.95;

/// Translated copy of a mesh with one diameter endpoint at the origin.
#[derive(Debug, Clone)]
pub struct InversionFrame {
    pub mesh: DiscreteVarifold,
    /// Vertex moved to the origin (the inversion pole).
    pub pole_vertex: usize,
    /// The opposite diameter endpoint, p₀ in the proof.
    pub far_vertex: usize,
    /// Vector added to every input vertex.
    pub translation: Vec<f64>,
}

/// Picks the diameter pair (smallest index pair among ties) and translates
/// its lower-index endpoint to the origin; the returned far vertex realizes
/// the diameter from there.
pub fn choose_inversion_point(v: &DiscreteVarifold) -> Result<InversionFrame> {
    let d = v.diameter();
    let (i, j) = d.pair;
    let translation = scale(v.vertex(i), -1.0);
    let mesh = v.translated(&translation)?;
    Ok(InversionFrame { mesh, pole_vertex: i, far_vertex: j, translation })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneFit {
    /// Columns P e₁, P e₂ of the orthogonal immersion ℝ² → ℝⁿ.
    pub basis: [Vec<f64>; 2],
    /// Point v on the plane: the weighted image centroid unless re-anchored.
    pub offset: Vec<f64>,
    /// Closest point v' of the plane to the origin.
    pub foot: Vec<f64>,
    /// sup dist(x̃, plane)/(1 + |x̃ − v|²).
    pub residual_sup: f64,
    /// Singular values of the averaged tangent map.
    pub singular_values: [f64; 2],
}

impl PlaneFit {
    /// Pᵀx.
    pub fn coords(&self, x: &[f64]) -> [f64; 2] {
        [dot(&self.basis[0], x), dot(&self.basis[1], x)]
    }

    /// Orthogonal projection v' + PPᵀx onto the plane.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let [a, b] = self.coords(x);
        (0..x.len()).map(|k| self.foot[k] + a * self.basis[0][k] + b * self.basis[1][k]).collect()
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        dist(x, &self.project(x))
    }
}

fn plane_weight(x: &[f64]) -> f64 {
    (1.0 + norm2(x)).powi(-2)
}

/// Nearest orthogonal 2×2 matrix (rotation or reflection).
fn polar2(m: Matrix2<f64>) -> Matrix2<f64> {
    let svd = m.svd(true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

/// Fits an orthogonal plane to the image of an inversion.
///
/// Per-face orthonormal bases are rotated onto the basis of the heaviest
/// face and averaged with weights θ·area·(1+|x̃|²)⁻²; the nearest orthogonal
/// immersion to the average spans the plane.
pub fn fit_plane(inverted: &InversionResult) -> Result<PlaneFit> {
    let img = &inverted.image;
    let n = img.dim();
    let weights: Vec<f64> = (0..img.num_faces())
        .map(|f| img.multiplicity()[f] as f64 * img.face_areas()[f] * plane_weight(&img.face_centroid(f)))
        .collect();
    let seed = (0..weights.len()).fold(0, |best, f| if weights[f] > weights[best] { f } else { best });
    let (s1, s2) = img.face_frame(seed);

    let aligned: Vec<[Vec<f64>; 2]> = (0..img.num_faces())
        .into_par_iter()
        .map(|f| {
            let (t1, t2) = img.face_frame(f);
            let m = Matrix2::new(dot(&t1, &s1), dot(&t1, &s2), dot(&t2, &s1), dot(&t2, &s2));
            let r = polar2(m);
            let col = |k: usize| -> Vec<f64> { (0..n).map(|c| t1[c] * r[(0, k)] + t2[c] * r[(1, k)]).collect() };
            [col(0), col(1)]
        })
        .collect();
    let wsum = csum(weights.iter().copied());
    let mut a = DMatrix::<f64>::zeros(n, 2);
    for k in 0..2 {
        for c in 0..n {
            a[(c, k)] = csum((0..img.num_faces()).map(|f| weights[f] * aligned[f][k][c])) / wsum;
        }
    }
    let svd = a.svd(true, true);
    let sv = [svd.singular_values[0], svd.singular_values[1]];
    let sigma_min = sv[0].min(sv[1]);
    if !(sigma_min >= 1e-8) {
        return Err(Error::DegenerateFit { sigma_min });
    }
    let p = svd.u.expect("requested") * svd.v_t.expect("requested");
    let basis = [p.column(0).iter().copied().collect::<Vec<_>>(), p.column(1).iter().copied().collect()];

    let vw: Vec<f64> = (0..img.num_vertices()).map(|i| inverted.recomputed.area(i) * plane_weight(img.vertex(i))).collect();
    let vsum = csum(vw.iter().copied());
    let offset: Vec<f64> = (0..n).map(|c| csum((0..img.num_vertices()).map(|i| vw[i] * img.vertex(i)[c])) / vsum).collect();
    // v' = v − PPᵀv; the second sweep pushes ⟨v', Pe_i⟩ to rounding level
    let foot = foot_of(&basis, &offset);
    let mut fit = PlaneFit { basis, foot, offset, residual_sup: 0.0, singular_values: sv };
    fit.residual_sup = residual_sup(&fit, img);
    Ok(fit)
}

fn residual_sup(fit: &PlaneFit, img: &DiscreteVarifold) -> f64 {
    (0..img.num_vertices())
        .map(|i| {
            let x = img.vertex(i);
            fit.distance(x) / (1.0 + dist(x, &fit.offset).powi(2))
        })
        .fold(0.0, f64::max)
}

fn foot_of(basis: &[Vec<f64>; 2], x: &[f64]) -> Vec<f64> {
    let mut foot = x.to_vec();
    for _ in 0..2 {
        let (a0, a1) = (dot(&basis[0], &foot), dot(&basis[1], &foot));
        for c in 0..foot.len() {
            foot[c] -= a0 * basis[0][c] + a1 * basis[1][c];
        }
    }
    foot
}

/// Moves the fitted plane parallel to itself so that it passes through
/// `offset`, recomputing the foot and the residual.
pub fn anchor_plane(fit: &PlaneFit, offset: &[f64], inverted: &InversionResult) -> PlaneFit {
    let mut out = fit.clone();
    out.offset = offset.to_vec();
    out.foot = foot_of(&out.basis, offset);
    out.residual_sup = residual_sup(&out, &inverted.image);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSphere {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Orthonormal frame of the 3-space containing the sphere: the plane
    /// basis and the unit direction of the centre.
    pub axes: [Vec<f64>; 3],
}

impl ComparisonSphere {
    /// Icosphere mesh of the sphere.
    pub fn to_mesh(&self, subdiv: u32) -> Result<DiscreteVarifold> {
        let (pts, faces) = crate::zoo::icosphere(subdiv);
        let n = self.center.len();
        let mut flat = Vec::with_capacity(pts.len() * n);
        for u in &pts {
            for c in 0..n {
                flat.push(self.center[c] + self.radius * (0..3).map(|k| u[k] * self.axes[k][c]).sum::<f64>());
            }
        }
        DiscreteVarifold::build(n, flat, faces, None)
    }

    /// Coordinates in the sphere's own frame.
    fn local(&self, x: &[f64]) -> [f64; 3] {
        [dot(&self.axes[0], x), dot(&self.axes[1], x), dot(&self.axes[2], x)]
    }
}

/// S_r = π(plane): centre v'/(2|v'|²), radius 1/(2|v'|).
pub fn comparison_sphere(fit: &PlaneFit) -> Result<ComparisonSphere> {
    let foot_norm = norm(&fit.foot);
    if !(foot_norm > 1e-10) {
        return Err(Error::PlaneThroughPole { foot_norm });
    }
    let center = scale(&fit.foot, 0.5 / (foot_norm * foot_norm));
    let radius = 0.5 / foot_norm;
    let axes = [fit.basis[0].clone(), fit.basis[1].clone(), scale(&fit.foot, 1.0 / foot_norm)];
    Ok(ComparisonSphere { center, radius, axes })
}

/// Pairs (q, p): q on S_r, p on the surface (in the translated frame).
#[derive(Debug, Clone)]
pub struct Correspondence {
    pub dim: usize,
    /// Input vertex index of each pair.
    pub source_vertex: Vec<usize>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Connectivity inherited from the surviving faces.
    pub faces: Vec<[usize; 3]>,
    pub multiplicity: Vec<u32>,
    /// Fraction of S_r covered exactly once (counting multiplicity).
    pub coverage: f64,
}

impl Correspondence {
    pub fn len(&self) -> usize {
        self.source_vertex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_vertex.is_empty()
    }

    pub fn q(&self, i: usize) -> &[f64] {
        &self.q[i * self.dim..(i + 1) * self.dim]
    }

    pub fn p(&self, i: usize) -> &[f64] {
        &self.p[i * self.dim..(i + 1) * self.dim]
    }
}

/// Number of Fibonacci samples used for the coverage estimate.
pub const COVERAGE_SAMPLES: usize = 20_000;

/// Builds the vertexwise correspondence and checks that the projected
/// image covers S_r once.
pub fn build_correspondence(
    frame: &InversionFrame,
    inverted: &InversionResult,
    fit: &PlaneFit,
    sphere: &ComparisonSphere,
) -> Result<Correspondence> {
    let img = &inverted.image;
    let n = img.dim();
    let q: Vec<f64> = (0..img.num_vertices())
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = fit.project(img.vertex(i));
            let r2 = norm2(&a);
            a.into_iter().map(move |c| c / r2)
        })
        .collect();
    let mut p = Vec::with_capacity(q.len());
    for &s in &inverted.source_vertex {
        p.extend_from_slice(frame.mesh.vertex(s));
    }
    let source_vertex: Vec<usize> = inverted.source_vertex.iter().map(|&s| s).collect();
    let mut corr = Correspondence {
        dim: n,
        source_vertex,
        q,
        p,
        faces: img.faces().to_vec(),
        multiplicity: img.multiplicity().to_vec(),
        coverage: 0.0,
    };
    corr.coverage = coverage(&corr, img, fit, sphere, COVERAGE_SAMPLES);
    if corr.coverage < MIN_COVERAGE {
        return Err(Error::CoverageGap { coverage: corr.coverage });
    }
    Ok(corr)
}

/// Fraction of Fibonacci points s on S_r whose plane preimage π(s) lies in
/// projected image triangles of total multiplicity exactly one.
///
/// The excision around the pole leaves a hole by construction; samples in
/// the smallest ball about the pole containing the q-images of the hole
/// boundary are left out of the count.
fn coverage(corr: &Correspondence, img: &DiscreteVarifold, fit: &PlaneFit, sphere: &ComparisonSphere, samples: usize) -> f64 {
    let local: Vec<[f64; 3]> = (0..corr.len()).map(|i| sphere.local(corr.q(i))).collect();
    let hole2 = (0..corr.len())
        .filter(|&i| img.tag(i) == VertexTag::Boundary)
        .map(|i| norm2(corr.q(i)))
        .fold(0.0, f64::max);
    let plane: Vec<[f64; 2]> = (0..img.num_vertices()).map(|i| fit.coords(img.vertex(i))).collect();

    let mut edges: Vec<f64> = corr
        .faces
        .iter()
        .map(|t| {
            let (a, b) = (local[t[0]], local[t[1]]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
        })
        .collect();
    edges.sort_by(f64::total_cmp);
    let median = edges.get(edges.len() / 2).copied().unwrap_or(sphere.radius);
    let cell = (2.0 * median).max(sphere.radius / 60.0);
    let key = |x: f64| (x / cell).floor() as i64;

    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (f, t) in corr.faces.iter().enumerate() {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &v in t {
            for k in 0..3 {
                lo[k] = lo[k].min(local[v][k]);
                hi[k] = hi[k].max(local[v][k]);
            }
        }
        // arcs of the image circles bulge past the chords
        let pad = 0.5 * (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max) + 1e-12 * sphere.radius;
        let (a, b) = (lo.map(|x| key(x - pad)), hi.map(|x| key(x + pad)));
        for i in a[0]..=b[0] {
            for j in a[1]..=b[1] {
                for k in a[2]..=b[2] {
                    grid.entry([i, j, k]).or_default().push(f);
                }
            }
        }
    }

    let golden = PI * (3.0 - 5f64.sqrt());
    let points: Vec<[f64; 3]> = (0..samples)
        .map(|s| {
            let z = 1.0 - (2.0 * s as f64 + 1.0) / samples as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * s as f64;
            // the sphere's centre sits at r·axes[2]
            [sphere.radius * rho * phi.cos(), sphere.radius * rho * phi.sin(), sphere.radius * (1.0 + z)]
        })
        .filter(|x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2] > hole2)
        .collect();
    if points.is_empty() {
        return 0.0;
    }
    let hits = points
        .par_iter()
        .filter(|x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            let y = [x[0] / r2, x[1] / r2];
            let Some(cands) = grid.get(&x.map(key)) else { return false };
            let total: u32 = cands
                .iter()
                .filter(|&&f| {
                    let t = corr.faces[f];
                    in_triangle(y, plane[t[0]], plane[t[1]], plane[t[2]])
                })
                .map(|&f| corr.multiplicity[f])
                .sum();
            total == 1
        })
        .count();
    hits as f64 / points.len() as f64
}

fn in_triangle(y: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    let cross = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (d1, d2, d3) = (cross(a, b, y), cross(b, c, y), cross(c, a, y));
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

/// Metric values divided by δ (linear laws) or δ² (quadratic laws).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstants {
    pub sup_deviation_over_delta: f64,
    pub conformal_log_over_delta: f64,
    pub sqrt_laplace_defect_over_delta: f64,
    pub laplace_defect_over_delta_sq: f64,
    pub w22_deviation_over_delta_sq: f64,
    pub residual_over_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityMetrics {
    /// sup |Φ(q) − q|.
    pub sup_deviation: f64,
    /// (min, max) of ½ log(area Φ(T) / area T) over sphere-side faces.
    pub conformal_log_range: (f64, f64),
    /// max |½ log area ratio|.
    pub conformal_log_sup: f64,
    /// ∫|ΔΦ + 2Φ|² over interior sphere-side vertices.
    pub laplace_defect: f64,
    pub w22_l2: f64,
    pub w22_gradient: f64,
    pub w22_laplacian: f64,
    /// Sum of the three squared norms.
    pub w22_deviation: f64,
}

/// Deviation metrics in the frame where S_r is the unit sphere at 0.
pub fn rigidity_metrics(corr: &Correspondence, sphere: &ComparisonSphere) -> Result<RigidityMetrics> {
    let n = corr.dim;
    let to_unit = |x: &[f64]| -> Vec<f64> { x.iter().zip(&sphere.center).map(|(a, c)| (a - c) / sphere.radius).collect() };
    let qh: Vec<f64> = (0..corr.len()).flat_map(|i| to_unit(corr.q(i))).collect();
    let ph: Vec<f64> = (0..corr.len()).flat_map(|i| to_unit(corr.p(i))).collect();
    let s = DiscreteVarifold::build(n, qh.clone(), corr.faces.clone(), None)?;
    let area = s.vertex_areas().weighted;
    let at = |u: &[f64], i: usize| u[i * n..(i + 1) * n].to_vec();

    let sup_deviation = (0..corr.len()).map(|i| dist(&at(&ph, i), &at(&qh, i))).fold(0.0, f64::max);

    let logs: Vec<f64> = corr
        .faces
        .iter()
        .enumerate()
        .map(|(f, t)| {
            let tp = twice_area(&sub(&at(&ph, t[1]), &at(&ph, t[0])), &sub(&at(&ph, t[2]), &at(&ph, t[0])));
            0.5 * (0.5 * tp / s.face_areas()[f]).ln()
        })
        .collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let interior: Vec<usize> = (0..s.num_vertices()).filter(|&i| s.tag(i) == VertexTag::Interior).collect();
    let lap_p = cotan_laplacian(&s, &ph, n);
    let laplace_defect = csum(interior.iter().map(|&i| {
        let a = area[i];
        (0..n).map(|c| (lap_p[i * n + c] / a + 2.0 * ph[i * n + c]).powi(2)).sum::<f64>() * a
    }));

    let u: Vec<f64> = ph.iter().zip(&qh).map(|(a, b)| a - b).collect();
    let w22_l2 = csum((0..s.num_vertices()).map(|i| norm2(&u[i * n..(i + 1) * n]) * area[i]));
    let w22_gradient = dirichlet_integral(&s, &u, n);
    let lap_u = cotan_laplacian(&s, &u, n);
    let w22_laplacian = csum(interior.iter().map(|&i| norm2(&lap_u[i * n..(i + 1) * n]) / area[i]));

    Ok(RigidityMetrics {
        sup_deviation,
        conformal_log_range: (lo, hi),
        conformal_log_sup: lo.abs().max(hi.abs()),
        laplace_defect,
        w22_l2,
        w22_gradient,
        w22_laplacian,
        w22_deviation: w22_l2 + w22_gradient + w22_laplacian,
    })
}

pub fn empirical_constants(m: &RigidityMetrics, residual_sup: f64, delta: f64) -> Option<EmpiricalConstants> {
    (delta > 0.0).then(|| EmpiricalConstants {
        sup_deviation_over_delta: m.sup_deviation / delta,
        conformal_log_over_delta: m.conformal_log_sup / delta,
        sqrt_laplace_defect_over_delta: m.laplace_defect.sqrt() / delta,
        laplace_defect_over_delta_sq: m.laplace_defect / (delta * delta),
        w22_deviation_over_delta_sq: m.w22_deviation / (delta * delta),
        residual_over_delta: residual_sup / delta,
    })
}

/// Where the fitted plane is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneAnchor {
    /// Through the image π(p₀) of the far diameter endpoint, so that the
    /// plane and the image agree where the image is closest to the pole.
    FarEndpoint,
    /// Through the weighted centroid of the image.
    WeightedCentroid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidityOptions {
    /// Excision radius around the pole in units of its longest edge.
    pub eta_factor: f64,
    pub anchor: PlaneAnchor,
}

impl Default for RigidityOptions {
    fn default() -> Self {
        Self { eta_factor: 2.5, anchor: PlaneAnchor::FarEndpoint }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RigidityReport {
    pub willmore: f64,
    /// δ = √max(W − 4π, 0).
    pub delta: f64,
    pub pole_vertex: usize,
    pub far_vertex: usize,
    /// Translation applied after mass normalization.
    pub translation: Vec<f64>,
    pub eta: f64,
    pub excised_mass: f64,
    pub plane: PlaneFit,
    pub sphere: ComparisonSphere,
    pub coverage: f64,
    pub metrics: RigidityMetrics,
    pub empirical_constants: Option<EmpiricalConstants>,
    #[serde(skip)]
    pub correspondence: Option<Correspondence>,
}

impl RigidityReport {
    /// CSV of the correspondence in the unit-sphere frame.
    pub fn correspondence_csv(&self) -> String {
        let Some(c) = &self.correspondence else { return String::new() };
        let n = c.dim;
        let mut s = String::from("vertex");
        for k in 0..n {
            let _ = write!(s, ",q{k}");
        }
        for k in 0..n {
            let _ = write!(s, ",p{k}");
        }
        s.push('\n');
        for i in 0..c.len() {
            let _ = write!(s, "{}", c.source_vertex[i]);
            for x in c.q(i).iter().chain(c.p(i)).enumerate().map(|(k, x)| (x - self.sphere.center[k % n]) / self.sphere.radius) {
                let _ = write!(s, ",{x:e}");
            }
            s.push('\n');
        }
        s
    }
}

/// The full pipeline on a closed mesh.
pub fn rigidity_pipeline(v: &DiscreteVarifold, opts: &RigidityOptions) -> Result<RigidityReport> {
    if !v.is_closed() {
        return Err(Error::NotClosed);
    }
    let willmore = willmore_energy(v)?.willmore;
    let delta = delta_from_willmore(willmore);
    let normalized = v.normalize_mass(4.0 * PI)?;
    let frame = choose_inversion_point(&normalized)?;
    let eta = opts.eta_factor * frame.mesh.local_edge_length(frame.pole_vertex);
    let origin = vec![0.0; v.dim()];
    let inverted = invert(&frame.mesh, &origin, eta)?;
    let mut plane = fit_plane(&inverted)?;
    if opts.anchor == PlaneAnchor::FarEndpoint {
        let p0 = frame.mesh.vertex(frame.far_vertex);
        plane = anchor_plane(&plane, &scale(p0, 1.0 / norm2(p0)), &inverted);
    }
    let sphere = comparison_sphere(&plane)?;
    let corr = build_correspondence(&frame, &inverted, &plane, &sphere)?;
    let metrics = rigidity_metrics(&corr, &sphere)?;
    let empirical = empirical_constants(&metrics, plane.residual_sup, delta);
    Ok(RigidityReport {
        willmore,
        delta,
        pole_vertex: frame.pole_vertex,
        far_vertex: frame.far_vertex,
        translation: frame.translation,
        eta,
        excised_mass: inverted.excised_mass,
        coverage: corr.coverage,
        plane,
        sphere,
        metrics,
        empirical_constants: empirical,
        correspondence: Some(corr),
    })
}

/// Replaces each vertex x by c + (1 + ε Y_lm(u)) u, with c the mass centroid
/// and u the unit direction of x − c in the first three coordinates; the
/// input must be star-shaped about its centroid.
pub fn harmonic_perturbation(v: &DiscreteVarifold, l: u32, m: i32, epsilon: f64) -> Result<DiscreteVarifold> {
    if v.dim() < 3 {
        return Err(Error::InvalidSpec("harmonic perturbation needs n ≥ 3".into()));
    }
    let c = v.mass_centroid();
    v.map_vertices(|x| {
        let d = sub(x, &c);
        let r = norm(&d[..3]);
        let u = [d[0] / r, d[1] / r, d[2] / r];
        let rho = 1.0 + epsilon * real_spherical_harmonic(l, m, u);
        let mut out = c.clone();
        for k in 0..3 {
            out[k] += rho * u[k];
        }
        out
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub report: RigidityReport,
}

/// Runs the pipeline on (2,0) perturbations of `base` for each ε.
pub fn rigidity_sweep(base: &DiscreteVarifold, epsilons: &[f64], opts: &RigidityOptions) -> Result<Vec<SweepRow>> {
    epsilons
        .iter()
        .map(|&epsilon| {
            let mesh = harmonic_perturbation(base, 2, 0, epsilon)?;
            Ok(SweepRow { epsilon, report: rigidity_pipeline(&mesh, opts)? })
        })
        .collect()
}

/// max/min of a positive series; ∞ if any entry is not positive.
pub fn spread_ratio(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_at_half_gives_unit_sphere() {
        let fit = PlaneFit {
            basis: [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            offset: vec![0.0, 0.0, 0.5],
            foot: vec![0.0, 0.0, 0.5],
            residual_sup: 0.0,
            singular_values: [1.0, 1.0],
        };
        let s = comparison_sphere(&fit).unwrap();
        assert_eq!(s.center, vec![0.0, 0.0, 1.0]);
        assert_eq!(s.radius, 1.0);
        let mut f2 = fit.clone();
        f2.foot = vec![0.0, 0.0, 1.0];
        let s2 = comparison_sphere(&f2).unwrap();
        assert_eq!((s2.center[2], s2.radius), (0.5, 0.5));
        f2.foot = vec![0.0; 3];
        assert!(matches!(comparison_sphere(&f2), Err(Error::PlaneThroughPole { .. })));
    }

    #[test]
    fn triangle_membership() {
        let (a, b, c) = ([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        assert!(in_triangle([0.2, 0.2], a, b, c));
        assert!(in_triangle([0.2, 0.2], a, c, b));
        assert!(!in_triangle([0.8, 0.8], a, b, c));
    }

    #[test]
    fn spread_ratio_basics() {
        assert_eq!(spread_ratio(&[1.0, 2.0, 1.5]), 2.0);
        assert!(spread_ratio(&[0.0, 1.0]).is_infinite());
    }
}
