//! Inversion about a point and the mean curvature transformation law.
//!
//! With x measured from the pole p, f_p(x) = x/|x|² + p and
//!
//! H̃(f(x)) = |x|² R_x(H + 4x⊥/|x|²),   R_x(w) = w − 2⟨w,x⟩x/|x|²,
//!
//! so that |H̃|² dμ̃ = |H + 4x⊥/|x|²|² dμ and the density of the image at
//! infinity equals the density of the source at p.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{mean_curvature, CurvatureField};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, sub};
use crate::mesh::{point_triangle_distance, DiscreteVarifold, VertexTag};
use crate::monotonicity::{default_radii, density_profile_with_field, log_radii};
use crate::sum::csum;

/// f_p(x) = (x − p)/|x − p|² + p.
pub fn invert_point(p: &[f64], x: &[f64]) -> Vec<f64> {
    let d = sub(x, p);
    let r2 = norm2(&d);
    d.iter().zip(p).map(|(di, pi)| di / r2 + pi).collect()
}

/// R_x(w) = w − 2⟨w,x⟩x/|x|².
pub fn reflection(x_dir: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let n2 = norm2(x_dir);
    if !(n2 > 0.0) {
        return Err(Error::ZeroDirection);
    }
    let s = 2.0 * dot(w, x_dir) / n2;
    Ok(w.iter().zip(x_dir).map(|(wi, xi)| wi - s * xi).collect())
}

/// H̃ = |x|² R_x(H + 4x⊥/|x|²) for x = y − p, given H and x⊥ at y.
pub fn transform_mean_curvature(x: &[f64], h: &[f64], x_perp: &[f64]) -> Result<Vec<f64>> {
    let r2 = norm2(x);
    let w: Vec<f64> = h.iter().zip(x_perp).map(|(hi, pi)| hi + 4.0 * pi / r2).collect();
    Ok(reflection(x, &w)?.into_iter().map(|c| c * r2).collect())
}

#[derive(Debug, Clone)]
pub struct InversionResult {
    pub image: DiscreteVarifold,
    /// Per image vertex, from the source curvature by the transformation
    /// law (zero where the source vertex is masked).
    pub transformed_h: Vec<f64>,
    /// Curvature of the image mesh computed from scratch.
    pub recomputed: CurvatureField,
    pub source_curvature: CurvatureField,
    pub excised_mass: f64,
    pub center: Vec<f64>,
    pub eta: f64,
    /// Source index of every image vertex.
    pub source_vertex: Vec<usize>,
    /// Source index of every image face.
    pub source_face: Vec<usize>,
}

impl InversionResult {
    pub fn transformed(&self, v: usize) -> &[f64] {
        let n = self.image.dim();
        &self.transformed_h[v * n..(v + 1) * n]
    }

    /// Image vertices whose source and image curvature are both defined.
    pub fn paired_vertices(&self) -> Vec<usize> {
        (0..self.image.num_vertices())
            .filter(|&i| self.recomputed.is_valid(i) && self.source_curvature.is_valid(self.source_vertex[i]))
            .collect()
    }
}

/// Excised measure above this fraction of the total is an error.
pub const MAX_EXCISED_FRACTION: f64 = 0.10;

/// Inverts `v` about `p`, excising every face within distance `eta` of `p`.
pub fn invert(v: &DiscreteVarifold, p: &[f64], eta: f64) -> Result<InversionResult> {
    if p.len() != v.dim() {
        return Err(Error::InvalidSpec(format!("pole of dimension {} in ℝ^{}", p.len(), v.dim())));
    }
    let dist: Vec<f64> = (0..v.num_faces())
        .into_par_iter()
        .map(|f| {
            let [a, b, c] = v.face(f);
            point_triangle_distance(v.vertex(a), v.vertex(b), v.vertex(c), p)
        })
        .collect();
    let gap = dist.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = v.bbox_diagonal();
    let on_mesh = gap <= 1e-12 * scale;
    if !(eta > 0.0) {
        return Err(Error::PoleOnMesh { distance: gap, eta });
    }
    if on_mesh {
        let (nearest, _) = v.nearest_vertex(p);
        if eta < 2.0 * v.local_edge_length(nearest) {
            return Err(Error::PoleOnMesh { distance: gap, eta });
        }
    }
    let keep: Vec<usize> = (0..v.num_faces()).filter(|&f| dist[f] >= eta).collect();
    let total = v.total_mass();
    let excised = csum((0..v.num_faces()).filter(|&f| dist[f] < eta).map(|f| v.multiplicity()[f] as f64 * v.face_areas()[f]));
    if excised > MAX_EXCISED_FRACTION * total {
        return Err(Error::ExcisionTooLarge { excised, total });
    }
    if keep.is_empty() {
        return Err(Error::ExcisionTooLarge { excised, total });
    }
    let surviving_gap = keep.iter().map(|&f| dist[f]).fold(f64::INFINITY, f64::min);
    if surviving_gap < (eta / 10.0).max(1e-12 * scale) {
        return Err(Error::PoleOnMesh { distance: surviving_gap, eta });
    }

    let source_curvature = mean_curvature(v)?;
    let frames = v.tangent_frames();
    let (kept, source_vertex) = v.subset(&keep)?;
    let image = kept.map_vertices(|x| invert_point(p, x))?;
    let n = v.dim();
    let transformed_h: Vec<f64> = source_vertex
        .par_iter()
        .map(|&s| {
            if !source_curvature.is_valid(s) {
                return Ok(vec![0.0; n]);
            }
            let x = sub(v.vertex(s), p);
            let xp = frames.perp(s, &x);
            transform_mean_curvature(&x, source_curvature.h(s), &xp)
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    let recomputed = mean_curvature(&image)?;
    Ok(InversionResult {
        image,
        transformed_h,
        recomputed,
        source_curvature,
        excised_mass: excised,
        center: p.to_vec(),
        eta,
        source_vertex,
        source_face: keep,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionIdentityReport {
    /// ∫|H̃|² dμ̃ from the image mesh.
    pub lhs_energy: f64,
    /// ∫|H + 4x⊥/|x|²|² dμ from the source mesh.
    pub rhs_energy: f64,
    /// |lhs − rhs| / max(lhs, rhs).
    pub relative_gap: f64,
    /// ∫|H|² dμ − 16π Θ̂(μ,p).
    pub energy_minus_density: f64,
    pub theta_infinity: f64,
    pub theta_at_p: f64,
    pub excised_mass: f64,
    pub eta: f64,
    /// Radii used for the density at infinity.
    pub far_radii: Vec<f64>,
}

/// Default excision radius at a vertex pole: 2.5× its longest incident edge.
pub fn default_eta(v: &DiscreteVarifold, p: usize) -> f64 {
    2.5 * v.local_edge_length(p)
}

/// Both sides of the energy identity, and Θ(μ̃,∞) against Θ(μ,p), for a
/// pole at vertex `p` of a closed mesh.
pub fn verify_inversion_identities(v: &DiscreteVarifold, p: usize, eta: f64) -> Result<InversionIdentityReport> {
    if !v.is_closed() {
        return Err(Error::NotClosed);
    }
    if p >= v.num_vertices() {
        return Err(Error::InvalidIndex { face: usize::MAX, index: p });
    }
    let pole = v.vertex(p).to_vec();
    let inv = invert(v, &pole, eta)?;
    verify_with_inversion(v, &inv)
}

pub fn verify_with_inversion(v: &DiscreteVarifold, inv: &InversionResult) -> Result<InversionIdentityReport> {
    let pole = &inv.center;
    let frames = v.tangent_frames();
    let paired = inv.paired_vertices();
    let lhs = csum(paired.iter().map(|&i| norm2(inv.recomputed.h(i)) * inv.recomputed.area(i)));
    let rhs = csum(paired.iter().map(|&i| {
        let s = inv.source_vertex[i];
        let x = sub(v.vertex(s), pole);
        let r2 = norm2(&x);
        let xp = frames.perp(s, &x);
        let w: f64 = inv.source_curvature.h(s).iter().zip(&xp).map(|(h, q)| (h + 4.0 * q / r2).powi(2)).sum();
        w * inv.source_curvature.area(s)
    }));

    let near = default_radii(v);
    let theta_at_p = density_profile_with_field(v, &inv.source_curvature, pole, &near)?.limit_estimate;

    // the image is complete inside the ball reaching its nearest boundary vertex
    let inner = (0..inv.image.num_vertices())
        .filter(|&i| inv.image.tag(i) != VertexTag::Interior)
        .map(|i| crate::linalg::dist(inv.image.vertex(i), pole))
        .fold(f64::INFINITY, f64::min);
    let cap = 0.5 * if inner.is_finite() { inner } else { inv.image.diameter().value };
    let far_radii = log_radii(0.5 * cap, cap, 3);
    let masses = inv.image.ball_masses(pole, &far_radii);
    let theta_infinity = slope_against_area(&far_radii, &masses);

    let h2 = inv.source_curvature.mean_sq_integral();
    Ok(InversionIdentityReport {
        lhs_energy: lhs,
        rhs_energy: rhs,
        relative_gap: relative_gap(lhs, rhs),
        energy_minus_density: h2 - 16.0 * std::f64::consts::PI * theta_at_p,
        theta_infinity,
        theta_at_p,
        excised_mass: inv.excised_mass,
        eta: inv.eta,
        far_radii,
    })
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// Least-squares slope of μ(B_ρ) against πρ².
fn slope_against_area(radii: &[f64], masses: &[f64]) -> f64 {
    let xs: Vec<f64> = radii.iter().map(|r| std::f64::consts::PI * r * r).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = masses.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(masses).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
