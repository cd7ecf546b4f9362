//! Discrete mean curvature as the first variation of area, angle-defect
//! Gauss curvature and the Willmore energy.
//!
//! The mean curvature vector at a vertex is the multiplicity-weighted
//! cotangent Laplacian of the coordinate functions divided by the mixed
//! vertex area. With this convention the unit sphere has H = −2x (pointing
//! to the centre, |H| = 2) and W = ¼∫|H|² dμ = 4π.
//!
//! Junction and boundary vertices are excluded from every curvature
//! integrand; their measure is reported as `excluded_mass`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::mesh::{DiscreteVarifold, VertexArea, VertexTag};
use crate::sum::{csum, CompensatedSum};

#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub dim: usize,
    /// Flat `dim`-strided mean curvature vectors (zero where masked).
    pub mean_curvature: Vec<f64>,
    /// Pointwise Gauss curvature (zero where masked).
    pub gauss_curvature: Vec<f64>,
    pub vertex_area: VertexArea,
    pub validity_mask: Vec<bool>,
}

impl CurvatureField {
    #[inline]
    pub fn h(&self, v: usize) -> &[f64] {
        &self.mean_curvature[v * self.dim..(v + 1) * self.dim]
    }

    #[inline]
    pub fn area(&self, v: usize) -> f64 {
        self.vertex_area.weighted[v]
    }

    pub fn is_valid(&self, v: usize) -> bool {
        self.validity_mask[v]
    }

    pub fn num_vertices(&self) -> usize {
        self.validity_mask.len()
    }

    /// ∫|H|² dμ over valid vertices.
    pub fn mean_sq_integral(&self) -> f64 {
        csum((0..self.num_vertices()).filter(|&v| self.validity_mask[v]).map(|v| norm2(self.h(v)) * self.area(v)))
    }

    /// ∫K dμ over valid vertices.
    pub fn gauss_integral(&self) -> f64 {
        csum((0..self.num_vertices()).filter(|&v| self.validity_mask[v]).map(|v| self.gauss_curvature[v] * self.area(v)))
    }

    /// Per-vertex CSV: index, H components, |H|, K, area, mask.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("vertex");
        for k in 0..self.dim {
            let _ = write!(s, ",h{k}");
        }
        s.push_str(",h_norm,gauss,area,valid\n");
        for v in 0..self.num_vertices() {
            let _ = write!(s, "{v}");
            for x in self.h(v) {
                let _ = write!(s, ",{x:e}");
            }
            let _ = writeln!(
                s,
                ",{:e},{:e},{:e},{}",
                norm2(self.h(v)).sqrt(),
                self.gauss_curvature[v],
                self.area(v),
                self.validity_mask[v] as u8
            );
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// W = ¼∫|H|² dμ.
    pub willmore: f64,
    pub mean_sq_integral: f64,
    pub gauss_integral: f64,
    /// ∫|A|² = ∫|H|² − 2∫K.
    pub full_sff_sq_integral: f64,
    /// ∫|Å|² = ∫|A|² − ½∫|H|².
    pub tracefree_sq_integral: f64,
    /// Measure carried by masked (junction/boundary) vertices.
    pub excluded_mass: f64,
    /// Set for n > 3, where the Gauss-equation route to ∫|A|² only sees the
    /// intrinsic curvature.
    pub codim_heuristic: bool,
}

/// Multiplicity-weighted cotangent Laplacian of a per-vertex field with `k`
/// components (flat, `k`-strided): at vertex i,
/// Σ_f θ_f ½(cot α_ij + cot β_ij)(u_j − u_i). Applied to the coordinates it
/// gives the integrated mean curvature vector H_i a_i.
pub fn cotan_laplacian(v: &DiscreteVarifold, u: &[f64], k: usize) -> Vec<f64> {
    assert_eq!(u.len(), k * v.num_vertices(), "field length does not match the mesh");
    let per_face: Vec<[Vec<f64>; 3]> = (0..v.num_faces())
        .into_par_iter()
        .map(|f| {
            let t = v.face(f);
            let cot = v.face_cotangents(f);
            let theta = v.multiplicity()[f] as f64;
            std::array::from_fn(|c| {
                let (j, l) = ((c + 1) % 3, (c + 2) % 3);
                let at = |i: usize| &u[t[i] * k..(t[i] + 1) * k];
                let (p, uj, ul) = (at(c), at(j), at(l));
                // edge (c, j) is opposite corner l, edge (c, l) opposite corner j
                (0..k).map(|a| 0.5 * theta * (cot[l] * (uj[a] - p[a]) + cot[j] * (ul[a] - p[a]))).collect()
            })
        })
        .collect();
    let mut acc = vec![CompensatedSum::new(); k * v.num_vertices()];
    for (f, contrib) in per_face.iter().enumerate() {
        let t = v.face(f);
        for c in 0..3 {
            for a in 0..k {
                acc[t[c] * k + a].add(contrib[c][a]);
            }
        }
    }
    acc.iter().map(CompensatedSum::value).collect()
}

/// ∫|∇u|² of the piecewise-affine interpolant: ½ Σ_f θ_f Σ_corners
/// cot(corner) |u_i − u_j|² over the opposite edge.
pub fn dirichlet_integral(v: &DiscreteVarifold, u: &[f64], k: usize) -> f64 {
    csum((0..v.num_faces()).map(|f| {
        let t = v.face(f);
        let cot = v.face_cotangents(f);
        let theta = v.multiplicity()[f] as f64;
        let mut s = 0.0;
        for c in 0..3 {
            let (i, j) = (t[(c + 1) % 3], t[(c + 2) % 3]);
            let d: f64 = (0..k).map(|a| (u[i * k + a] - u[j * k + a]).powi(2)).sum();
            s += cot[c] * d;
        }
        0.5 * theta * s
    }))
}

/// Angle defect 2π − Σ incident angles per vertex.
pub fn angle_defects(v: &DiscreteVarifold) -> Vec<f64> {
    let angles: Vec<[f64; 3]> = (0..v.num_faces()).into_par_iter().map(|f| v.face_angles(f)).collect();
    let mut sums = vec![CompensatedSum::new(); v.num_vertices()];
    for (f, a) in angles.iter().enumerate() {
        for k in 0..3 {
            sums[v.face(f)[k]].add(a[k]);
        }
    }
    sums.iter().map(|s| 2.0 * PI - s.value()).collect()
}

/// Mean curvature, Gauss curvature and vertex areas of a mesh.
pub fn mean_curvature(v: &DiscreteVarifold) -> Result<CurvatureField> {
    let n = v.dim();
    let area = v.vertex_areas();
    let lap = cotan_laplacian(v, v.vertex_coords(), n);
    let defect = angle_defects(v);
    let mask: Vec<bool> = v.tags().iter().map(|t| *t == VertexTag::Interior).collect();
    let mut h = vec![0.0; lap.len()];
    let mut k = vec![0.0; v.num_vertices()];
    for i in 0..v.num_vertices() {
        if !mask[i] {
            continue;
        }
        let a = area.weighted[i];
        for c in 0..n {
            h[i * n + c] = lap[i * n + c] / a;
        }
        k[i] = defect[i] / area.geometric[i];
        if !(h[i * n..(i + 1) * n].iter().all(|x| x.is_finite()) && k[i].is_finite()) {
            return Err(Error::NumericFailure { vertex: i });
        }
    }
    Ok(CurvatureField { dim: n, mean_curvature: h, gauss_curvature: k, vertex_area: area, validity_mask: mask })
}

/// Pointwise Gauss curvature by angle defect (masked vertices report 0).
pub fn gauss_curvature(v: &DiscreteVarifold) -> Result<Vec<f64>> {
    Ok(mean_curvature(v)?.gauss_curvature)
}

/// Σ_v (2π − Σ angles) over all vertices; equals 2πχ on closed meshes.
pub fn total_angle_defect(v: &DiscreteVarifold) -> f64 {
    csum(angle_defects(v))
}

pub fn energy_from_field(v: &DiscreteVarifold, field: &CurvatureField) -> EnergyBreakdown {
    let h2 = field.mean_sq_integral();
    let kint = field.gauss_integral();
    let a2 = h2 - 2.0 * kint;
    let excluded = csum((0..field.num_vertices()).filter(|&i| !field.validity_mask[i]).map(|i| field.area(i)));
    EnergyBreakdown {
        willmore: 0.25 * h2,
        mean_sq_integral: h2,
        gauss_integral: kint,
        full_sff_sq_integral: a2,
        tracefree_sq_integral: a2 - 0.5 * h2,
        excluded_mass: excluded,
        codim_heuristic: v.dim() > 3,
    }
}

pub fn willmore_energy(v: &DiscreteVarifold) -> Result<EnergyBreakdown> {
    let field = mean_curvature(v)?;
    Ok(energy_from_field(v, &field))
}

/// δ = √max(W − 4π, 0).
pub fn delta_tolerance(v: &DiscreteVarifold) -> Result<f64> {
    Ok(delta_from_willmore(willmore_energy(v)?.willmore))
}

pub fn delta_from_willmore(w: f64) -> f64 {
    (w - 4.0 * PI).max(0.0).sqrt()
}
