//! Density ratios, the monotonicity identity, Li-Yau and diameter checks.
//!
//! For a centre x the density ratio is Θ(μ,x,r) = μ(B(x,r))/(πr²), and for a
//! closed surface
//!
//! Θ(μ,x) = (1/16π)∫|H|² dμ − (1/π)∫|H/4 + (y−x)⊥/|y−x|²|² dμ(y).
//!
//! The quantity g(r) = Θ(μ,x,r) + (1/16π)∫_{B_r}|H|² + (1/2πr²)∫_{B_r}⟨y−x, H⟩
//! is nondecreasing in r, with g(r) = Θ(μ,x) + (1/π)∫_{B_r}|H/4 + (y−x)⊥/|y−x|²|².

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{mean_curvature, CurvatureField};
use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm2, perp_to_plane, sub};
use crate::mesh::{triangle_ball_area, DiscreteVarifold, FaceIndex};
use crate::sum::{csum, CompensatedSum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    /// μ(B(x,r))/(πr²).
    pub ratios: Vec<f64>,
    /// Extrapolated Θ(μ,x).
    pub limit_estimate: f64,
    /// ∫_{B_r}|H/4 + (y−x)⊥/|y−x|²|² dμ.
    pub remainder: Vec<f64>,
    /// The monotone quantity g(r).
    pub monotone: Vec<f64>,
    /// The smallest radius is under twice the local edge length.
    pub below_resolution: bool,
}

impl DensityProfile {
    /// CSV with columns radius, ratio, remainder, monotone.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("radius,ratio,remainder,monotone\n");
        for k in 0..self.radii.len() {
            let _ = writeln!(s, "{:e},{:e},{:e},{:e}", self.radii[k], self.ratios[k], self.remainder[k], self.monotone[k]);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterCheck {
    pub diameter: f64,
    pub lower_bound: f64,
    pub lower_ok: bool,
    /// diam/√μ, the measured stand-in for the unspecified upper constant.
    pub upper_constant: f64,
    pub mean_sq_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub willmore: f64,
    pub max_density_estimate: f64,
    pub max_density_vertex: usize,
    /// W − 4π·max density.
    pub li_yau_slack: f64,
    /// `None` when ∫|H|² lies outside the diameter-bound hypothesis.
    pub diameter_check: Option<DiameterCheck>,
}

/// Li-Yau slack below −LI_YAU_TOLERANCE·W is reported as a violation.
pub const LI_YAU_TOLERANCE: f64 = 0.05;

/// Relative margin under 32π inside which ∫|H|² is treated as reaching the
/// hypothesis boundary of the diameter bounds.
pub const DIAMETER_HYPOTHESIS_MARGIN: f64 = 0.005;

/// Eight log-spaced radii from 3× the median edge length to half the
/// diameter.
pub fn default_radii(v: &DiscreteVarifold) -> Vec<f64> {
    let lo = 3.0 * v.median_edge_length();
    let hi = (0.5 * v.diameter().value).max(2.0 * lo);
    log_radii(lo, hi, 8)
}

pub fn log_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || !radii.iter().all(|r| *r > 0.0 && r.is_finite()) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec(format!("radii must be positive and strictly increasing: {radii:?}")));
    }
    Ok(())
}

/// Mean curvature of a face: average over its valid corners.
fn face_h(v: &DiscreteVarifold, field: &CurvatureField, f: usize) -> Vec<f64> {
    let n = v.dim();
    let mut h = vec![0.0; n];
    let mut k = 0;
    for &c in &v.face(f) {
        if field.is_valid(c) {
            for (a, b) in h.iter_mut().zip(field.h(c)) {
                *a += b;
            }
            k += 1;
        }
    }
    if k > 0 {
        h.iter_mut().for_each(|a| *a /= k as f64);
    }
    h
}

/// Weighted (∝ 1/r) least-squares line through (r, ratio); returns the
/// intercept at r = 0.
fn extrapolate(radii: &[f64], ratios: &[f64]) -> f64 {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&r, &y) in radii.iter().zip(ratios) {
        let w = 1.0 / r;
        sw += w;
        sx += w * r;
        sy += w * y;
        sxx += w * r * r;
        sxy += w * r * y;
    }
    let det = sw * sxx - sx * sx;
    if radii.len() < 2 || det.abs() <= 1e-300 {
        return ratios[0];
    }
    (sxx * sy - sx * sxy) / det
}

/// Density profile at `x` using a precomputed curvature field.
pub fn density_profile_with_field(
    v: &DiscreteVarifold,
    field: &CurvatureField,
    x: &[f64],
    radii: &[f64],
) -> Result<DensityProfile> {
    check_radii(radii)?;
    if x.len() != v.dim() {
        return Err(Error::InvalidSpec(format!("centre of dimension {} in ℝ^{}", x.len(), v.dim())));
    }
    let rmax = *radii.last().unwrap();
    let m = radii.len();
    let mut mass = vec![CompensatedSum::new(); m];
    let mut rem = vec![CompensatedSum::new(); m];
    let mut hsq = vec![CompensatedSum::new(); m];
    let mut cross = vec![CompensatedSum::new(); m];
    for f in 0..v.num_faces() {
        let [a, b, c] = v.face(f);
        let (pa, pb, pc) = (v.vertex(a), v.vertex(b), v.vertex(c));
        let centroid = v.face_centroid(f);
        let reach = dist(&centroid, pa).max(dist(&centroid, pb)).max(dist(&centroid, pc));
        let dc = dist(&centroid, x);
        if dc - reach > rmax {
            continue;
        }
        let theta = v.multiplicity()[f] as f64;
        let h = face_h(v, field, f);
        let d = sub(&centroid, x);
        let (t1, t2) = v.face_frame(f);
        let dperp = perp_to_plane(&d, &t1, &t2);
        let d2 = norm2(&d);
        let integrand: f64 = if d2 > 0.0 {
            h.iter().zip(&dperp).map(|(hi, pi)| (hi / 4.0 + pi / d2).powi(2)).sum()
        } else {
            norm2(&h) / 16.0
        };
        let h2 = norm2(&h);
        let dh = dot(&d, &h);
        for (k, &r) in radii.iter().enumerate() {
            if dc - reach > r {
                continue;
            }
            let area = if dc + reach <= r { v.face_areas()[f] } else { triangle_ball_area(pa, pb, pc, x, r) };
            let w = theta * area;
            mass[k].add(w);
            rem[k].add(w * integrand);
            hsq[k].add(w * h2);
            cross[k].add(w * dh);
        }
    }
    let ratios: Vec<f64> = (0..m).map(|k| mass[k].value() / (PI * radii[k] * radii[k])).collect();
    let monotone: Vec<f64> = (0..m)
        .map(|k| {
            let r2 = radii[k] * radii[k];
            ratios[k] + hsq[k].value() / (16.0 * PI) + cross[k].value() / (2.0 * PI * r2)
        })
        .collect();
    let (nearest, _) = v.nearest_vertex(x);
    let local = v.local_edge_length(nearest);
    let admissible: Vec<usize> = (0..m).filter(|&k| radii[k] >= 2.0 * local).collect();
    let pick: Vec<usize> = if admissible.len() >= 3 { admissible[..3].to_vec() } else { (0..m.min(3)).collect() };
    let rr: Vec<f64> = pick.iter().map(|&k| radii[k]).collect();
    let yy: Vec<f64> = pick.iter().map(|&k| ratios[k]).collect();
    Ok(DensityProfile {
        center: x.to_vec(),
        radii: radii.to_vec(),
        ratios,
        limit_estimate: extrapolate(&rr, &yy).max(0.0),
        remainder: rem.iter().map(CompensatedSum::value).collect(),
        monotone,
        below_resolution: radii[0] < 2.0 * local,
    })
}

pub fn density_profile(v: &DiscreteVarifold, x: &[f64], radii: &[f64]) -> Result<DensityProfile> {
    let field = mean_curvature(v)?;
    density_profile_with_field(v, &field, x, radii)
}

/// Extrapolated density at `x` from the ball masses only (no curvature).
pub fn density_limit(v: &DiscreteVarifold, x: &[f64], radii: &[f64]) -> Result<f64> {
    check_radii(radii)?;
    let masses = v.ball_masses(x, radii);
    let ratios: Vec<f64> = masses.iter().zip(radii).map(|(m, r)| m / (PI * r * r)).collect();
    let k = radii.len().min(3);
    Ok(extrapolate(&radii[..k], &ratios[..k]).max(0.0))
}

/// Right-hand side of the density identity at vertex `p`.
pub fn density_at_point_via_energy(v: &DiscreteVarifold, p: usize) -> Result<f64> {
    let field = mean_curvature(v)?;
    density_at_point_with_field(v, &field, &v.tangent_frames(), p)
}

pub fn density_at_point_with_field(
    v: &DiscreteVarifold,
    field: &CurvatureField,
    frames: &crate::mesh::TangentFrames,
    p: usize,
) -> Result<f64> {
    if p >= v.num_vertices() {
        return Err(Error::InvalidIndex { face: usize::MAX, index: p });
    }
    if !v.is_closed() {
        return Err(Error::NotClosed);
    }
    let x = v.vertex(p);
    let h2 = field.mean_sq_integral();
    let remainder = csum((0..v.num_vertices()).filter(|&y| y != p && field.is_valid(y)).map(|y| {
        let d = sub(v.vertex(y), x);
        let d2 = norm2(&d);
        let dp = frames.perp(y, &d);
        let s: f64 = field.h(y).iter().zip(&dp).map(|(h, q)| (h / 4.0 + q / d2).powi(2)).sum();
        s * field.area(y)
    }));
    Ok(h2 / (16.0 * PI) - remainder / PI)
}

/// Lower diameter bound (1/7)√(μ/4π) ≤ diam and the measured diam/√μ.
pub fn diameter_bounds_check(v: &DiscreteVarifold) -> Result<DiameterCheck> {
    let field = mean_curvature(v)?;
    diameter_check_with_field(v, &field)
}

pub fn diameter_check_with_field(v: &DiscreteVarifold, field: &CurvatureField) -> Result<DiameterCheck> {
    let h2 = field.mean_sq_integral();
    let limit = 32.0 * PI;
    if h2 >= limit * (1.0 - DIAMETER_HYPOTHESIS_MARGIN) {
        return Err(Error::HypothesisViolated(format!(
            "∫|H|² dμ = {h2:.6} is not below 32π = {limit:.6} (margin {DIAMETER_HYPOTHESIS_MARGIN})"
        )));
    }
    let mu = v.total_mass();
    let diameter = v.diameter().value;
    let lower_bound = (mu / (4.0 * PI)).sqrt() / 7.0;
    Ok(DiameterCheck {
        diameter,
        lower_bound,
        lower_ok: diameter >= lower_bound,
        upper_constant: diameter / mu.sqrt(),
        mean_sq_integral: h2,
    })
}

/// W ≥ 4π·max Θ over vertex-centred density estimates.
pub fn li_yau_check(v: &DiscreteVarifold) -> Result<MonotonicityReport> {
    if !v.is_closed() {
        return Err(Error::NotClosed);
    }
    let field = mean_curvature(v)?;
    let energy = crate::curvature::energy_from_field(v, &field);
    let radii = default_radii(v);
    let small = &radii[..3];
    check_radii(small)?;
    let index = FaceIndex::new(v, small[2])?;
    let densities: Vec<f64> = (0..v.num_vertices())
        .into_par_iter()
        .map(|p| {
            let masses = v.ball_masses_indexed(&index, v.vertex(p), small);
            let ratios: Vec<f64> = masses.iter().zip(small).map(|(m, r)| m / (PI * r * r)).collect();
            extrapolate(small, &ratios).max(0.0)
        })
        .collect();
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
    for (p, &d) in densities.iter().enumerate() {
        if d > best {
            best = d;
            arg = p;
        }
    }
    let w = energy.willmore;
    let slack = w - 4.0 * PI * best;
    if slack < -LI_YAU_TOLERANCE * w {
        return Err(Error::LiYauViolation { slack, willmore: w });
    }
    Ok(MonotonicityReport {
        willmore: w,
        max_density_estimate: best,
        max_density_vertex: arg,
        li_yau_slack: slack,
        diameter_check: diameter_check_with_field(v, &field).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation_recovers_line() {
        let r = [0.1, 0.2, 0.4];
        let y: Vec<f64> = r.iter().map(|x| 1.5 + 0.7 * x).collect();
        assert!((extrapolate(&r, &y) - 1.5).abs() < 1e-13);
    }

    #[test]
    fn radii_validation() {
        assert!(check_radii(&[0.1, 0.1]).is_err());
        assert!(check_radii(&[-0.1, 0.1]).is_err());
        assert!(check_radii(&[]).is_err());
        assert!(check_radii(&[0.1, 0.2]).is_ok());
    }

    #[test]
    fn log_radii_endpoints() {
        let r = log_radii(0.1, 1.0, 8);
        assert_eq!(r.len(), 8);
        assert!((r[0] - 0.1).abs() < 1e-15 && (r[7] - 1.0).abs() < 1e-14);
    }
}
