//! Finite-difference check of the Bochner identity for conformal immersions
//! of the plane, Δv = −2 Σ_α det(D²fᵅ) with v = ½|Df|² = e^{2w}, and of the
//! Liouville step: after solving the decaying Poisson problem for v₀ the
//! difference v − v₀ is harmonic and bounded, hence nearly constant.
//!
//! Sign convention of the Poisson solve: `rhs = 2 Σ det(D²fᵅ)` and
//! −Δv₀ = rhs, so that v₀ ≈ (∬rhs / 2π) log(1/|z|) far away.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::csum;

/// Samples of a map from the square grid on [−L, L]² into ℝⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridImmersion {
    pub half_width: f64,
    pub spacing: f64,
    /// Nodes per side.
    pub nodes: usize,
    pub dim: usize,
    /// Node (i, j) component α at `(j·nodes + i)·dim + α`; i runs along x.
    pub values: Vec<f64>,
    pub analytic: bool,
}

/// A scalar field on the nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub half_width: f64,
    pub spacing: f64,
    pub nodes: usize,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(g: &GridImmersion) -> Self {
        Self { half_width: g.half_width, spacing: g.spacing, nodes: g.nodes, values: vec![0.0; g.nodes * g.nodes] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nodes + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.values[j * self.nodes + i] = x;
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing
    }

    /// Rows `x,y,value` over the nodes in `[lo, hi]²` (index range).
    pub fn to_csv(&self, lo: usize, hi: usize) -> String {
        let mut s = String::from("x,y,value\n");
        for j in lo..=hi {
            for i in lo..=hi {
                let _ = writeln!(s, "{:e},{:e},{:e}", self.coord(i), self.coord(j), self.at(i, j));
            }
        }
        s
    }
}

impl GridImmersion {
    /// Samples `f` on the grid of spacing `h` over [−L, L]². `L/h` must be
    /// (close to) an integer.
    pub fn sample<F: Fn(f64, f64) -> Vec<f64>>(half_width: f64, h: f64, analytic: bool, f: F) -> Result<Self> {
        if !(half_width > 0.0 && h > 0.0) {
            return Err(Error::InvalidSpec(format!("grid half-width {half_width} spacing {h}")));
        }
        let cells = (2.0 * half_width / h).round();
        if (cells * h - 2.0 * half_width).abs() > 1e-9 * half_width {
            return Err(Error::InvalidSpec(format!("spacing {h} does not divide [−{half_width}, {half_width}]")));
        }
        let nodes = cells as usize + 1;
        if nodes < 5 {
            return Err(Error::GridTooSmall { nodes });
        }
        let mut values = Vec::new();
        let mut dim = 0;
        for j in 0..nodes {
            let y = -half_width + j as f64 * h;
            for i in 0..nodes {
                let x = -half_width + i as f64 * h;
                let p = f(x, y);
                if dim == 0 {
                    dim = p.len();
                } else if p.len() != dim {
                    return Err(Error::InvalidSpec("grid map changes dimension".into()));
                }
                if !p.iter().all(|c| c.is_finite()) {
                    return Err(Error::NumericFailure { vertex: j * nodes + i });
                }
                values.extend(p);
            }
        }
        if dim < 2 {
            return Err(Error::InvalidSpec(format!("grid map into ℝ^{dim}")));
        }
        Ok(Self { half_width, spacing: h, nodes, dim, values, analytic })
    }

    #[inline]
    fn f(&self, i: usize, j: usize, a: usize) -> f64 {
        self.values[(j * self.nodes + i) * self.dim + a]
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing
    }

    /// Central first derivatives (f_x, f_y) of component `a` at an interior node.
    fn d1(&self, i: usize, j: usize, a: usize) -> (f64, f64) {
        let h2 = 2.0 * self.spacing;
        ((self.f(i + 1, j, a) - self.f(i - 1, j, a)) / h2, (self.f(i, j + 1, a) - self.f(i, j - 1, a)) / h2)
    }

    /// Central second derivatives (f_xx, f_yy, f_xy) of component `a`.
    fn d2(&self, i: usize, j: usize, a: usize) -> (f64, f64, f64) {
        let h = self.spacing;
        let c = self.f(i, j, a);
        let fxx = (self.f(i + 1, j, a) - 2.0 * c + self.f(i - 1, j, a)) / (h * h);
        let fyy = (self.f(i, j + 1, a) - 2.0 * c + self.f(i, j - 1, a)) / (h * h);
        let fxy = (self.f(i + 1, j + 1, a) - self.f(i + 1, j - 1, a) - self.f(i - 1, j + 1, a) + self.f(i - 1, j - 1, a))
            / (4.0 * h * h);
        (fxx, fyy, fxy)
    }

    /// v = ½|D_h f|² on nodes 1..=m−2 (zero on the outer ring).
    pub fn conformal_factor(&self) -> GridField {
        let mut v = GridField::zeros(self);
        let m = self.nodes;
        for j in 1..m - 1 {
            for i in 1..m - 1 {
                let s: f64 = (0..self.dim)
                    .map(|a| {
                        let (fx, fy) = self.d1(i, j, a);
                        fx * fx + fy * fy
                    })
                    .sum();
                v.set(i, j, 0.5 * s);
            }
        }
        v
    }

    /// 2 Σ_α det(D²_h fᵅ) on nodes 1..=m−2.
    pub fn hessian_rhs(&self) -> GridField {
        let mut r = GridField::zeros(self);
        let m = self.nodes;
        for j in 1..m - 1 {
            for i in 1..m - 1 {
                let s: f64 = (0..self.dim)
                    .map(|a| {
                        let (fxx, fyy, fxy) = self.d2(i, j, a);
                        fxx * fyy - fxy * fxy
                    })
                    .sum();
                r.set(i, j, 2.0 * s);
            }
        }
        r
    }

    /// ‖D²_h f‖²_{L²} over nodes 1..=m−2.
    pub fn hessian_l2_sq(&self) -> f64 {
        let m = self.nodes;
        let h2 = self.spacing * self.spacing;
        csum((1..m - 1).flat_map(|j| (1..m - 1).map(move |i| (i, j))).map(|(i, j)| {
            let s: f64 = (0..self.dim)
                .map(|a| {
                    let (fxx, fyy, fxy) = self.d2(i, j, a);
                    fxx * fxx + fyy * fyy + 2.0 * fxy * fxy
                })
                .sum();
            s * h2
        }))
    }

    /// (max conformality violation, max |Df|²) over nodes 1..=m−2.
    pub fn conformal_defect(&self) -> (f64, f64) {
        let m = self.nodes;
        let (mut defect, mut scale) = (0.0f64, 0.0f64);
        for j in 1..m - 1 {
            for i in 1..m - 1 {
                let (mut g11, mut g22, mut g12) = (0.0, 0.0, 0.0);
                for a in 0..self.dim {
                    let (fx, fy) = self.d1(i, j, a);
                    g11 += fx * fx;
                    g22 += fy * fy;
                    g12 += fx * fy;
                }
                defect = defect.max(g12.abs() + (g11 - g22).abs());
                scale = scale.max(g11 + g22);
            }
        }
        (defect, scale)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BochnerReport {
    /// Σ |Δ_h v + 2Σdet(D²_h fᵅ)| h² over nodes 2..=m−3.
    pub residual_l1: f64,
    pub conformal_defect: f64,
    /// Set when the conformal defect exceeds 5% of max|Df|².
    pub conformal_warning: bool,
    /// Mean of v over the outer ring of its domain.
    pub v_infinity_estimate: f64,
    /// max − min of v − v₀ over nodes 2..=m−3.
    pub liouville_spread: f64,
    pub rhs_sup: f64,
    pub rhs_integral: f64,
    pub v0_sup: f64,
    pub hessian_l2_sq: f64,
    /// max|v₀| / ‖D²f‖²_{L²}.
    pub sup_ratio: f64,
    pub spacing: f64,
    pub solver_iterations: usize,
}

/// Residual part of the report: (residual_l1, conformal defect, warning).
pub fn bochner_residual(g: &GridImmersion) -> Result<(f64, f64, bool)> {
    let m = g.nodes;
    if m < 5 {
        return Err(Error::GridTooSmall { nodes: m });
    }
    let v = g.conformal_factor();
    let rhs = g.hessian_rhs();
    let h = g.spacing;
    let res = csum((2..m - 2).flat_map(|j| (2..m - 2).map(move |i| (i, j))).map(|(i, j)| {
        let lap = (v.at(i + 1, j) + v.at(i - 1, j) + v.at(i, j + 1) + v.at(i, j - 1) - 4.0 * v.at(i, j)) / (h * h);
        (lap + rhs.at(i, j)).abs() * h * h
    }));
    let (defect, scale) = g.conformal_defect();
    Ok((res, defect, defect > 0.05 * scale))
}

/// Outcome of the Poisson solve.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub v0: GridField,
    pub iterations: usize,
    pub relative_residual: f64,
}

pub const POISSON_TOLERANCE: f64 = 1e-10;

/// Solves −Δ_h v₀ = rhs on nodes 2..=m−3 with Dirichlet data
/// (∬rhs / 2π) log(1/|z|) on the ring of nodes 1 and m−2 (conjugate
/// gradients, deterministic sequential reductions).
pub fn solve_decay_poisson(rhs: &GridField, g: &GridImmersion) -> Result<PoissonSolution> {
    let m = g.nodes;
    if m < 5 || rhs.nodes != m {
        return Err(Error::GridTooSmall { nodes: m.min(rhs.nodes) });
    }
    if let Some(k) = rhs.values.iter().position(|x| !x.is_finite()) {
        return Err(Error::NumericFailure { vertex: k });
    }
    let h = g.spacing;
    let (lo, hi) = (2, m - 3);
    let mass = csum((lo..=hi).flat_map(|j| (lo..=hi).map(move |i| (i, j))).map(|(i, j)| rhs.at(i, j) * h * h));
    let mut v0 = GridField::zeros(g);
    for j in 1..m - 1 {
        for i in 1..m - 1 {
            if i == 1 || j == 1 || i == m - 2 || j == m - 2 {
                let r = g.coord(i).hypot(g.coord(j));
                let val = if r > 0.0 { mass / (2.0 * PI) * (1.0 / r).ln() } else { 0.0 };
                v0.set(i, j, val);
            }
        }
    }
    let k = hi - lo + 1;
    let idx = |i: usize, j: usize| (j - lo) * k + (i - lo);
    // b = h²·rhs + boundary neighbours
    let mut b = vec![0.0; k * k];
    for j in lo..=hi {
        for i in lo..=hi {
            let mut s = h * h * rhs.at(i, j);
            for (a, c) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
                if a < lo || a > hi || c < lo || c > hi {
                    s += v0.at(a, c);
                }
            }
            b[idx(i, j)] = s;
        }
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for j in 0..k {
            for i in 0..k {
                let c = x[j * k + i];
                let mut s = 4.0 * c;
                if i > 0 {
                    s -= x[j * k + i - 1];
                }
                if i + 1 < k {
                    s -= x[j * k + i + 1];
                }
                if j > 0 {
                    s -= x[(j - 1) * k + i];
                }
                if j + 1 < k {
                    s -= x[(j + 1) * k + i];
                }
                out[j * k + i] = s;
            }
        }
    };
    let dotp = |a: &[f64], b: &[f64]| csum(a.iter().zip(b).map(|(x, y)| x * y));
    let bnorm = dotp(&b, &b).sqrt();
    let mut x = vec![0.0; k * k];
    let mut iterations = 0;
    let mut rel = 0.0;
    if bnorm > 0.0 {
        let mut r = b.clone();
        let mut p = r.clone();
        let mut ap = vec![0.0; k * k];
        let mut rr = dotp(&r, &r);
        let max_iter = 20 * k + 100;
        loop {
            rel = rr.sqrt() / bnorm;
            if rel <= POISSON_TOLERANCE {
                break;
            }
            if iterations >= max_iter || !rel.is_finite() {
                return Err(Error::SolverDiverged { iterations, residual: rel });
            }
            apply(&p, &mut ap);
            let alpha = rr / dotp(&p, &ap);
            for t in 0..x.len() {
                x[t] += alpha * p[t];
                r[t] -= alpha * ap[t];
            }
            let rr_new = dotp(&r, &r);
            let beta = rr_new / rr;
            for t in 0..p.len() {
                p[t] = r[t] + beta * p[t];
            }
            rr = rr_new;
            iterations += 1;
        }
        // report the true residual, not the recursively updated one
        let mut ax = vec![0.0; k * k];
        apply(&x, &mut ax);
        let true_res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        rel = dotp(&true_res, &true_res).sqrt() / bnorm;
    }
    for j in lo..=hi {
        for i in lo..=hi {
            v0.set(i, j, x[idx(i, j)]);
        }
    }
    Ok(PoissonSolution { v0, iterations, relative_residual: rel })
}

/// Residual, Poisson solve and Liouville spread in one report.
pub fn bochner_report(g: &GridImmersion) -> Result<BochnerReport> {
    let (residual_l1, defect, warning) = bochner_residual(g)?;
    let m = g.nodes;
    let v = g.conformal_factor();
    let rhs = g.hessian_rhs();
    let sol = solve_decay_poisson(&rhs, g)?;
    let (lo, hi) = (2, m - 3);
    let interior = || (lo..=hi).flat_map(|j| (lo..=hi).map(move |i| (i, j)));
    let (mut dmin, mut dmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, j) in interior() {
        let d = v.at(i, j) - sol.v0.at(i, j);
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    let ring: Vec<f64> = (1..m - 1)
        .flat_map(|j| (1..m - 1).map(move |i| (i, j)))
        .filter(|&(i, j)| i == 1 || j == 1 || i == m - 2 || j == m - 2)
        .map(|(i, j)| v.at(i, j))
        .collect();
    let h = g.spacing;
    let rhs_sup = interior().map(|(i, j)| rhs.at(i, j).abs()).fold(0.0, f64::max);
    let v0_sup = interior().map(|(i, j)| sol.v0.at(i, j).abs()).fold(0.0, f64::max);
    let hessian_l2_sq = g.hessian_l2_sq();
    Ok(BochnerReport {
        residual_l1,
        conformal_defect: defect,
        conformal_warning: warning,
        v_infinity_estimate: csum(ring.iter().copied()) / ring.len() as f64,
        liouville_spread: dmax - dmin,
        rhs_sup,
        rhs_integral: csum(interior().map(|(i, j)| rhs.at(i, j) * h * h)),
        v0_sup,
        hessian_l2_sq,
        sup_ratio: if hessian_l2_sq > 0.0 { v0_sup / hessian_l2_sq } else { 0.0 },
        spacing: h,
        solver_iterations: sol.iterations,
    })
}

/// Analytic conformal immersions used by the tests and the suite.
pub mod charts {
    use super::*;

    /// f(x, y) = s·(x, y, 0).
    pub fn plane(half_width: f64, h: f64, s: f64) -> Result<GridImmersion> {
        GridImmersion::sample(half_width, h, true, |x, y| vec![s * x, s * y, 0.0])
    }

    /// Inverse stereographic projection onto the unit sphere,
    /// e^{2w} = 4/(1 + |z|²)².
    pub fn stereographic(half_width: f64, h: f64) -> Result<GridImmersion> {
        GridImmersion::sample(half_width, h, true, |x, y| {
            let d = 1.0 + x * x + y * y;
            vec![2.0 * x / d, 2.0 * y / d, (x * x + y * y - 1.0) / d]
        })
    }

    /// Stereographic chart of the sphere of radius `rho`, reparametrised
    /// by z ↦ z/λ: f(z) = ρ·σ(z/λ).
    pub fn scaled_stereographic(half_width: f64, h: f64, rho: f64, lambda: f64) -> Result<GridImmersion> {
        GridImmersion::sample(half_width, h, true, |x, y| {
            let (u, v) = (x / lambda, y / lambda);
            let d = 1.0 + u * u + v * v;
            vec![rho * 2.0 * u / d, rho * 2.0 * v / d, rho * (u * u + v * v - 1.0) / d]
        })
    }

    /// The holomorphic curve z ↦ (z, a z²) in ℝ⁴ = ℂ².
    pub fn complex_parabola(half_width: f64, h: f64, a: f64) -> Result<GridImmersion> {
        GridImmersion::sample(half_width, h, true, |x, y| vec![x, y, a * (x * x - y * y), a * 2.0 * x * y])
    }

    /// Catenoid (cosh x cos y, cosh x sin y, x), e^{2w} = cosh² x.
    pub fn catenoid(half_width: f64, h: f64) -> Result<GridImmersion> {
        GridImmersion::sample(half_width, h, true, |x, y| vec![x.cosh() * y.cos(), x.cosh() * y.sin(), x])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_small_grid() {
        assert!(charts::plane(1.0, 0.5, 1.0).is_ok());
        assert!(matches!(charts::plane(1.0, 1.0, 1.0), Err(Error::GridTooSmall { nodes: 3 })));
        assert!(charts::plane(1.0, 0.3, 1.0).is_err());
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = charts::plane(1.0, 0.125, 1.0).unwrap();
        let rhs = GridField::zeros(&g);
        let s = solve_decay_poisson(&rhs, &g).unwrap();
        assert!(s.v0.values.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn stencil_exact_on_quadratics() {
        // f = z²: v = 4|z|², Δv = 16, Σdet = −8; central differences are exact on quadratics
        let g = GridImmersion::sample(1.0, 0.125, true, |x, y| vec![x * x - y * y, 2.0 * x * y, 0.0]).unwrap();
        let (res, _, warn) = bochner_residual(&g).unwrap();
        assert!(res < 1e-11, "{res}");
        assert!(!warn);
    }
}
