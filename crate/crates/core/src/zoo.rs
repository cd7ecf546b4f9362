//! Deterministic generators for the test surfaces.
//!
//! Y-junction surfaces are built from three disk charts. Sheet `i` of the
//! prism ℝ×Y is the half-plane `{t e_z + s u_i : s ≥ 0}` with
//! `u_i = (cos 2πi/3, sin 2πi/3, 0)`; it is parameterised from the unit disk
//! by the Cayley map `w ↦ z = i(1+w)/(1−w)`, `s = Im z`, `t = Re z`. The
//! circle `|w| = 1` lands on the common edge (the z-axis), so the three disk
//! meshes share their rim vertices, and `w = 1` is the point at infinity.
//!
//! The double bubble is the inversion of the prism about `c = (−d, 0, 0)`.
//! That pole lies on the plane of sheet 0, which therefore maps to a flat
//! disk, while sheets 1 and 2 map to spherical caps meeting it at 120°.
//! The composed chart is Möbius, so the uniform disk rings give a well-shaped
//! mesh on the bubble. With `truncation = None` the rim vertex `w = 1` is
//! placed exactly at `c` and the surface is closed.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::DiscreteVarifold;
use crate::moebius::{invert, invert_point, InversionResult};

fn default_radius() -> f64 {
    1.0
}

fn default_dim() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZooKind {
    Icosphere {
        subdiv: u32,
        #[serde(default = "default_radius")]
        radius: f64,
    },
    /// Unit sphere displaced radially by `epsilon · Y_{l,m}` (real,
    /// L²-normalised spherical harmonic).
    PerturbedSphere { subdiv: u32, l: u32, m: i32, epsilon: f64 },
    Ellipsoid { subdiv: u32, axes: [f64; 3] },
    /// Round torus with radii `major > minor > 0` on an `n_major × n_minor`
    /// parameter grid.
    Torus { major: f64, minor: f64, n_major: usize, n_minor: usize },
    /// ℝ×Y cut to `s ≤ truncation`, `|t| ≤ half_length`.
    YPrism { rings: usize, half_length: f64, truncation: f64 },
    /// Inversion of the prism about `(−pole_distance, 0, 0)`; closed when
    /// `truncation` is `None`.
    DoubleBubble {
        rings: usize,
        pole_distance: f64,
        #[serde(default)]
        truncation: Option<f64>,
        #[serde(default)]
        half_length: Option<f64>,
    },
    MultiplicitySphere { subdiv: u32, theta: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZooSpec {
    #[serde(flatten)]
    pub kind: ZooKind,
    /// Seed for vertex jitter; no jitter without a seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Jitter amplitude as a fraction of the median edge length.
    #[serde(default)]
    pub jitter: f64,
    /// Ambient dimension; coordinates beyond the third are zero.
    #[serde(default = "default_dim")]
    pub ambient_dim: usize,
}

impl ZooSpec {
    pub fn new(kind: ZooKind) -> Self {
        Self { kind, seed: None, jitter: 0.0, ambient_dim: 3 }
    }

    pub fn icosphere(subdiv: u32) -> Self {
        Self::new(ZooKind::Icosphere { subdiv, radius: 1.0 })
    }

    pub fn perturbed_sphere(subdiv: u32, epsilon: f64) -> Self {
        Self::new(ZooKind::PerturbedSphere { subdiv, l: 2, m: 0, epsilon })
    }

    pub fn ellipsoid(subdiv: u32, axes: [f64; 3]) -> Self {
        Self::new(ZooKind::Ellipsoid { subdiv, axes })
    }

    /// Torus with R/r = √2, r = 1.
    pub fn clifford_torus(n_minor: usize) -> Self {
        Self::new(ZooKind::Torus { major: SQRT_2, minor: 1.0, n_major: 2 * n_minor, n_minor })
    }

    pub fn y_prism(rings: usize, half_length: f64, truncation: f64) -> Self {
        Self::new(ZooKind::YPrism { rings, half_length, truncation })
    }

    pub fn double_bubble(rings: usize) -> Self {
        Self::new(ZooKind::DoubleBubble { rings, pole_distance: 1.0, truncation: None, half_length: None })
    }

    pub fn truncated_double_bubble(rings: usize, truncation: f64) -> Self {
        Self::new(ZooKind::DoubleBubble {
            rings,
            pole_distance: 1.0,
            truncation: Some(truncation),
            half_length: Some(truncation),
        })
    }

    pub fn multiplicity_sphere(subdiv: u32, theta: u32) -> Self {
        Self::new(ZooKind::MultiplicitySphere { subdiv, theta })
    }

    pub fn with_jitter(mut self, seed: u64, jitter: f64) -> Self {
        self.seed = Some(seed);
        self.jitter = jitter;
        self
    }

    pub fn with_ambient_dim(mut self, n: usize) -> Self {
        self.ambient_dim = n;
        self
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ZooKind::Icosphere { .. } => "icosphere",
            ZooKind::PerturbedSphere { .. } => "perturbed_sphere",
            ZooKind::Ellipsoid { .. } => "ellipsoid",
            ZooKind::Torus { .. } => "torus",
            ZooKind::YPrism { .. } => "y_prism",
            ZooKind::DoubleBubble { .. } => "double_bubble",
            ZooKind::MultiplicitySphere { .. } => "multiplicity_sphere",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.ambient_dim < 3 {
            return bad(format!("ambient_dim {} < 3", self.ambient_dim));
        }
        if !(0.0..0.25).contains(&self.jitter) {
            return bad(format!("jitter {} outside [0, 0.25)", self.jitter));
        }
        let subdiv_ok = |s: u32| s <= 8;
        match self.kind {
            ZooKind::Icosphere { subdiv, radius } => {
                if !subdiv_ok(subdiv) || !(radius > 0.0 && radius.is_finite()) {
                    return bad(format!("icosphere subdiv {subdiv} radius {radius}"));
                }
            }
            ZooKind::PerturbedSphere { subdiv, l, m, epsilon } => {
                if !subdiv_ok(subdiv) || m.unsigned_abs() > l || !epsilon.is_finite() {
                    return bad(format!("perturbed sphere subdiv {subdiv} (l, m) = ({l}, {m}) epsilon {epsilon}"));
                }
            }
            ZooKind::Ellipsoid { subdiv, axes } => {
                if !subdiv_ok(subdiv) || !axes.iter().all(|a| *a > 0.0 && a.is_finite()) {
                    return bad(format!("ellipsoid subdiv {subdiv} axes {axes:?}"));
                }
            }
            ZooKind::Torus { major, minor, n_major, n_minor } => {
                if !(minor > 0.0 && major > minor && major.is_finite()) || n_major < 3 || n_minor < 3 {
                    return bad(format!("torus R = {major}, r = {minor}, grid {n_major}×{n_minor}"));
                }
            }
            ZooKind::YPrism { rings, half_length, truncation } => {
                if rings < 2 || !(half_length > 0.0) || !(truncation > 0.0) {
                    return bad(format!("y_prism rings {rings} half_length {half_length} truncation {truncation}"));
                }
            }
            ZooKind::DoubleBubble { rings, pole_distance, truncation, half_length } => {
                if rings < 2 || !(pole_distance > 0.0 && pole_distance.is_finite()) {
                    return bad(format!("double_bubble rings {rings} pole_distance {pole_distance}"));
                }
                if truncation.is_some_and(|r| !(r > 0.0)) || half_length.is_some_and(|r| !(r > 0.0)) {
                    return bad("double_bubble truncation must be positive".into());
                }
            }
            ZooKind::MultiplicitySphere { subdiv, theta } => {
                if !subdiv_ok(subdiv) || theta < 1 {
                    return bad(format!("multiplicity sphere subdiv {subdiv} theta {theta}"));
                }
            }
        }
        Ok(())
    }
}

/// Builds the mesh described by `spec`.
pub fn generate(spec: &ZooSpec) -> Result<DiscreteVarifold> {
    spec.validate()?;
    let (pts, faces, theta) = match spec.kind {
        ZooKind::Icosphere { subdiv, radius } => {
            let (p, f) = icosphere(subdiv);
            (p.into_iter().map(|x| x.map(|c| c * radius)).collect(), f, None)
        }
        ZooKind::PerturbedSphere { subdiv, l, m, epsilon } => {
            let (p, f) = icosphere(subdiv);
            let mut out = Vec::with_capacity(p.len());
            for x in p {
                let rho = 1.0 + epsilon * real_spherical_harmonic(l, m, x);
                if !(rho > 0.0) {
                    return Err(Error::InvalidSpec(format!("epsilon {epsilon} folds the sphere (radius {rho})")));
                }
                out.push(x.map(|c| c * rho));
            }
            (out, f, None)
        }
        ZooKind::Ellipsoid { subdiv, axes } => {
            let (p, f) = icosphere(subdiv);
            (p.into_iter().map(|x| [x[0] * axes[0], x[1] * axes[1], x[2] * axes[2]]).collect(), f, None)
        }
        ZooKind::Torus { major, minor, n_major, n_minor } => {
            let (p, f) = torus(major, minor, n_major, n_minor);
            (p, f, None)
        }
        ZooKind::YPrism { rings, half_length, truncation } => {
            let (p, f) = y_chart(rings, None, Some((truncation, half_length)))?;
            (p, f, None)
        }
        ZooKind::DoubleBubble { rings, pole_distance, truncation, half_length } => {
            let cut = truncation.map(|r| (r, half_length.unwrap_or(r)));
            let (p, f) = y_chart(rings, Some(pole_distance), cut)?;
            (p, f, None)
        }
        ZooKind::MultiplicitySphere { subdiv, theta } => {
            let (p, f) = icosphere(subdiv);
            let n = f.len();
            (p, f, Some(vec![theta as i64; n]))
        }
    };
    let n = spec.ambient_dim;
    let mut flat = Vec::with_capacity(pts.len() * n);
    for p in &pts {
        flat.extend_from_slice(p);
        flat.extend(std::iter::repeat(0.0).take(n - 3));
    }
    let mesh = DiscreteVarifold::build(n, flat, faces, theta)?;
    match spec.seed {
        Some(seed) if spec.jitter > 0.0 => jitter(&mesh, seed, spec.jitter),
        _ => Ok(mesh),
    }
}

fn jitter(mesh: &DiscreteVarifold, seed: u64, amplitude: f64) -> Result<DiscreteVarifold> {
    let h = amplitude * mesh.median_edge_length();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets: Vec<f64> = (0..mesh.num_vertices() * 3).map(|_| rng.gen_range(-h..h)).collect();
    let mut k = 0;
    let mut flat = mesh.vertex_coords().to_vec();
    let n = mesh.dim();
    for v in 0..mesh.num_vertices() {
        for c in 0..3 {
            flat[v * n + c] += offsets[k];
            k += 1;
        }
    }
    DiscreteVarifold::build(n, flat, mesh.faces().to_vec(), Some(mesh.multiplicity_i64()))
}

/// Icosahedron with `subdiv` rounds of midpoint subdivision, projected to
/// the unit sphere: 10·4^k + 2 vertices and 20·4^k faces.
pub fn icosphere(subdiv: u32) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut pts: Vec<[f64; 3]> = raw.iter().map(|p| normalize3(*p)).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdiv {
        let mut mid = std::collections::HashMap::new();
        let mut midpoint = |a: usize, b: usize, pts: &mut Vec<[f64; 3]>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (pts[a], pts[b]);
                pts.push(normalize3([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                pts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut pts);
            let bc = midpoint(b, c, &mut pts);
            let ca = midpoint(c, a, &mut pts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (pts, faces)
}

fn normalize3(p: [f64; 3]) -> [f64; 3] {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}

fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let mut pts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let rho = major + minor * v.cos();
            pts.push([rho * u.cos(), rho * u.sin(), minor * v.sin()]);
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    (pts, faces)
}

/// Hexagonal ring triangulation of the unit disk: ring `k` has `6k`
/// vertices at radius `k/rings`. Returns points and faces with vertex
/// `1 + 3k(k−1) + j` being vertex `j` of ring `k`.
pub fn disk_rings(rings: usize) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let start = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };
    let count = |k: usize| if k == 0 { 1 } else { 6 * k };
    let mut pts = vec![[0.0, 0.0]];
    for k in 1..=rings {
        let r = k as f64 / rings as f64;
        for j in 0..count(k) {
            let a = 2.0 * PI * j as f64 / count(k) as f64;
            pts.push([r * a.cos(), r * a.sin()]);
        }
    }
    let mut faces = Vec::with_capacity(6 * rings * rings);
    for k in 1..=rings {
        let (a, b) = (count(k - 1), count(k));
        let inner = |i: usize| start(k - 1) + i % a;
        let outer = |j: usize| start(k) + j % b;
        if k == 1 {
            for j in 0..b {
                faces.push([0, outer(j), outer(j + 1)]);
            }
            continue;
        }
        let (mut i, mut j) = (0, 0);
        while i < a || j < b {
            // advance along whichever ring has the smaller next angle
            if j < b && (i == a || (j + 1) * a <= (i + 1) * b) {
                faces.push([inner(i), outer(j), outer(j + 1)]);
                j += 1;
            } else {
                faces.push([inner(i), outer(j), inner(i + 1)]);
                i += 1;
            }
        }
    }
    (pts, faces)
}

/// Prism coordinates `(s, t)` of the disk point `w`; `None` at `w = 1`.
fn cayley(w: [f64; 2]) -> Option<(f64, f64)> {
    let (dr, di) = (1.0 - w[0], -w[1]);
    let den = dr * dr + di * di;
    if den == 0.0 {
        return None;
    }
    let (nr, ni) = (1.0 + w[0], w[1]);
    let qr = (nr * dr + ni * di) / den;
    let qi = (ni * dr - nr * di) / den;
    // z = i q, s = Im z = Re q, t = Re z = −Im q
    Some((qr.max(0.0), -qi))
}

type ChartMesh = (Vec<[f64; 3]>, Vec<[usize; 3]>);

/// Three disk charts glued along their rims. `pole = Some(d)` inverts about
/// `(−d, 0, 0)`; `cut = Some((truncation, half_length))` keeps only faces
/// whose prism coordinates satisfy `s ≤ truncation` and `|t| ≤ half_length`.
fn y_chart(rings: usize, pole: Option<f64>, cut: Option<(f64, f64)>) -> Result<ChartMesh> {
    let (disk, disk_faces) = disk_rings(rings);
    let rim_start = 1 + 3 * rings * (rings - 1);
    let rim_count = 6 * rings;
    let interior = rim_start;
    // global layout: rim, then the interior vertices of each sheet
    let global = |sheet: usize, local: usize| {
        if local >= rim_start {
            local - rim_start
        } else {
            rim_count + sheet * interior + local
        }
    };
    let nv = rim_count + 3 * interior;
    let mut prism: Vec<Option<(f64, f64, usize)>> = vec![None; nv];
    for sheet in 0..3 {
        for (local, w) in disk.iter().enumerate() {
            let g = global(sheet, local);
            if prism[g].is_none() {
                prism[g] = cayley(*w).map(|(s, t)| (s, t, sheet));
            }
        }
    }
    let position = |s: f64, t: f64, sheet: usize| {
        let a = 2.0 * PI * sheet as f64 / 3.0;
        [s * a.cos(), s * a.sin(), t]
    };
    let c = pole.map(|d| [-d, 0.0, 0.0]);
    let mut pts: Vec<Option<[f64; 3]>> = prism
        .iter()
        .map(|p| {
            p.map(|(s, t, sheet)| {
                let x = position(s, t, sheet);
                match c {
                    Some(c) => {
                        let y = invert_point(&c, &x);
                        [y[0], y[1], y[2]]
                    }
                    None => x,
                }
            })
        })
        .collect();
    let mut faces = Vec::with_capacity(3 * disk_faces.len());
    for sheet in 0..3 {
        for t in &disk_faces {
            let g = t.map(|l| global(sheet, l));
            let keep = match cut {
                None => true,
                Some((r, l)) => g.iter().all(|&v| prism[v].is_some_and(|(s, t, _)| s <= r && t.abs() <= l)),
            };
            if keep {
                faces.push(g);
            }
        }
    }
    if cut.is_none() {
        match c {
            // the point at infinity closes up at the pole
            Some(c) => pts[0] = Some(c),
            None => return Err(Error::InvalidSpec("an untruncated prism is unbounded".into())),
        }
    }
    if faces.is_empty() {
        return Err(Error::InvalidSpec("truncation removes every face".into()));
    }
    compact(&pts, faces)
}

/// Drops unreferenced vertices and re-indexes.
fn compact(pts: &[Option<[f64; 3]>], faces: Vec<[usize; 3]>) -> Result<ChartMesh> {
    let mut index = vec![usize::MAX; pts.len()];
    let mut out = Vec::new();
    let mut new_faces = Vec::with_capacity(faces.len());
    for t in faces {
        let mut nt = [0; 3];
        for k in 0..3 {
            if index[t[k]] == usize::MAX {
                let p = pts[t[k]].ok_or_else(|| Error::InvalidSpec("face reaches the point at infinity".into()))?;
                index[t[k]] = out.len();
                out.push(p);
            }
            nt[k] = index[t[k]];
        }
        new_faces.push(nt);
    }
    Ok((out, new_faces))
}

/// Real L²-normalised spherical harmonic (no Condon-Shortley phase) at a
/// unit vector.
pub fn real_spherical_harmonic(l: u32, m: i32, x: [f64; 3]) -> f64 {
    let ma = m.unsigned_abs();
    let ct = x[2].clamp(-1.0, 1.0);
    let phi = x[1].atan2(x[0]);
    let plm = associated_legendre(l, ma, ct);
    let mut ratio = 1.0; // (l−m)!/(l+m)!
    for k in (l - ma + 1)..=(l + ma) {
        ratio /= k as f64;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => norm * plm,
        std::cmp::Ordering::Greater => SQRT_2 * norm * plm * (ma as f64 * phi).cos(),
        std::cmp::Ordering::Less => SQRT_2 * norm * plm * (ma as f64 * phi).sin(),
    }
}

/// P_l^m(x) without the Condon-Shortley phase.
fn associated_legendre(l: u32, m: u32, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= (2 * k - 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    let mut pm2 = pmm;
    for ll in (m + 2)..=l {
        let next = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pm2) / (ll - m) as f64;
        pm2 = pm1;
        pm1 = next;
    }
    pm1
}

/// Inversion pole for the Y-cone, at unit distance from its junction axis.
pub const Y_PRISM_POLE: [f64; 3] = [-1.0, 0.0, 0.0];

/// The truncated Y-cone inverted about `Y_PRISM_POLE`, which lies between
/// two sheets at distance √3/2 from both: a double bubble missing a
/// neighbourhood of the pole of size O(1/truncation).
pub fn inverted_y_prism(rings: usize, truncation: f64) -> Result<InversionResult> {
    let cone = generate(&ZooSpec::y_prism(rings, truncation, truncation))?;
    invert(&cone, &Y_PRISM_POLE, 0.1)
}

/// Intercept a of the least-squares fit y ≈ a + b/R².
pub fn extrapolate_inverse_square(radii: &[f64], values: &[f64]) -> Result<f64> {
    if radii.len() < 2 || radii.len() != values.len() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidSpec("need at least two positive radii with matching values".into()));
    }
    let xs: Vec<f64> = radii.iter().map(|r| 1.0 / (r * r)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(values).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidSpec("radii must be distinct".into()));
    }
    Ok(my - sxy / sxx * mx)
}

/// Willmore energy of the round torus from the one-variable integral
/// W = (π/2)∫₀^{2π} (R + 2r cos v)² / (r (R + r cos v)) dv, evaluated with
/// the periodic trapezoid rule (spectrally accurate for this integrand).
pub fn torus_willmore_integral(major: f64, minor: f64) -> f64 {
    let n = 4096;
    let h = 2.0 * PI / n as f64;
    let s = crate::sum::csum((0..n).map(|k| {
        let c = (k as f64 * h).cos();
        let num = major + 2.0 * minor * c;
        num * num / (minor * (major + minor * c))
    }));
    0.5 * PI * s * h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReference {
    pub mass: Option<f64>,
    pub willmore: Option<f64>,
    pub max_density: Option<f64>,
    pub diameter: Option<f64>,
    /// How the values are known.
    pub basis: String,
}

/// Closed-form invariants of the continuum surface a spec approximates.
pub fn analytic_reference(spec: &ZooSpec) -> Result<AnalyticReference> {
    spec.validate()?;
    let r = |mass, w, d, diam, basis: &str| AnalyticReference {
        mass,
        willmore: w,
        max_density: d,
        diameter: diam,
        basis: basis.to_string(),
    };
    match spec.kind {
        ZooKind::Icosphere { radius, .. } => Ok(r(
            Some(4.0 * PI * radius * radius),
            Some(4.0 * PI),
            Some(1.0),
            Some(2.0 * radius),
            "round sphere",
        )),
        ZooKind::MultiplicitySphere { theta, .. } => {
            let k = theta as f64;
            Ok(r(Some(4.0 * PI * k), Some(4.0 * PI * k), Some(k), Some(2.0), "round sphere, linear in multiplicity"))
        }
        ZooKind::Torus { major, minor, .. } => Ok(r(
            Some(4.0 * PI * PI * major * minor),
            Some(torus_willmore_integral(major, minor)),
            Some(1.0),
            Some(2.0 * (major + minor)),
            "round torus, one-variable curvature integral",
        )),
        ZooKind::DoubleBubble { truncation: None, .. } => {
            Ok(r(None, Some(6.0 * PI), Some(1.5), None, "inverted Y-prism, density 3/2 at infinity"))
        }
        _ => Err(Error::NoReference(spec.name().to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        for k in 0..4 {
            let (p, f) = icosphere(k);
            assert_eq!(p.len(), 10 * 4usize.pow(k) + 2);
            assert_eq!(f.len(), 20 * 4usize.pow(k));
        }
    }

    #[test]
    fn disk_rings_counts() {
        let (p, f) = disk_rings(5);
        assert_eq!(p.len(), 1 + 3 * 5 * 6);
        assert_eq!(f.len(), 6 * 25);
        // Euler characteristic of a disk
        let mut edges = std::collections::HashSet::new();
        for t in &f {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        assert_eq!(p.len() as i64 - edges.len() as i64 + f.len() as i64, 1);
    }

    #[test]
    fn cayley_maps_rim_to_axis() {
        let (s, t) = cayley([-1.0, 0.0]).unwrap();
        assert!(s.abs() < 1e-15 && t.abs() < 1e-15);
        let (s, t) = cayley([0.0, 0.0]).unwrap();
        assert!((s - 1.0).abs() < 1e-15 && t.abs() < 1e-15);
        assert!(cayley([1.0, 0.0]).is_none());
    }

    #[test]
    fn legendre_low_orders() {
        let x = 0.3;
        assert!((associated_legendre(2, 0, x) - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        assert!((associated_legendre(2, 1, x) - 3.0 * x * (1.0 - x * x).sqrt()).abs() < 1e-15);
        assert!((associated_legendre(2, 2, x) - 3.0 * (1.0 - x * x)).abs() < 1e-15);
    }

    #[test]
    fn torus_integral_matches_closed_form() {
        // W = π² R² / (r √(R² − r²))
        for (big, small) in [(SQRT_2, 1.0), (3.0, 1.0), (2.0, 0.5)] {
            let closed = PI * PI * big * big / (small * (big * big - small * small).sqrt());
            assert!((torus_willmore_integral(big, small) - closed).abs() < 1e-10 * closed);
        }
        assert!((torus_willmore_integral(SQRT_2, 1.0) - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn spec_json_round_trip() {
        let s = ZooSpec::truncated_double_bubble(8, 20.0).with_jitter(3, 0.1);
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"kind\":\"double_bubble\""));
        assert_eq!(serde_json::from_str::<ZooSpec>(&j).unwrap(), s);
        let parsed: ZooSpec = serde_json::from_str(r#"{"kind":"icosphere","subdiv":2}"#).unwrap();
        assert_eq!(parsed, ZooSpec::icosphere(2));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate(&ZooSpec::icosphere(9)).is_err());
        assert!(generate(&ZooSpec::new(ZooKind::Torus { major: 1.0, minor: 1.0, n_major: 8, n_minor: 8 })).is_err());
        assert!(generate(&ZooSpec::multiplicity_sphere(1, 0)).is_err());
        assert!(matches!(analytic_reference(&ZooSpec::ellipsoid(1, [1.0, 1.0, 2.0])), Err(Error::NoReference(_))));
    }
}
