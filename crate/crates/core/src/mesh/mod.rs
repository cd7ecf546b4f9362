//! Integral 2-varifolds as multiplicity-weighted triangle meshes.

mod clip;
pub mod io;
mod measure;

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm2, orthonormal_pair, sub, twice_area};
use crate::sum::csum;

pub use clip::{disk_triangle_area, point_triangle_distance, triangle_ball_area, triangle_halfspace_area};
pub use measure::{BallQuery, Diameter, FaceIndex};

/// Faces whose area falls below this multiple of the squared bounding-box
/// diagonal are rejected.
pub const DEGENERATE_AREA_FACTOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexTag {
    Interior,
    Boundary,
    /// Incident to an edge shared by three or more faces.
    Junction,
}

/// Per-vertex area weights. `weighted` carries the face multiplicities and
/// partitions the total mass; `geometric` is the same construction with θ ≡ 1.
#[derive(Debug, Clone)]
pub struct VertexArea {
    pub weighted: Vec<f64>,
    pub geometric: Vec<f64>,
}

/// Orthonormal approximate tangent plane at each vertex, stored as two
/// `dim`-vectors per vertex.
#[derive(Debug, Clone)]
pub struct TangentFrames {
    dim: usize,
    basis: Vec<f64>,
}

impl TangentFrames {
    pub fn frame(&self, v: usize) -> (&[f64], &[f64]) {
        let n = self.dim;
        let b = &self.basis[2 * n * v..2 * n * (v + 1)];
        (&b[..n], &b[n..])
    }

    /// Component of `w` normal to the tangent plane at vertex `v`.
    pub fn perp(&self, v: usize, w: &[f64]) -> Vec<f64> {
        let (t1, t2) = self.frame(v);
        linalg::perp_to_plane(w, t1, t2)
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteVarifold {
    dim: usize,
    vertices: Vec<f64>,
    faces: Vec<[usize; 3]>,
    multiplicity: Vec<u32>,
    tags: Vec<VertexTag>,
    face_area: Vec<f64>,
    vertex_faces: Vec<Vec<usize>>,
    edge_faces: HashMap<(usize, usize), Vec<usize>>,
}

#[inline]
fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl DiscreteVarifold {
    /// Validates and assembles a mesh. `vertices` is a flat `dim`-strided
    /// coordinate array; `multiplicity = None` means θ ≡ 1.
    pub fn build(
        dim: usize,
        vertices: Vec<f64>,
        faces: Vec<[usize; 3]>,
        multiplicity: Option<Vec<i64>>,
    ) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidMesh(format!("ambient dimension {dim} < 3")));
        }
        if vertices.len() % dim != 0 {
            return Err(Error::InvalidMesh(format!(
                "coordinate array of length {} is not a multiple of {dim}",
                vertices.len()
            )));
        }
        if faces.is_empty() {
            return Err(Error::InvalidMesh("mesh has no faces".into()));
        }
        if let Some((i, _)) = vertices.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NumericFailure { vertex: i / dim });
        }
        let nv = vertices.len() / dim;
        for (f, tri) in faces.iter().enumerate() {
            for &i in tri {
                if i >= nv {
                    return Err(Error::InvalidIndex { face: f, index: i });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("face {f} repeats a vertex")));
            }
        }
        let multiplicity: Vec<u32> = match multiplicity {
            None => vec![1; faces.len()],
            Some(m) => {
                if m.len() != faces.len() {
                    return Err(Error::InvalidMesh(format!(
                        "{} multiplicities for {} faces",
                        m.len(),
                        faces.len()
                    )));
                }
                m.iter()
                    .enumerate()
                    .map(|(f, &t)| {
                        if t < 1 || t > u32::MAX as i64 {
                            Err(Error::NonPositiveMultiplicity { face: f, value: t })
                        } else {
                            Ok(t as u32)
                        }
                    })
                    .collect::<Result<_>>()?
            }
        };

        let diag2 = bbox_diagonal2(dim, &vertices);
        let tolerance = DEGENERATE_AREA_FACTOR * diag2;
        let face_area: Vec<f64> = faces
            .iter()
            .map(|t| {
                let p = &vertices[t[0] * dim..(t[0] + 1) * dim];
                let e1 = sub(&vertices[t[1] * dim..(t[1] + 1) * dim], p);
                let e2 = sub(&vertices[t[2] * dim..(t[2] + 1) * dim], p);
                0.5 * twice_area(&e1, &e2)
            })
            .collect();
        if let Some((f, &a)) = face_area.iter().enumerate().find(|(_, &a)| !(a >= tolerance)) {
            return Err(Error::DegenerateFace { face: f, area: a, tolerance });
        }

        let mut vertex_faces = vec![Vec::new(); nv];
        let mut edge_faces: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (f, t) in faces.iter().enumerate() {
            for k in 0..3 {
                vertex_faces[t[k]].push(f);
                edge_faces.entry(edge_key(t[k], t[(k + 1) % 3])).or_default().push(f);
            }
        }
        let mut tags = vec![VertexTag::Interior; nv];
        for (&(a, b), fs) in &edge_faces {
            let tag = match fs.len() {
                1 => VertexTag::Boundary,
                2 => continue,
                _ => VertexTag::Junction,
            };
            for v in [a, b] {
                if tags[v] != VertexTag::Junction {
                    tags[v] = tag;
                }
            }
        }

        Ok(Self { dim, vertices, faces, multiplicity, tags, face_area, vertex_faces, edge_faces })
    }

    /// Builds from a list of points.
    pub fn from_points(
        dim: usize,
        points: &[Vec<f64>],
        faces: Vec<[usize; 3]>,
        multiplicity: Option<Vec<i64>>,
    ) -> Result<Self> {
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::InvalidMesh(format!("point of dimension {} in ℝ^{dim}", p.len())));
            }
            flat.extend_from_slice(p);
        }
        Self::build(dim, flat, faces, multiplicity)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    #[inline]
    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertex_coords(&self) -> &[f64] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }

    pub fn multiplicity(&self) -> &[u32] {
        &self.multiplicity
    }

    pub fn tags(&self) -> &[VertexTag] {
        &self.tags
    }

    pub fn tag(&self, v: usize) -> VertexTag {
        self.tags[v]
    }

    /// Geometric (θ-free) face areas.
    pub fn face_areas(&self) -> &[f64] {
        &self.face_area
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    /// Faces incident to the edge `{a, b}`.
    pub fn edge_faces(&self, a: usize, b: usize) -> &[usize] {
        self.edge_faces.get(&edge_key(a, b)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Sorted list of unique edges.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self.edge_faces.keys().copied().collect();
        e.sort_unstable();
        e
    }

    pub fn is_closed(&self) -> bool {
        !self.tags.iter().any(|t| *t == VertexTag::Boundary)
    }

    pub fn has_junctions(&self) -> bool {
        self.tags.iter().any(|t| *t == VertexTag::Junction)
    }

    /// Euler characteristic V − E + F of the underlying complex.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.edge_faces.len() as i64 + self.faces.len() as i64
    }

    pub fn face_centroid(&self, f: usize) -> Vec<f64> {
        let [a, b, c] = self.faces[f];
        let (pa, pb, pc) = (self.vertex(a), self.vertex(b), self.vertex(c));
        (0..self.dim).map(|k| (pa[k] + pb[k] + pc[k]) / 3.0).collect()
    }

    /// Orthonormal basis of the plane of face `f`.
    pub fn face_frame(&self, f: usize) -> (Vec<f64>, Vec<f64>) {
        let [a, b, c] = self.faces[f];
        let e1 = sub(self.vertex(b), self.vertex(a));
        let e2 = sub(self.vertex(c), self.vertex(a));
        orthonormal_pair(&e1, &e2).expect("validated faces are non-degenerate")
    }

    /// Cotangents of the three corner angles of face `f`, in corner order.
    pub fn face_cotangents(&self, f: usize) -> [f64; 3] {
        let t = self.faces[f];
        let twice = 2.0 * self.face_area[f];
        let mut out = [0.0; 3];
        for k in 0..3 {
            let p = self.vertex(t[k]);
            let a = sub(self.vertex(t[(k + 1) % 3]), p);
            let b = sub(self.vertex(t[(k + 2) % 3]), p);
            out[k] = dot(&a, &b) / twice;
        }
        out
    }

    /// Interior corner angles of face `f`, in corner order.
    pub fn face_angles(&self, f: usize) -> [f64; 3] {
        let t = self.faces[f];
        let twice = 2.0 * self.face_area[f];
        let mut out = [0.0; 3];
        for k in 0..3 {
            let p = self.vertex(t[k]);
            let a = sub(self.vertex(t[(k + 1) % 3]), p);
            let b = sub(self.vertex(t[(k + 2) % 3]), p);
            out[k] = twice.atan2(dot(&a, &b));
        }
        out
    }

    /// Split of a face's geometric area among its three corners: mixed
    /// Voronoi shares for manifold corners, one third for junction and
    /// boundary corners, rescaled so the shares always sum to the face area.
    pub fn face_area_shares(&self, f: usize) -> [f64; 3] {
        let t = self.faces[f];
        let area = self.face_area[f];
        let cot = self.face_cotangents(f);
        let mut len2 = [0.0; 3]; // squared length of the edge opposite each corner
        for k in 0..3 {
            len2[k] = self.dist2(t[(k + 1) % 3], t[(k + 2) % 3]);
        }
        let obtuse = (0..3).find(|&k| cot[k] < 0.0);
        let mut mixed = [0.0; 3];
        for k in 0..3 {
            mixed[k] = match obtuse {
                None => {
                    let (j, l) = ((k + 1) % 3, (k + 2) % 3);
                    (len2[j] * cot[j] + len2[l] * cot[l]) / 8.0
                }
                Some(o) if o == k => area / 2.0,
                Some(_) => area / 4.0,
            };
        }
        let manifold: [bool; 3] = std::array::from_fn(|k| self.tags[t[k]] == VertexTag::Interior);
        let n_fixed = manifold.iter().filter(|m| !**m).count();
        if n_fixed == 0 {
            return mixed;
        }
        let mut shares = [area / 3.0; 3];
        if n_fixed < 3 {
            let rest = area - n_fixed as f64 * area / 3.0;
            let msum: f64 = (0..3).filter(|&k| manifold[k]).map(|k| mixed[k]).sum();
            for k in (0..3).filter(|&k| manifold[k]) {
                shares[k] = if msum > 0.0 { rest * mixed[k] / msum } else { rest / (3 - n_fixed) as f64 };
            }
        }
        shares
    }

    /// Mixed-Voronoi / barycentric vertex areas. The weighted areas partition
    /// the total mass.
    pub fn vertex_areas(&self) -> VertexArea {
        let nv = self.num_vertices();
        let mut weighted = vec![Vec::new(); nv];
        let mut geometric = vec![Vec::new(); nv];
        for f in 0..self.faces.len() {
            let s = self.face_area_shares(f);
            let theta = self.multiplicity[f] as f64;
            for k in 0..3 {
                let v = self.faces[f][k];
                geometric[v].push(s[k]);
                weighted[v].push(theta * s[k]);
            }
        }
        VertexArea {
            weighted: weighted.into_iter().map(csum).collect(),
            geometric: geometric.into_iter().map(csum).collect(),
        }
    }

    /// Area-weighted tangent plane at every vertex: the top two eigenvectors
    /// of the averaged face tangent projectors.
    pub fn tangent_frames(&self) -> TangentFrames {
        let n = self.dim;
        let frames: Vec<(Vec<f64>, Vec<f64>)> = (0..self.faces.len()).map(|f| self.face_frame(f)).collect();
        let mut basis = Vec::with_capacity(2 * n * self.num_vertices());
        for v in 0..self.num_vertices() {
            let mut proj = DMatrix::<f64>::zeros(n, n);
            for &f in &self.vertex_faces[v] {
                let w = self.face_area[f] * self.multiplicity[f] as f64;
                let (u1, u2) = &frames[f];
                for i in 0..n {
                    for j in 0..n {
                        proj[(i, j)] += w * (u1[i] * u1[j] + u2[i] * u2[j]);
                    }
                }
            }
            if self.vertex_faces[v].is_empty() {
                let mut e = vec![0.0; 2 * n];
                e[0] = 1.0;
                e[n + 1] = 1.0;
                basis.extend(e);
                continue;
            }
            let eig = SymmetricEigen::new(proj);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
            for &k in &order[..2] {
                basis.extend(eig.eigenvectors.column(k).iter().copied());
            }
        }
        TangentFrames { dim: n, basis }
    }

    #[inline]
    pub fn dist2(&self, a: usize, b: usize) -> f64 {
        linalg::dist2(self.vertex(a), self.vertex(b))
    }

    /// Median edge length.
    pub fn median_edge_length(&self) -> f64 {
        let mut l: Vec<f64> = self.edge_faces.keys().map(|&(a, b)| self.dist2(a, b).sqrt()).collect();
        l.sort_by(f64::total_cmp);
        l[l.len() / 2]
    }

    /// Longest edge incident to vertex `v`.
    pub fn local_edge_length(&self, v: usize) -> f64 {
        self.vertex_faces[v]
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&u| u != v)
            .map(|u| self.dist2(u, v).sqrt())
            .fold(0.0, f64::max)
    }

    /// New mesh with every vertex mapped by `map`; connectivity and
    /// multiplicities are kept and the result is re-validated.
    pub fn map_vertices<F: Fn(&[f64]) -> Vec<f64>>(&self, map: F) -> Result<Self> {
        let mut out = Vec::with_capacity(self.vertices.len());
        let mut dim = self.dim;
        for v in 0..self.num_vertices() {
            let p = map(self.vertex(v));
            dim = p.len();
            out.extend(p);
        }
        Self::build(dim, out, self.faces.clone(), Some(self.multiplicity_i64()))
    }

    pub fn translated(&self, t: &[f64]) -> Result<Self> {
        self.map_vertices(|p| linalg::add(p, t))
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        self.map_vertices(|p| linalg::scale(p, s))
    }

    /// Same geometry with every face multiplicity replaced by `theta`.
    pub fn with_uniform_multiplicity(&self, theta: u32) -> Result<Self> {
        Self::build(self.dim, self.vertices.clone(), self.faces.clone(), Some(vec![theta as i64; self.faces.len()]))
    }

    pub fn multiplicity_i64(&self) -> Vec<i64> {
        self.multiplicity.iter().map(|&t| t as i64).collect()
    }

    /// Disjoint union (vertices of `other` are appended and re-indexed).
    pub fn disjoint_union(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::InvalidMesh("union of meshes in different dimensions".into()));
        }
        let offset = self.num_vertices();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]));
        let mut mult = self.multiplicity_i64();
        mult.extend(other.multiplicity_i64());
        Self::build(self.dim, vertices, faces, Some(mult))
    }

    /// Keeps only the given faces, dropping unreferenced vertices. Returns
    /// the new mesh and, for each new vertex, its index in `self`.
    pub fn subset(&self, keep: &[usize]) -> Result<(Self, Vec<usize>)> {
        let mut new_index = vec![usize::MAX; self.num_vertices()];
        let mut source = Vec::new();
        let mut faces = Vec::with_capacity(keep.len());
        let mut mult = Vec::with_capacity(keep.len());
        for &f in keep {
            let t = self.faces[f];
            let mut nt = [0; 3];
            for k in 0..3 {
                if new_index[t[k]] == usize::MAX {
                    new_index[t[k]] = source.len();
                    source.push(t[k]);
                }
                nt[k] = new_index[t[k]];
            }
            faces.push(nt);
            mult.push(self.multiplicity[f] as i64);
        }
        let mut vertices = Vec::with_capacity(source.len() * self.dim);
        for &s in &source {
            vertices.extend_from_slice(self.vertex(s));
        }
        Ok((Self::build(self.dim, vertices, faces, Some(mult))?, source))
    }

    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal2(self.dim, &self.vertices).sqrt()
    }
}

fn bbox_diagonal2(dim: usize, vertices: &[f64]) -> f64 {
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in vertices.chunks_exact(dim) {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    norm2(&sub(&hi, &lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn right_triangle() -> DiscreteVarifold {
        DiscreteVarifold::build(3, vec![0., 0., 0., 1., 0., 0., 0., 1., 0.], vec![[0, 1, 2]], None).unwrap()
    }

    #[test]
    fn single_triangle_mass() {
        let m = right_triangle();
        assert!((m.total_mass() - 0.5).abs() < 1e-15);
        assert!(m.tags().iter().all(|t| *t == VertexTag::Boundary));
    }

    #[test]
    fn rejects_bad_input() {
        let v = vec![0., 0., 0., 1., 0., 0., 0., 1., 0.];
        assert!(matches!(
            DiscreteVarifold::build(3, v.clone(), vec![[0, 1, 3]], None),
            Err(Error::InvalidIndex { face: 0, index: 3 })
        ));
        assert!(matches!(
            DiscreteVarifold::build(3, v.clone(), vec![[0, 1, 2]], Some(vec![0])),
            Err(Error::NonPositiveMultiplicity { face: 0, value: 0 })
        ));
        let collinear = vec![0., 0., 0., 1., 0., 0., 2., 0., 0.];
        assert!(matches!(
            DiscreteVarifold::build(3, collinear, vec![[0, 1, 2]], None),
            Err(Error::DegenerateFace { face: 0, .. })
        ));
        assert!(DiscreteVarifold::build(2, vec![0., 0., 1., 0., 0., 1.], vec![[0, 1, 2]], None).is_err());
    }

    #[test]
    fn y_patch_tags_junction() {
        // three half-plane patches sharing the edge (0,1)
        let pts = vec![
            vec![0., 0., 0.],
            vec![0., 0., 1.],
            vec![1., 0., 0.],
            vec![-0.5, 0.866, 0.],
            vec![-0.5, -0.866, 0.],
        ];
        let m = DiscreteVarifold::from_points(3, &pts, vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]], None).unwrap();
        assert_eq!(m.tag(0), VertexTag::Junction);
        assert_eq!(m.tag(1), VertexTag::Junction);
        assert_eq!(m.tag(2), VertexTag::Boundary);
        assert_eq!(m.edge_faces(1, 0).len(), 3);
    }

    #[test]
    fn vertex_areas_partition_mass() {
        let pts = vec![
            vec![0., 0., 0.],
            vec![3., 0., 0.],
            vec![0.2, 0.3, 0.],
            vec![1., 1., 1.],
        ];
        let m = DiscreteVarifold::from_points(3, &pts, vec![[0, 1, 2], [0, 1, 3], [1, 2, 3], [0, 2, 3]], Some(vec![1, 2, 3, 1])).unwrap();
        let a = m.vertex_areas();
        let sum: f64 = csum(a.weighted.iter().copied());
        assert!((sum - m.total_mass()).abs() <= 1e-14 * sum);
        assert!(a.weighted.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn tangent_frame_of_flat_patch() {
        let pts = vec![vec![0., 0., 0.], vec![1., 0., 0.], vec![0., 1., 0.], vec![-1., -1., 0.]];
        let m = DiscreteVarifold::from_points(3, &pts, vec![[0, 1, 2], [0, 2, 3], [0, 3, 1]], None).unwrap();
        let fr = m.tangent_frames();
        let n = fr.perp(0, &[0.3, -0.2, 0.7]);
        assert!(n[0].abs() < 1e-14 && n[1].abs() < 1e-14 && (n[2] - 0.7).abs() < 1e-14);
    }
}
