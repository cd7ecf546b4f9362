//! Measure-theoretic services: total mass, mass in balls and half-spaces,
//! diameter and mass normalisation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::clip::{triangle_ball_area, triangle_halfspace_area};
use super::DiscreteVarifold;
use crate::error::{Error, Result};
use crate::linalg::{dist, dist2};
use crate::sum::{csum, CompensatedSum};

/// A closed ball B(center, radius) with radius > 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallQuery {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallQuery {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidMesh(format!("ball radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diameter {
    pub value: f64,
    pub pair: (usize, usize),
}

impl DiscreteVarifold {
    /// μ(ℝⁿ) = Σ θ_f area(f).
    pub fn total_mass(&self) -> f64 {
        csum(self.face_areas().iter().zip(self.multiplicity()).map(|(a, &t)| t as f64 * a))
    }

    /// μ(B(x, r)) with exact triangle-ball clipping.
    pub fn ball_mass(&self, q: &BallQuery) -> f64 {
        self.ball_masses(&q.center, &[q.radius])[0]
    }

    /// μ(B(x, r)) for several radii in one sweep over the faces.
    pub fn ball_masses(&self, x: &[f64], radii: &[f64]) -> Vec<f64> {
        self.ball_masses_over(0..self.num_faces(), x, radii)
    }

    /// As `ball_masses`, visiting only the index's candidate faces. The
    /// result is bit-identical to the full sweep.
    pub fn ball_masses_indexed(&self, index: &FaceIndex, x: &[f64], radii: &[f64]) -> Vec<f64> {
        let rmax = radii.iter().copied().fold(0.0, f64::max);
        self.ball_masses_over(index.candidates(x, rmax), x, radii)
    }

    fn ball_masses_over<I: IntoIterator<Item = usize>>(&self, faces: I, x: &[f64], radii: &[f64]) -> Vec<f64> {
        let rmax = radii.iter().copied().fold(0.0, f64::max);
        let mut acc = vec![CompensatedSum::new(); radii.len()];
        for f in faces {
            let [a, b, c] = self.face(f);
            let (pa, pb, pc) = (self.vertex(a), self.vertex(b), self.vertex(c));
            let centroid = self.face_centroid(f);
            let reach = dist(&centroid, pa).max(dist(&centroid, pb)).max(dist(&centroid, pc));
            let dc = dist(&centroid, x);
            if dc - reach > rmax {
                continue;
            }
            let theta = self.multiplicity()[f] as f64;
            for (k, &r) in radii.iter().enumerate() {
                if dc - reach > r {
                    continue;
                }
                let area = if dc + reach <= r { self.face_areas()[f] } else { triangle_ball_area(pa, pb, pc, x, r) };
                acc[k].add(theta * area);
            }
        }
        acc.iter().map(CompensatedSum::value).collect()
    }

    /// μ({y : ⟨y, normal⟩ ≤ offset}) with exact clipping.
    pub fn halfspace_mass(&self, normal: &[f64], offset: f64) -> f64 {
        csum((0..self.num_faces()).map(|f| {
            let [a, b, c] = self.face(f);
            self.multiplicity()[f] as f64
                * triangle_halfspace_area(self.vertex(a), self.vertex(b), self.vertex(c), normal, offset)
        }))
    }

    /// Largest vertex-to-vertex distance. Among pairs attaining it (to a
    /// relative 1e-12) the lexicographically smallest index pair is returned.
    ///
    /// Exact branch and bound over a k-d tree of the vertices: one pass finds
    /// the maximum, a second collects the smallest pair near it.
    pub fn diameter(&self) -> Diameter {
        let tree = KdTree::new(self);
        let mut best = tree.seed_lower_bound(self);
        tree.visit(self, 0, 0, &mut |_, _, d2| {
            if d2 > best {
                best = d2;
            }
            best
        });
        let threshold = best * (1.0 - 1e-12);
        let mut pair = (usize::MAX, usize::MAX);
        tree.visit(self, 0, 0, &mut |i, j, d2| {
            if d2 >= threshold {
                let p = (i.min(j), i.max(j));
                if p < pair {
                    pair = p;
                }
            }
            threshold
        });
        Diameter { value: self.dist2(pair.0, pair.1).sqrt(), pair }
    }

    /// Centre of mass of μ.
    pub fn mass_centroid(&self) -> Vec<f64> {
        let n = self.dim();
        let mut acc = vec![CompensatedSum::new(); n];
        for f in 0..self.num_faces() {
            let w = self.multiplicity()[f] as f64 * self.face_areas()[f];
            let c = self.face_centroid(f);
            for k in 0..n {
                acc[k].add(w * c[k]);
            }
        }
        let m = self.total_mass();
        acc.iter().map(|a| a.value() / m).collect()
    }

    /// Scales about the centre of mass so that the total mass equals `target`.
    pub fn normalize_mass(&self, target: f64) -> Result<Self> {
        if !(target > 0.0) {
            return Err(Error::InvalidMesh(format!("target mass {target} must be positive")));
        }
        let c = self.mass_centroid();
        let mut out = self.clone();
        // two passes: the second removes the rounding left by the first
        for _ in 0..2 {
            let s = (target / out.total_mass()).sqrt();
            out = out.map_vertices(|p| p.iter().zip(&c).map(|(x, ck)| ck + s * (x - ck)).collect())?;
        }
        Ok(out)
    }

    /// Closest vertex to `x` and its distance.
    pub fn nearest_vertex(&self, x: &[f64]) -> (usize, f64) {
        let (v, d2) = (0..self.num_vertices())
            .map(|v| (v, dist2(self.vertex(v), x)))
            .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
        (v, d2.sqrt())
    }
}

/// Uniform hash grid of face bounding boxes over the first three
/// coordinates; the projection only shrinks distances, so candidate sets are
/// supersets in any ambient dimension.
pub struct FaceIndex {
    cell: f64,
    cells: HashMap<[i64; 3], Vec<usize>>,
}

impl FaceIndex {
    pub fn new(mesh: &DiscreteVarifold, cell: f64) -> Result<Self> {
        if !(cell > 0.0) {
            return Err(Error::InvalidMesh(format!("index cell {cell} must be positive")));
        }
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for f in 0..mesh.num_faces() {
            let t = mesh.face(f);
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for &v in &t {
                for k in 0..3 {
                    lo[k] = lo[k].min(mesh.vertex(v)[k]);
                    hi[k] = hi[k].max(mesh.vertex(v)[k]);
                }
            }
            let (a, b) = (lo.map(|x| (x / cell).floor() as i64), hi.map(|x| (x / cell).floor() as i64));
            for i in a[0]..=b[0] {
                for j in a[1]..=b[1] {
                    for k in a[2]..=b[2] {
                        cells.entry([i, j, k]).or_default().push(f);
                    }
                }
            }
        }
        Ok(Self { cell, cells })
    }

    /// Sorted, deduplicated faces whose box may meet B(x, r).
    pub fn candidates(&self, x: &[f64], r: f64) -> Vec<usize> {
        let key = |c: f64| (c / self.cell).floor() as i64;
        let mut out = Vec::new();
        for i in key(x[0] - r)..=key(x[0] + r) {
            for j in key(x[1] - r)..=key(x[1] + r) {
                for k in key(x[2] - r)..=key(x[2] + r) {
                    if let Some(fs) = self.cells.get(&[i, j, k]) {
                        out.extend_from_slice(fs);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

struct KdNode {
    lo: Vec<f64>,
    hi: Vec<f64>,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Bounding-box tree over vertex indices, used for the diameter search.
struct KdTree {
    order: Vec<usize>,
    nodes: Vec<KdNode>,
}

const LEAF_SIZE: usize = 16;

impl KdTree {
    fn new(mesh: &DiscreteVarifold) -> Self {
        let mut tree = KdTree { order: (0..mesh.num_vertices()).collect(), nodes: Vec::new() };
        tree.build(mesh, 0, mesh.num_vertices());
        tree
    }

    fn build(&mut self, mesh: &DiscreteVarifold, start: usize, end: usize) -> usize {
        let n = mesh.dim();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for &v in &self.order[start..end] {
            for (k, x) in mesh.vertex(v).iter().enumerate() {
                lo[k] = lo[k].min(*x);
                hi[k] = hi[k].max(*x);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(KdNode { lo: lo.clone(), hi: hi.clone(), start, end, children: None });
        if end - start > LEAF_SIZE {
            let axis = (0..n).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a))).unwrap();
            let mid = (start + end) / 2;
            self.order[start..end].sort_by(|&a, &b| mesh.vertex(a)[axis].total_cmp(&mesh.vertex(b)[axis]).then(a.cmp(&b)));
            let l = self.build(mesh, start, mid);
            let r = self.build(mesh, mid, end);
            self.nodes[id].children = Some((l, r));
        }
        id
    }

    /// Squared distance of some pair found by a double sweep.
    fn seed_lower_bound(&self, mesh: &DiscreteVarifold) -> f64 {
        let far = |from: usize| {
            (0..mesh.num_vertices()).fold((from, 0.0), |b, v| {
                let d = mesh.dist2(from, v);
                if d > b.1 {
                    (v, d)
                } else {
                    b
                }
            })
        };
        let (a, _) = far(0);
        far(a).1
    }

    fn upper_bound2(&self, a: usize, b: usize) -> f64 {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        (0..na.lo.len())
            .map(|k| {
                let d = (na.hi[k] - nb.lo[k]).abs().max((nb.hi[k] - na.lo[k]).abs());
                d * d
            })
            .sum()
    }

    /// Calls `f(i, j, d²)` on every pair (i < j in tree order) whose node
    /// pair bound reaches the threshold `f` returns.
    fn visit<F: FnMut(usize, usize, f64) -> f64>(&self, mesh: &DiscreteVarifold, a: usize, b: usize, f: &mut F) {
        let mut threshold = f(usize::MAX, usize::MAX, f64::NEG_INFINITY);
        self.visit_inner(mesh, a, b, f, &mut threshold);
    }

    fn visit_inner<F: FnMut(usize, usize, f64) -> f64>(
        &self,
        mesh: &DiscreteVarifold,
        a: usize,
        b: usize,
        f: &mut F,
        threshold: &mut f64,
    ) {
        if self.upper_bound2(a, b) < *threshold {
            return;
        }
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        match (na.children, nb.children) {
            (None, None) => {
                for (x, &i) in self.order[na.start..na.end].iter().enumerate() {
                    let js = if a == b { &self.order[na.start + x + 1..na.end] } else { &self.order[nb.start..nb.end] };
                    for &j in js {
                        *threshold = f(i, j, mesh.dist2(i, j));
                    }
                }
            }
            _ if a == b => {
                let (l, r) = na.children.unwrap();
                self.visit_inner(mesh, l, r, f, threshold);
                self.visit_inner(mesh, l, l, f, threshold);
                self.visit_inner(mesh, r, r, f, threshold);
            }
            _ => {
                let split_a = match (na.children, nb.children) {
                    (Some(_), None) => true,
                    (None, Some(_)) => false,
                    _ => na.end - na.start >= nb.end - nb.start,
                };
                let (c1, c2, other) = if split_a {
                    let (l, r) = na.children.unwrap();
                    (l, r, b)
                } else {
                    let (l, r) = nb.children.unwrap();
                    (l, r, a)
                };
                // most promising child first
                let (first, second) =
                    if self.upper_bound2(c1, other) >= self.upper_bound2(c2, other) { (c1, c2) } else { (c2, c1) };
                self.visit_inner(mesh, first, other, f, threshold);
                self.visit_inner(mesh, second, other, f, threshold);
            }
        }
    }
}
