//! Exact triangle clipping against disks and half-spaces.

use crate::linalg::{dot, norm2, orthonormal_pair, sub, twice_area};

type P2 = [f64; 2];

#[inline]
fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Signed area of (disk of radius `r` at the origin) ∩ (triangle O, a, b).
fn wedge_area(a: P2, b: P2, r: f64) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let qa = d[0] * d[0] + d[1] * d[1];
    let qb = 2.0 * (a[0] * d[0] + a[1] * d[1]);
    let qc = a[0] * a[0] + a[1] * a[1] - r * r;
    let mut ts = [0.0, 0.0, 0.0, 0.0];
    let mut nt = 1;
    if qa > 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc > 0.0 {
            let s = disc.sqrt();
            for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
                if t > 0.0 && t < 1.0 {
                    ts[nt] = t;
                    nt += 1;
                }
            }
        }
    }
    ts[nt] = 1.0;
    nt += 1;
    let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1]];
    let mut total = 0.0;
    for w in ts[..nt].windows(2) {
        let (p, q) = (at(w[0]), at(w[1]));
        let m = at(0.5 * (w[0] + w[1]));
        if m[0] * m[0] + m[1] * m[1] <= r * r {
            total += 0.5 * cross(p, q);
        } else {
            total += 0.5 * r * r * cross(p, q).atan2(p[0] * q[0] + p[1] * q[1]);
        }
    }
    total
}

/// Area of the intersection of the planar triangle `tri` with the disk of
/// radius `r` centred at `c`.
pub fn disk_triangle_area(tri: [P2; 3], c: P2, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let rel: [P2; 3] = std::array::from_fn(|k| [tri[k][0] - c[0], tri[k][1] - c[1]]);
    let s: f64 = (0..3).map(|k| wedge_area(rel[k], rel[(k + 1) % 3], r)).sum();
    s.abs()
}

/// Area of triangle (a, b, c) in ℝⁿ inside the closed ball B(x, r).
pub fn triangle_ball_area(a: &[f64], b: &[f64], c: &[f64], x: &[f64], r: f64) -> f64 {
    let r2 = r * r;
    let (da, db, dc) = (norm2(&sub(a, x)), norm2(&sub(b, x)), norm2(&sub(c, x)));
    let e1 = sub(b, a);
    let e2 = sub(c, a);
    if da <= r2 && db <= r2 && dc <= r2 {
        return 0.5 * twice_area(&e1, &e2);
    }
    let Some((u, v)) = orthonormal_pair(&e1, &e2) else {
        return 0.0;
    };
    let d = sub(x, a);
    let cu = dot(&d, &u);
    let cv = dot(&d, &v);
    let h2 = norm2(&d) - cu * cu - cv * cv;
    let rr2 = r2 - h2.max(0.0);
    if rr2 <= 0.0 {
        return 0.0;
    }
    let tri = [[0.0, 0.0], [dot(&e1, &u), dot(&e1, &v)], [dot(&e2, &u), dot(&e2, &v)]];
    disk_triangle_area(tri, [cu, cv], rr2.sqrt())
}

/// Area of triangle (a, b, c) inside the half-space {y : ⟨y, normal⟩ ≤ offset}.
pub fn triangle_halfspace_area(a: &[f64], b: &[f64], c: &[f64], normal: &[f64], offset: f64) -> f64 {
    let pts = [a, b, c];
    let s: [f64; 3] = std::array::from_fn(|k| dot(pts[k], normal) - offset);
    let full = 0.5 * twice_area(&sub(b, a), &sub(c, a));
    let inside = s.iter().filter(|&&x| x <= 0.0).count();
    match inside {
        3 => full,
        0 => 0.0,
        _ => {
            // Sutherland-Hodgman against one plane
            let mut poly: Vec<Vec<f64>> = Vec::with_capacity(4);
            for k in 0..3 {
                let (p, q) = (pts[k], pts[(k + 1) % 3]);
                let (sp, sq) = (s[k], s[(k + 1) % 3]);
                if sp <= 0.0 {
                    poly.push(p.to_vec());
                }
                if (sp <= 0.0) != (sq <= 0.0) {
                    let t = sp / (sp - sq);
                    poly.push(p.iter().zip(q).map(|(x, y)| x + t * (y - x)).collect());
                }
            }
            let mut area = 0.0;
            for k in 1..poly.len() - 1 {
                area += 0.5 * twice_area(&sub(&poly[k], &poly[0]), &sub(&poly[k + 1], &poly[0]));
            }
            area
        }
    }
}

/// Euclidean distance from `x` to the triangle (a, b, c) in ℝⁿ.
pub fn point_triangle_distance(a: &[f64], b: &[f64], c: &[f64], x: &[f64]) -> f64 {
    let e1 = sub(b, a);
    let e2 = sub(c, a);
    let Some((u, v)) = orthonormal_pair(&e1, &e2) else {
        return segment_distance(a, b, x).min(segment_distance(b, c, x)).min(segment_distance(a, c, x));
    };
    let d = sub(x, a);
    let p = [dot(&d, &u), dot(&d, &v)];
    let h2 = (norm2(&d) - p[0] * p[0] - p[1] * p[1]).max(0.0);
    let tri = [[0.0, 0.0], [dot(&e1, &u), dot(&e1, &v)], [dot(&e2, &u), dot(&e2, &v)]];
    let in2 = point_triangle_dist2_2d(tri, p);
    (h2 + in2).sqrt()
}

fn segment_distance(a: &[f64], b: &[f64], x: &[f64]) -> f64 {
    let d = sub(b, a);
    let l2 = norm2(&d);
    let t = if l2 > 0.0 { (dot(&sub(x, a), &d) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let p: Vec<f64> = a.iter().zip(&d).map(|(ai, di)| ai + t * di).collect();
    norm2(&sub(x, &p)).sqrt()
}

fn point_triangle_dist2_2d(t: [P2; 3], p: P2) -> f64 {
    let orient = cross([t[1][0] - t[0][0], t[1][1] - t[0][1]], [t[2][0] - t[0][0], t[2][1] - t[0][1]]).signum();
    let inside = (0..3).all(|k| {
        let (a, b) = (t[k], t[(k + 1) % 3]);
        orient * cross([b[0] - a[0], b[1] - a[1]], [p[0] - a[0], p[1] - a[1]]) >= 0.0
    });
    if inside {
        return 0.0;
    }
    (0..3)
        .map(|k| {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let l2 = d[0] * d[0] + d[1] * d[1];
            let s = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0);
            let q = [a[0] + s * d[0] - p[0], a[1] + s * d[1] - p[1]];
            q[0] * q[0] + q[1] * q[1]
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_inside_triangle() {
        let tri = [[-10.0, -10.0], [10.0, -10.0], [0.0, 10.0]];
        assert!((disk_triangle_area(tri, [0.0, -1.0], 0.5) - PI * 0.25).abs() < 1e-13);
    }

    #[test]
    fn triangle_inside_disk() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!((disk_triangle_area(tri, [0.2, 0.2], 5.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn quarter_disk_at_right_corner() {
        let tri = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        assert!((disk_triangle_area(tri, [0.0, 0.0], 1.0) - PI / 4.0).abs() < 1e-13);
    }

    #[test]
    fn half_disk_on_edge() {
        let tri = [[-10.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        assert!((disk_triangle_area(tri, [0.0, 0.0], 1.0) - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn disjoint_is_zero() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert_eq!(disk_triangle_area(tri, [5.0, 5.0], 1.0), 0.0);
    }

    #[test]
    fn ball_cuts_plane_in_smaller_disk() {
        // ball of radius 1 at height 0.6 above a big triangle → disk radius 0.8
        let a = [-10.0, -10.0, 0.0];
        let b = [10.0, -10.0, 0.0];
        let c = [0.0, 10.0, 0.0];
        let area = triangle_ball_area(&a, &b, &c, &[0.0, 0.0, 0.6], 1.0);
        assert!((area - PI * 0.64).abs() < 1e-12);
    }

    #[test]
    fn halfspace_halves_symmetric_triangle() {
        let a = [-1.0, 0.0, 0.0];
        let b = [1.0, 0.0, 0.0];
        let c = [0.0, 1.0, 0.0];
        let lo = triangle_halfspace_area(&a, &b, &c, &[1.0, 0.0, 0.0], 0.0);
        assert!((lo - 0.5).abs() < 1e-15);
        let hi = triangle_halfspace_area(&a, &b, &c, &[-1.0, 0.0, 0.0], 0.0);
        assert!((lo + hi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distance_to_triangle() {
        let a = [0.0, 0.0, 0.0];
        let b = [1.0, 0.0, 0.0];
        let c = [0.0, 1.0, 0.0];
        assert!((point_triangle_distance(&a, &b, &c, &[0.2, 0.2, 3.0]) - 3.0).abs() < 1e-15);
        assert!((point_triangle_distance(&a, &b, &c, &[2.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((point_triangle_distance(&a, &b, &c, &[1.0, 1.0, 0.0]) - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
