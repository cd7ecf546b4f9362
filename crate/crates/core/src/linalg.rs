//! Small dense helpers on `&[f64]` vectors of runtime dimension.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm2(a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += s * x`
#[inline]
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// Orthonormal basis of span{a, b} by Gram-Schmidt. Returns `None` when the
/// vectors are (numerically) dependent.
pub fn orthonormal_pair(a: &[f64], b: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let na = norm(a);
    if !(na > 0.0) {
        return None;
    }
    let u = scale(a, 1.0 / na);
    let mut w = b.to_vec();
    axpy(-dot(&u, b), &u, &mut w);
    let nw = norm(&w);
    if !(nw > 1e-300) || nw < 1e-14 * norm(b) {
        return None;
    }
    let v = scale(&w, 1.0 / nw);
    Some((u, v))
}

/// Component of `w` orthogonal to the plane spanned by the orthonormal pair
/// `(t1, t2)`.
#[inline]
pub fn perp_to_plane(w: &[f64], t1: &[f64], t2: &[f64]) -> Vec<f64> {
    let mut out = w.to_vec();
    axpy(-dot(w, t1), t1, &mut out);
    axpy(-dot(w, t2), t2, &mut out);
    out
}

/// Twice the area of the triangle spanned by edge vectors `e1`, `e2`
/// (valid in any dimension).
#[inline]
pub fn twice_area(e1: &[f64], e2: &[f64]) -> f64 {
    let a = norm2(e1);
    let b = norm2(e2);
    let c = dot(e1, e2);
    (a * b - c * c).max(0.0).sqrt()
}

/// Matrix-free rotation helper used in tests and generators: rotate `p` by a
/// 3×3 row-major matrix when `dim == 3`, acting on the first three
/// coordinates otherwise.
pub fn apply_rotation3(m: &[[f64; 3]; 3], p: &[f64]) -> Vec<f64> {
    let mut out = p.to_vec();
    for (r, row) in m.iter().enumerate() {
        out[r] = row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
    }
    out
}

/// Rotation matrix from a unit quaternion `(w, x, y, z)` (normalised here).
pub fn quaternion_rotation(q: [f64; 4]) -> [[f64; 3]; 3] {
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_is_orthonormal() {
        let (u, v) = orthonormal_pair(&[1.0, 1.0, 0.0, 2.0], &[0.0, 1.0, 3.0, 1.0]).unwrap();
        assert!((norm(&u) - 1.0).abs() < 1e-15);
        assert!((norm(&v) - 1.0).abs() < 1e-15);
        assert!(dot(&u, &v).abs() < 1e-15);
    }

    #[test]
    fn dependent_pair_rejected() {
        assert!(orthonormal_pair(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).is_none());
    }

    #[test]
    fn quaternion_gives_rotation() {
        let m = quaternion_rotation([0.3, -1.2, 0.4, 2.0]);
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| m[i][k] * m[j][k]).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
