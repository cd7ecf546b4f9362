//! Compensated (Neumaier) summation.
//!
//! Every measure and energy reduction in the crate goes through
//! [`CompensatedSum`] so that results do not depend on how per-face work was
//! scheduled.

#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of values.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Compensated componentwise sum of `dim`-vectors.
pub fn csum_vec<'a, I: IntoIterator<Item = &'a [f64]>>(dim: usize, iter: I) -> Vec<f64> {
    let mut acc = vec![CompensatedSum::new(); dim];
    for v in iter {
        for (a, x) in acc.iter_mut().zip(v) {
            a.add(*x);
        }
    }
    acc.iter().map(CompensatedSum::value).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(csum(xs), 2.0);
        assert_eq!(xs.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn order_independent_on_shuffles() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1013) as f64 * 1e-3 + 1e8 * ((i % 3) as f64 - 1.0)).collect();
        let mut rev = xs.clone();
        rev.reverse();
        let (a, b) = (csum(xs.iter().copied()), csum(rev.iter().copied()));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }
}
