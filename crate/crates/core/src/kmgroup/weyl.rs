use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `x_1 ≤ … ≤ x_n` of the closed Weyl chamber with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylVector {
    coords: Vec<f64>,
}

impl WeylVector {
    /// Rejects unordered or non-finite coordinates.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate in {coords:?}")));
        }
        if coords.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain(format!("coordinates {coords:?} are not weakly increasing")));
        }
        Ok(Self { coords })
    }

    /// Like [`WeylVector::new`], additionally requiring `l < x_1` and `x_n < r`.
    pub fn interior(coords: Vec<f64>, l: f64, r: f64) -> Result<Self> {
        let w = Self::new(coords)?;
        if !w.is_interior(l, r) {
            return Err(Error::Domain(format!("{:?} not inside ({l}, {r})", w.coords)));
        }
        Ok(w)
    }

    /// Sorts first; for samplers and user input in arbitrary order.
    pub fn from_unsorted(mut coords: Vec<f64>) -> Result<Self> {
        coords.sort_by(f64::total_cmp);
        Self::new(coords)
    }

    pub fn is_interior(&self, l: f64, r: f64) -> bool {
        self.coords.iter().all(|&v| v > l && v < r)
    }

    /// Strictly increasing coordinates.
    pub fn is_strict(&self) -> bool {
        self.coords.windows(2).all(|w| w[0] < w[1])
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }
}

impl Deref for WeylVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

/// Strictly increasing points spread across `(l, r)`, used to fix the sign
/// of determinant eigenfunctions.
pub fn canonical_probe(l: f64, r: f64, n: usize) -> Vec<f64> {
    let nf = n as f64;
    (1..=n)
        .map(|k| {
            let kf = k as f64;
            match (l.is_finite(), r.is_finite()) {
                (true, true) => l + (r - l) * kf / (nf + 1.0),
                (true, false) => l + kf,
                (false, true) => r - (nf + 1.0 - kf),
                (false, false) => kf - 0.5 * (nf + 1.0),
            }
        })
        .collect()
}

/// Calls `f` on every strictly increasing `n`-tuple of indices below `m`.
pub fn for_each_strict_tuple(m: usize, n: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 {
        f(&[]);
        return;
    }
    if n > m {
        return;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        f(&idx);
        // Rightmost slot that can still move.
        let Some(k) = (0..n).rev().find(|&k| idx[k] < m - n + k) else {
            return;
        };
        idx[k] += 1;
        for j in k + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_enforced() {
        assert!(WeylVector::new(vec![0.0, 0.0, 1.0]).is_ok());
        assert!(WeylVector::new(vec![1.0, 0.0]).is_err());
        assert!(WeylVector::interior(vec![0.0, 1.0], 0.0, 2.0).is_err());
        assert_eq!(&*WeylVector::from_unsorted(vec![2.0, -1.0]).unwrap(), &[-1.0, 2.0]);
    }

    #[test]
    fn strict_tuples_are_enumerated_once() {
        let mut seen = Vec::new();
        for_each_strict_tuple(5, 3, |t| seen.push(t.to_vec()));
        assert_eq!(seen.len(), 10);
        assert!(seen.iter().all(|t| t.windows(2).all(|w| w[0] < w[1])));
        let mut count = 0;
        for_each_strict_tuple(3, 0, |_| count += 1);
        assert_eq!(count, 1);
        for_each_strict_tuple(2, 3, |_| panic!("no tuples"));
    }
}
