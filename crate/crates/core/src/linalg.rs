//! Small dense determinants by LU with partial pivoting.

use crate::real::Real;

/// Row-major square matrix used for the determinant kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self { n, data: rows.iter().flatten().copied().collect() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn det(&self) -> T {
        let mut work = self.data.clone();
        det_in_place(&mut work, self.n)
    }
}

/// Determinant of the row-major `n × n` matrix in `a`, destroying it.
pub fn det_in_place<T: Real>(a: &mut [T], n: usize) -> T {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => return T::one(),
        1 => return a[0],
        2 => return a[0] * a[3] - a[1] * a[2],
        _ => {}
    }
    let mut det = T::one();
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for i in (k + 1)..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == T::zero() {
            return T::zero();
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let d = a[k * n + k];
        det = det * d;
        for i in (k + 1)..n {
            let f = a[i * n + k] / d;
            if f != T::zero() {
                for j in (k + 1)..n {
                    let v = a[k * n + j];
                    a[i * n + j] = a[i * n + j] - f * v;
                }
            }
        }
    }
    det
}

/// Determinant of the matrix with entries `f(i, j)`.
pub fn det_with<T: Real>(n: usize, mut f: impl FnMut(usize, usize) -> T) -> T {
    let mut buf = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            buf.push(f(i, j));
        }
    }
    det_in_place(&mut buf, n)
}

/// Vandermonde product `Π_{i<j} (x_j − x_i)`.
pub fn vandermonde<T: Real>(x: &[T]) -> T {
    let mut p = T::one();
    for j in 0..x.len() {
        for i in 0..j {
            p = p * (x[j] - x[i]);
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_determinants() {
        let m = DenseMatrix::from_rows(&[vec![2.0f64, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]);
        assert!((m.det() - 18.0).abs() < 1e-12);
        assert_eq!(det_with(0, |_, _| 0.0f64), 1.0);
        assert_eq!(det_with(2, |i, j| if i == j { 1.0f32 } else { 0.0 }), 1.0);
    }

    #[test]
    fn vandermonde_matches_power_determinant() {
        let x = [0.3f64, 1.1, 2.5, -0.7];
        let d = det_with(4, |i, j| x[j].powi(i as i32));
        assert!((d - vandermonde(&x)).abs() < 1e-12 * d.abs().max(1.0));
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(m.det(), -1.0);
        let m3 = DenseMatrix::from_rows(&[vec![0.0f64, 1.0, 2.0], vec![1.0, 0.0, 3.0], vec![4.0, -3.0, 8.0]]);
        assert!((m3.det() - (-2.0)).abs() < 1e-12);
    }
}
