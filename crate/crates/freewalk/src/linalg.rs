//! Dense linear algebra for the small systems of this crate (n ≤ ~8):
//! partial-pivot elimination, matrix products, and power iteration.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Matrix {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            debug_assert_eq!(row.len(), n);
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Companion matrix with top row `p` and a shifted identity below.
    pub fn companion(p: &[f64]) -> Matrix {
        let n = p.len();
        let mut m = Matrix::zeros(n);
        for (j, &v) in p.iter().enumerate() {
            m[(0, j)] = v;
        }
        for i in 1..n {
            m[(i, i - 1)] = 1.0;
        }
        m
    }

    /// Permutation that reverses row order.
    pub fn row_reversal(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, n - 1 - i)] = 1.0;
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    /// `max_{ij} |self − other|`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }

    /// Solves `self · x = b` by partial-pivot Gaussian elimination.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        debug_assert_eq!(self.n, b.len());
        let n = self.n;
        let mut a = self.data.clone();
        let mut x: Vec<f64> = b.to_vec();
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r1, &r2| {
                    libm::fabs(a[r1 * n + col])
                        .partial_cmp(&libm::fabs(a[r2 * n + col]))
                        .unwrap()
                })
                .unwrap();
            if libm::fabs(a[pivot_row * n + col]) < 1e-300 {
                return Err(Error::SingularSystem);
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                }
                x.swap(col, pivot_row);
            }
            let pivot = a[col * n + col];
            for row in (col + 1)..n {
                let factor = a[row * n + col] / pivot;
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[row * n + j] -= factor * a[col * n + j];
                }
                x[row] -= factor * x[col];
            }
        }
        for col in (0..n).rev() {
            let mut v = x[col];
            for j in (col + 1)..n {
                v -= a[col * n + j] * x[j];
            }
            x[col] = v / a[col * n + col];
        }
        Ok(x)
    }

    /// Dominant eigenvalue of a nonnegative matrix by power iteration with
    /// max-norm scaling. Returns the eigenvalue estimate.
    pub fn power_iteration(&self, tol: f64, max_iter: usize) -> Result<f64> {
        let n = self.n;
        let mut v = vec![1.0; n];
        let mut lambda = 0.0f64;
        for _ in 0..max_iter {
            let w = self.mul_vec(&v);
            let norm = w.iter().fold(0.0f64, |m, &x| m.max(libm::fabs(x)));
            if norm < 1e-300 {
                return Err(Error::SingularSystem);
            }
            let next: Vec<f64> = w.iter().map(|&x| x / norm).collect();
            if libm::fabs(norm - lambda) < tol
                && v.iter().zip(&next).all(|(a, b)| libm::fabs(a - b) < tol)
            {
                return Ok(norm);
            }
            lambda = norm;
            v = next;
        }
        Ok(lambda)
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = m.solve(&[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(m.solve(&[1.0, 2.0]), Err(Error::SingularSystem)));
    }

    #[test]
    fn companion_power_iteration() {
        // x^2 - 0.5x - 0.5 has largest root 1.
        let m = Matrix::companion(&[0.5, 0.5]);
        let lambda = m.power_iteration(1e-12, 100_000).unwrap();
        assert!((lambda - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reversal_and_product() {
        let s = Matrix::row_reversal(2);
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let flipped = s.mul(&m);
        assert_eq!(flipped[(0, 0)], 3.0);
        assert_eq!(flipped[(1, 1)], 2.0);
    }
}
