//! Small dense linear algebra: row-major matrices, cyclic Jacobi
//! eigendecomposition for symmetric matrices and LU with partial pivoting.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// `Aᵀ v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "vector length differs from row count");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    s += self[(i, j)] * self[(i, j)];
                }
            }
        }
        libm::sqrt(s)
    }

    fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors as
/// the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `tol` times the Frobenius norm of the input.
///
/// Each eigenvector is sign-normalised so that its first entry that is not
/// negligible is positive; pairs are then sorted by eigenvalue, ties kept in
/// the order of their normalised vectors.
pub fn symmetric_eigen(a: &Matrix, tol: f64) -> SymmetricEigen {
    let n = a.rows();
    assert_eq!(n, a.cols(), "symmetric_eigen needs a square matrix");
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if m.off_diagonal_norm() <= tol * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let mut col = v.column(j);
            normalize_sign(&mut col);
            (m[(j, j)], col)
        })
        .collect();
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal).then_with(|| lexicographic(&a.1, &b.1))
    });

    let mut vectors = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (j, (val, col)) in pairs.into_iter().enumerate() {
        values.push(val);
        for (i, x) in col.into_iter().enumerate() {
            vectors[(i, j)] = x;
        }
    }
    SymmetricEigen { values, vectors }
}

fn normalize_sign(v: &mut [f64]) {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
    let threshold = 1e-12 * norm;
    if let Some(first) = v.iter().find(|x| x.abs() > threshold) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(core::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    core::cmp::Ordering::Equal
}

/// LU factorisation with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    /// Returns `None` when a pivot is exactly zero or not finite.
    pub fn factor(mut a: Matrix) -> Option<Lu> {
        let n = a.rows();
        assert_eq!(n, a.cols(), "LU needs a square matrix");
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, a[(i, k)].abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > 0.0) || !pivot.is_finite() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let akk = a[(k, k)];
            for i in (k + 1)..n {
                let factor = a[(i, k)] / akk;
                a[(i, k)] = factor;
                if factor != 0.0 {
                    for j in (k + 1)..n {
                        let akj = a[(k, j)];
                        a[(i, j)] -= factor * akj;
                    }
                }
            }
        }
        Some(Lu { lu: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n, "right-hand side has wrong length");
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalises_small_symmetric_matrix() {
        let a = Matrix::from_row_major(3, 3, vec![2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let eig = symmetric_eigen(&a, 1e-14);
        let s2 = core::f64::consts::SQRT_2;
        let expected = [2.0 - s2, 2.0, 2.0 + s2];
        for (got, want) in eig.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
        // A V = V diag(values)
        let av = a.mul(&eig.vectors);
        for j in 0..3 {
            for i in 0..3 {
                assert!((av[(i, j)] - eig.values[j] * eig.vectors[(i, j)]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn eigenvectors_have_positive_leading_entry() {
        let a = Matrix::from_row_major(2, 2, vec![1.0, -1.0, -1.0, 1.0]);
        let eig = symmetric_eigen(&a, 1e-14);
        for j in 0..2 {
            let col = eig.vectors.column(j);
            let lead = col.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*lead > 0.0);
        }
    }

    #[test]
    fn lu_solves_pivoting_system() {
        let a = Matrix::from_row_major(3, 3, vec![0.0, 2.0, 1.0, 1.0, 1.0, 1.0, 4.0, -1.0, 3.0]);
        let x_true = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x_true);
        let x = Lu::factor(a).unwrap().solve(&b);
        for (g, w) in x.iter().zip(x_true) {
            assert!((g - w).abs() < 1e-14);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(Lu::factor(a).is_none());
    }
}
