//! Dense vector and matrix helpers for the small dimensions used throughout the crate.

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scale<T: Scalar>(k: T, a: &[T]) -> Vec<T> {
    a.iter().map(|&x| k * x).collect()
}

/// `y += k * x`
pub fn axpy<T: Scalar>(k: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += k * xi;
    }
}

pub fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

pub fn zeros<T: Scalar>(d: usize) -> Vec<T> {
    vec![T::zero(); d]
}

pub fn all_finite<T: Scalar>(a: &[T]) -> bool {
    a.iter().all(|x| x.is_finite())
}

pub fn unit_vector<T: Scalar>(d: usize, i: usize) -> Vec<T> {
    let mut e = zeros(d);
    e[i] = T::one();
    e
}

/// Sum in a fixed pairwise tree order; independent of how the input was produced.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim(c, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.cols, x.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn mul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        check_dim(self.cols, other.rows)?;
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn add_scaled_identity(&self, k: T) -> Matrix<T> {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out[(i, i)] += k;
        }
        out
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    /// Returns eigenvalues and the matrix whose columns are eigenvectors.
    pub fn symmetric_eigen(&self) -> Result<(Vec<T>, Matrix<T>)> {
        if !self.is_square() {
            return Err(Error::InvalidParameter("eigen-decomposition needs a square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut v = Matrix::identity(n);
        let eps = T::epsilon();
        for _sweep in 0..100 {
            let off: T = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)] * a[(i, j)])
                .sum();
            let total: T = a.data.iter().map(|&x| x * x).sum();
            if off <= eps * eps * total || off == T::zero() {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let two = T::lit(2.0);
                    let theta = (a[(q, q)] - a[(p, p)]) / (two * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let eig = (0..n).map(|i| a[(i, i)]).collect();
        Ok((eig, v))
    }

    /// Symmetric square root of a symmetric positive semidefinite matrix.
    /// Eigenvalues below `-tol` are rejected; tiny negative ones are clipped to zero.
    pub fn psd_sqrt(&self, tol: T) -> Result<Matrix<T>> {
        if !self.is_symmetric(tol) {
            return Err(Error::InvalidParameter("matrix is not symmetric".into()));
        }
        let (eig, v) = self.symmetric_eigen()?;
        if let Some(bad) = eig.iter().find(|&&l| l < -tol) {
            return Err(Error::InvalidParameter(format!(
                "matrix is not positive semidefinite (eigenvalue {bad})"
            )));
        }
        let n = self.rows;
        let mut out = Matrix::zeros(n, n);
        for (k, &l) in eig.iter().enumerate() {
            let s = l.max(T::zero()).sqrt();
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += s * v[(i, k)] * v[(j, k)];
                }
            }
        }
        Ok(out)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        let (eig, _) = self.symmetric_eigen()?;
        Ok(eig.into_iter().fold(T::infinity(), T::min))
    }

    /// Solves `self * x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        solve_dense(self.to_rows(), b.to_vec())
            .ok_or_else(|| Error::InvalidParameter("singular linear system".into()))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Gaussian elimination with partial pivoting; `None` when the system is (numerically) singular.
pub(crate) fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |m, &x| m.max(x.abs()))
        .max(T::min_positive_value());
    let tiny = scale * T::epsilon() * T::lit(64.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() <= tiny {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Maximizes `c^T x` subject to `A x <= b`, `x >= 0`, with `b >= 0` (origin feasible).
/// Dense tableau simplex with Bland's rule. Returns `None` when unbounded.
pub(crate) fn simplex_max<T: Scalar>(c: &[T], a: &[Vec<T>], b: &[T]) -> Option<(T, Vec<T>)> {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = vec![T::zero(); width];
        row[..n].copy_from_slice(&a[i]);
        row[n + i] = T::one();
        row[width - 1] = b[i];
        tab.push(row);
    }
    let mut obj = vec![T::zero(); width];
    for j in 0..n {
        obj[j] = -c[j];
    }
    tab.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();
    let tol = T::epsilon() * T::lit(1e3);
    for _ in 0..10_000 {
        let enter = (0..n + m).find(|&j| tab[m][j] < -tol);
        let Some(enter) = enter else { break };
        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            if tab[i][enter] > tol {
                let ratio = tab[i][width - 1] / tab[i][enter];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - tol || (ratio <= lr + tol && basis[i] < basis[li]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let (row, _) = leave?;
        let p = tab[row][enter];
        for v in tab[row].iter_mut() {
            *v /= p;
        }
        for i in 0..=m {
            if i != row {
                let f = tab[i][enter];
                if f != T::zero() {
                    for j in 0..width {
                        let v = tab[row][j];
                        tab[i][j] -= f * v;
                    }
                }
            }
        }
        basis[row] = enter;
    }
    let mut x = vec![T::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab[i][width - 1];
        }
    }
    Some((tab[m][width - 1], x))
}

/// Value of the zero-sum game `min_{λ ∈ Δ} max_{μ ∈ Δ} λ^T M μ` for a payoff matrix `M`.
pub(crate) fn game_value<T: Scalar>(payoff: &[Vec<T>]) -> T {
    let rows = payoff.len();
    let cols = payoff.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return T::nan();
    }
    // Shift so every entry is positive; the minimizer's normalized LP
    // max 1^T y s.t. M^T y <= 1 then has value 1/v.
    let min = payoff
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::infinity(), |m, &x| m.min(x));
    let shift = T::one() - min;
    let shifted: Vec<Vec<T>> = (0..cols)
        .map(|j| (0..rows).map(|i| payoff[i][j] + shift).collect())
        .collect();
    let c = vec![T::one(); rows];
    let b = vec![T::one(); cols];
    match simplex_max(&c, &shifted, &b) {
        Some((total, _)) if total > T::zero() => T::one() / total - shift,
        _ => T::nan(),
    }
}
