//! Small dense symmetric linear algebra.
//!
//! Everything here is O(n³) on row-major storage; asset counts are expected to
//! stay in the low tens. No routine forms an explicit inverse: products with
//! Ω⁻¹ go through [`solve_spd`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Tolerance used when validating symmetry and the unit diagonal of a
/// correlation matrix supplied as decimal text.
const CORRELATION_TOL: f64 = 1e-12;

/// Relative pivot floor for the Cholesky factorization.
const PIVOT_TOL: f64 = 1e-14;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from rows; every row must have the same length as the
    /// number of rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n.max(1))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let n = self.n;
        let mut out = Self::zeros(n);
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
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok(self.rows().take(self.n).map(|row| dot(row, x)).collect())
    }

    /// xᵀ M y
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * dot(self.row(i), y)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Instantaneous covariance Ω_ij = σᵢσⱼρᵢⱼ of the risky returns.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(Matrix);

impl CovarianceMatrix {
    /// Wraps an already-assembled covariance matrix. Only symmetry is checked
    /// here; definiteness is left to [`cholesky`].
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_symmetric(0.0) {
            return Err(Error::InvalidParameter("covariance matrix is not symmetric".into()));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }
}

/// Checks that `rho` is a valid correlation matrix of dimension `n`.
pub fn validate_correlation(rho: &Matrix, n: usize) -> Result<()> {
    if rho.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho.dim() });
    }
    for i in 0..n {
        let d = rho[(i, i)];
        if !d.is_finite() || (d - 1.0).abs() > CORRELATION_TOL {
            return Err(Error::InvalidCorrelation(format!("diagonal entry {i} is {d}, expected 1")));
        }
        for j in 0..n {
            let v = rho[(i, j)];
            if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
                return Err(Error::InvalidCorrelation(format!("entry ({i},{j}) = {v} outside [-1, 1]")));
            }
            if (v - rho[(j, i)]).abs() > CORRELATION_TOL {
                return Err(Error::InvalidCorrelation(format!("entries ({i},{j}) and ({j},{i}) differ")));
            }
        }
    }
    Ok(())
}

/// Assembles Ω_ij = σᵢσⱼρᵢⱼ. The result is exactly symmetric and its
/// diagonal is exactly σᵢ².
pub fn build_covariance(sigma: &[f64], rho: &Matrix) -> Result<CovarianceMatrix> {
    let n = sigma.len();
    validate_correlation(rho, n)?;
    if let Some((i, s)) = sigma.iter().enumerate().find(|(_, s)| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::InvalidParameter(format!("sigma[{i}] = {s} must be positive")));
    }
    let mut omega = Matrix::zeros(n);
    for i in 0..n {
        omega[(i, i)] = sigma[i] * sigma[i];
        for j in 0..i {
            let v = sigma[i] * sigma[j] * rho[(i, j)];
            omega[(i, j)] = v;
            omega[(j, i)] = v;
        }
    }
    Ok(CovarianceMatrix(omega))
}

/// Lower-triangular L with LLᵀ = Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor(Matrix);

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// LLᵀ, mostly for verification.
    pub fn reconstruct(&self) -> Matrix {
        let l = &self.0;
        let n = l.dim();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = (0..=j).map(|k| l[(i, k)] * l[(j, k)]).sum();
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Solves LLᵀx = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        let l = &self.0;
        let n = l.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[(i, k)] * b[k]).sum();
            b[i] = (b[i] - s) / l[(i, i)];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| l[(k, i)] * b[k]).sum();
            b[i] = (b[i] - s) / l[(i, i)];
        }
        Ok(())
    }

    /// Writes Lz into `out` without allocating.
    pub fn correlate_into(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if z.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: z.len() });
        }
        if out.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: out.len() });
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.0.row(i)[..=i], &z[..=i]);
        }
        Ok(())
    }
}

/// Cholesky–Banachiewicz factorization. Semidefinite input is rejected, not
/// regularized: any pivot at or below `1e-14 · max diag` fails.
pub fn cholesky(omega: &CovarianceMatrix) -> Result<CholeskyFactor> {
    let a = omega.matrix();
    let n = a.dim();
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)]));
    let floor = PIVOT_TOL * max_diag;
    let mut l = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum();
            if i == j {
                let pivot = a[(i, i)] - s;
                if !(pivot > floor) {
                    return Err(Error::NotPositiveDefinite { index: i, pivot });
                }
                l[(i, i)] = libm::sqrt(pivot);
            } else {
                l[(i, j)] = (a[(i, j)] - s) / l[(j, j)];
            }
        }
    }
    Ok(CholeskyFactor(l))
}

/// Solves Ωx = b by factorize-and-substitute.
pub fn solve_spd(omega: &CovarianceMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != omega.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), found: b.len() });
    }
    let l = cholesky(omega)?;
    let mut x = b.to_vec();
    l.solve_in_place(&mut x)?;
    Ok(x)
}

/// Maps independent standard normals to normals with covariance LLᵀ.
pub fn correlated_normals(l: &CholeskyFactor, z_iid: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; l.dim()];
    l.correlate_into(z_iid, &mut out)?;
    Ok(out)
}
