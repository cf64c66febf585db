//! Dense real linear algebra for bipartite operators.
//!
//! Everything is `f64`, row-major, and sized for the problems at hand
//! (operators on at most a few hundred dimensions). Basis vector `|j, k>` of a
//! bipartite space with shape `(dim_a, dim_b)` sits at row `j * dim_b + k`.

mod eigen;
mod factor;

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::{Error, Result};

pub use eigen::{eigh, eigvalsh, positive_eigenspace_projector, rank_with_tol, Spectrum};
pub use factor::Cholesky;

/// Default absolute tolerance for counting eigenvalues of trace-one operators.
pub const RANK_TOL: f64 = 1e-7;
/// Eigenvalues within this distance of zero are left out of spectral projectors.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Dense real matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                context: "matrix entry count",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// `u v^T`
    pub fn outer(u: &[f64], v: &[f64]) -> Self {
        Matrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
    }

    /// Rank-one projector `|v><v|` (not normalized).
    pub fn projector(v: &[f64]) -> Self {
        Matrix::outer(v, v)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    /// Frobenius inner product `tr(self^T other)`.
    pub fn dot(&self, other: &Matrix) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// `max |M[i,j] - M[j,i]|`, or infinity for non-square input.
    pub fn symmetry_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut r: f64 = 0.0;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                r = r.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        r
    }

    /// `(M + M^T) / 2`
    pub fn symmetrized(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: f64, other: &Matrix) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mat_vec shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `v^T M v`
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mat_vec(v))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

/// Local dimensions of a bipartite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BipartiteShape {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteShape {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a < 2 || dim_b < 2 {
            return Err(Error::domain("bipartite local dimensions must be at least 2"));
        }
        Ok(BipartiteShape { dim_a, dim_b })
    }

    pub fn square(d: usize) -> Result<Self> {
        BipartiteShape::new(d, d)
    }

    #[inline]
    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// Row of basis vector `|j, k>`.
    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.dim_b + k
    }

    fn check(&self, m: &Matrix) -> Result<()> {
        let n = self.total();
        if m.rows() != n || m.cols() != n {
            return Err(Error::Dimension {
                context: "bipartite operator",
                expected: n,
                found: if m.rows() != n { m.rows() } else { m.cols() },
            });
        }
        Ok(())
    }
}

/// Kronecker product: `(a ⊗ b)[i*P + k, j*Q + l] = a[i,j] * b[k,l]` for `b` of size `P × Q`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (p, q) = (b.rows(), b.cols());
    let mut out = Matrix::zeros(a.rows() * p, a.cols() * q);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            if aij == 0.0 {
                continue;
            }
            for k in 0..p {
                for l in 0..q {
                    out[(i * p + k, j * q + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn kron_vec(u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for &a in u {
        out.extend(v.iter().map(|b| a * b));
    }
    out
}

/// Transpose on the second factor: `out[(j,k),(j',k')] = m[(j,k'),(j',k)]`.
pub fn partial_transpose(m: &Matrix, shape: BipartiteShape) -> Result<Matrix> {
    shape.check(m)?;
    let (da, db) = (shape.dim_a, shape.dim_b);
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for j in 0..da {
        for k in 0..db {
            for jp in 0..da {
                for kp in 0..db {
                    out[(j * db + k, jp * db + kp)] = m[(j * db + kp, jp * db + k)];
                }
            }
        }
    }
    Ok(out)
}

/// `tr_B[rho (I ⊗ b)]` as an operator on the first factor.
///
/// Satisfies `tr(rho (a ⊗ b)) = tr(a · reduce_to_a(rho, b))`.
pub fn reduce_to_a(rho: &Matrix, shape: BipartiteShape, b: &Matrix) -> Result<Matrix> {
    shape.check(rho)?;
    let (da, db) = (shape.dim_a, shape.dim_b);
    let mut out = Matrix::zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            let mut s = 0.0;
            for k in 0..db {
                for l in 0..db {
                    s += rho[(i * db + k, j * db + l)] * b[(l, k)];
                }
            }
            out[(j, i)] = s;
        }
    }
    Ok(out)
}

/// `tr_A[rho (a ⊗ I)]` as an operator on the second factor.
///
/// Satisfies `tr(rho (a ⊗ b)) = tr(b · reduce_to_b(rho, a))`.
pub fn reduce_to_b(rho: &Matrix, shape: BipartiteShape, a: &Matrix) -> Result<Matrix> {
    shape.check(rho)?;
    let (da, db) = (shape.dim_a, shape.dim_b);
    let mut out = Matrix::zeros(db, db);
    for k in 0..db {
        for l in 0..db {
            let mut s = 0.0;
            for i in 0..da {
                for j in 0..da {
                    s += rho[(i * db + k, j * db + l)] * a[(j, i)];
                }
            }
            out[(l, k)] = s;
        }
    }
    Ok(out)
}

#[inline]
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

/// `y += s * x`
#[inline]
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// Unit basis vector `e_i` of length `n`.
pub fn basis(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_matrix(n: usize, seed: &mut u64) -> Matrix {
        Matrix::from_fn(n, n, |_, _| lcg(seed))
    }

    #[test]
    fn kron_identity() {
        assert_eq!(
            kron(&Matrix::identity(2), &Matrix::identity(2)),
            Matrix::identity(4)
        );
    }

    #[test]
    fn kron_basis_projectors() {
        let k = kron(&Matrix::diag(&[1.0, 0.0]), &Matrix::diag(&[0.0, 1.0]));
        assert_eq!(k, Matrix::diag(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_trace_is_multiplicative() {
        let mut seed = 7;
        for _ in 0..5 {
            let a = random_matrix(3, &mut seed);
            let b = random_matrix(3, &mut seed);
            // direct multiplication oracle: sum of a[i,i] * b[k,k] over all diagonal pairs
            let mut expected = 0.0;
            for i in 0..3 {
                for k in 0..3 {
                    expected += a[(i, i)] * b[(k, k)];
                }
            }
            let got = kron(&a, &b).trace();
            assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));
            assert!((got - a.trace() * b.trace()).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn kron_index_convention() {
        let a = Matrix::from_fn(2, 3, |i, j| (i * 3 + j) as f64 + 1.0);
        let b = Matrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64 - 2.5);
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 3 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_transpose_identity_is_fixed() {
        for (da, db) in [(2, 2), (2, 3), (4, 3)] {
            let shape = BipartiteShape::new(da, db).unwrap();
            let id = Matrix::identity(da * db);
            assert_eq!(partial_transpose(&id, shape).unwrap(), id);
        }
    }

    #[test]
    fn partial_transpose_swaps_two_qubit_coherences() {
        let shape = BipartiteShape::square(2).unwrap();
        let e = |j, k| basis(4, shape.index(j, k));
        let m = &Matrix::outer(&e(0, 0), &e(1, 1)) + &Matrix::outer(&e(1, 1), &e(0, 0));
        let expected = &Matrix::outer(&e(0, 1), &e(1, 0)) + &Matrix::outer(&e(1, 0), &e(0, 1));
        assert_eq!(partial_transpose(&m, shape).unwrap(), expected);
    }

    #[test]
    fn partial_transpose_involution() {
        let mut seed = 11;
        let shape = BipartiteShape::square(3).unwrap();
        let m = random_matrix(9, &mut seed).symmetrized();
        let twice = partial_transpose(&partial_transpose(&m, shape).unwrap(), shape).unwrap();
        assert_eq!(twice, m);
    }

    #[test]
    fn partial_transpose_shape_mismatch() {
        let shape = BipartiteShape::square(3).unwrap();
        assert!(matches!(
            partial_transpose(&Matrix::identity(8), shape),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn reductions_reproduce_product_expectation() {
        let mut seed = 3;
        let shape = BipartiteShape::new(2, 3).unwrap();
        let rho = random_matrix(6, &mut seed).symmetrized();
        let a = random_matrix(2, &mut seed).symmetrized();
        let b = random_matrix(3, &mut seed).symmetrized();
        let direct = (&rho * &kron(&a, &b)).trace();
        let via_a = (&a * &reduce_to_a(&rho, shape, &b).unwrap()).trace();
        let via_b = (&b * &reduce_to_b(&rho, shape, &a).unwrap()).trace();
        assert!((direct - via_a).abs() < 1e-12);
        assert!((direct - via_b).abs() < 1e-12);
    }

    #[test]
    fn shape_rejects_qubit_less() {
        assert!(BipartiteShape::new(1, 3).is_err());
    }
}
