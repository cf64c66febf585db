use alloc::vec::Vec;

use super::Matrix;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_THRESHOLD: f64 = 1e-13;
const SYMMETRY_TOL: f64 = 1e-10;

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the same order.
    pub eigenvectors: Matrix,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    /// `V diag(f(λ)) V^T`
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Matrix {
        let n = self.len();
        let v = &self.eigenvectors;
        let w: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for (c, &wc) in w.iter().enumerate() {
            if wc == 0.0 {
                continue;
            }
            for i in 0..n {
                let vic = v[(i, c)] * wc;
                if vic == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vic * v[(j, c)];
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.map(|l| l)
    }
}

/// Cyclic Jacobi eigensolver for real symmetric matrices.
///
/// Sweeps until the off-diagonal Frobenius norm drops below
/// `1e-13 * ||M||_F` (at most 100 sweeps).
pub fn eigh(m: &Matrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::Dimension {
            context: "eigh expects a square matrix",
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let asym = m.symmetry_residual();
    if asym > SYMMETRY_TOL * m.max_abs().max(1.0) || !asym.is_finite() {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = Matrix::identity(n);
    let threshold = OFF_DIAGONAL_THRESHOLD * a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.is_finite() {
                    let t = 1.0 / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                } else {
                    0.0
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
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
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues of a real symmetric matrix in descending order, without
/// eigenvectors (Householder reduction to tridiagonal form, then implicit QL).
pub fn eigvalsh(m: &Matrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension {
            context: "eigvalsh expects a square matrix",
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let asym = m.symmetry_residual();
    if asym > SYMMETRY_TOL * m.max_abs().max(1.0) || !asym.is_finite() {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let sym = m.symmetrized();
    let mut a = sym.into_vec();
    let mut d = alloc::vec![0.0; n];
    let mut e = alloc::vec![0.0; n];

    for i in (1..n).rev() {
        let l = i - 1;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i * n + l];
                continue;
            }
            let mut h = 0.0;
            for k in 0..=l {
                a[i * n + k] /= scale;
                h += a[i * n + k] * a[i * n + k];
            }
            let f = a[i * n + l];
            let g = if f >= 0.0 { -libm::sqrt(h) } else { libm::sqrt(h) };
            e[i] = scale * g;
            h -= f * g;
            a[i * n + l] = f - g;
            let mut f = 0.0;
            for j in 0..=l {
                let mut g = 0.0;
                for k in 0..=j {
                    g += a[j * n + k] * a[i * n + k];
                }
                for k in j + 1..=l {
                    g += a[k * n + j] * a[i * n + k];
                }
                e[j] = g / h;
                f += e[j] * a[i * n + j];
            }
            let hh = f / (h + h);
            for j in 0..=l {
                let f = a[i * n + j];
                let g = e[j] - hh * f;
                e[j] = g;
                for k in 0..=j {
                    a[j * n + k] -= f * e[k] + g * a[i * n + k];
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
    }
    for i in 0..n {
        d[i] = a[i * n + i];
    }

    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 * n.max(1) {
                return Err(Error::domain("tridiagonal QL iteration did not converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    libm::sqrt(s)
}

/// Projector onto the span of eigenvectors with eigenvalue above `tol`.
pub fn positive_eigenspace_projector(m: &Matrix, tol: f64) -> Result<Matrix> {
    let spec = eigh(m)?;
    Ok(spec.map(|l| if l > tol { 1.0 } else { 0.0 }))
}

/// Number of eigenvalues above `tol`.
pub fn rank_with_tol(m: &Matrix, tol: f64) -> Result<usize> {
    Ok(eigh(m)?.eigenvalues.iter().filter(|&&l| l > tol).count())
}
