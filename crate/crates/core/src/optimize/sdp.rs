//! Small dense semidefinite programs in standard block form.
//!
//! The problem solved is
//!
//! ```text
//! maximize    bᵀy + offset
//! subject to  Z_k = C_k - Σ_i y_i A_ik ⪰ 0   for every block k
//! ```
//!
//! together with its dual `minimize Σ_k <C_k, X_k> + offset` subject to
//! `Σ_k <A_ik, X_k> = b_i`, `X_k ⪰ 0`. The `y` side carries the physical
//! variable (a state or a set of effects) and starts at `y = 0`, which must
//! be strictly feasible (every `C_k` positive definite). Iterates stay
//! exactly feasible on that side, so every reported `value` is attained.
//!
//! The method is a primal–dual interior point iteration with the HKM search
//! direction and a Mehrotra predictor–corrector step.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{eigvalsh, Cholesky, Matrix};
use crate::{Error, Result};

const MAX_ITERS: usize = 100;
const STEP_FRACTION: f64 = 0.95;
const DIVERGENCE: f64 = 1e12;

/// Symmetric matrix stored as its nonzero entries (both triangles).
#[derive(Clone, Debug, PartialEq)]
pub struct SymSparse {
    entries: Vec<(usize, usize, f64)>,
}

impl SymSparse {
    pub fn from_dense(m: &Matrix) -> Self {
        let mut entries = Vec::new();
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                let v = m[(r, c)];
                if v != 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        SymSparse { entries }
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self, n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `<self, m>` for any square `m`.
    pub fn dot(&self, m: &Matrix) -> f64 {
        self.entries.iter().map(|&(r, c, v)| v * m[(r, c)]).sum()
    }
}

/// Block SDP data; `a[i][k]` is constraint matrix `A_ik`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    c: Vec<Matrix>,
    a: Vec<Vec<SymSparse>>,
    b: Vec<f64>,
    offset: f64,
}

/// Result of [`sdp_solve`].
#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution {
    pub y: Vec<f64>,
    /// `Z_k = C_k - Σ y_i A_ik`, positive definite.
    pub z: Vec<Matrix>,
    /// Certificate matrices of the dual problem.
    pub x: Vec<Matrix>,
    /// `bᵀy + offset`, attained by `y`.
    pub value: f64,
    /// `Σ <C_k, X_k> + offset`; an upper bound on the optimum once `X` is feasible.
    pub upper_bound: f64,
    /// `upper_bound - value`
    pub gap: f64,
    /// `|b - A(X)|` relative to `1 + |b|`.
    pub infeasibility: f64,
    pub iterations: usize,
}

impl SdpProblem {
    pub fn new(c: Vec<Matrix>, a: Vec<Vec<SymSparse>>, b: Vec<f64>, offset: f64) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Dimension {
                context: "one right-hand side per constraint",
                expected: a.len(),
                found: b.len(),
            });
        }
        for m in &c {
            if !m.is_square() {
                return Err(Error::domain("objective blocks must be square"));
            }
            let asym = m.symmetry_residual();
            if asym > 1e-12 {
                return Err(Error::NotSymmetric { asymmetry: asym });
            }
        }
        for row in &a {
            if row.len() != c.len() {
                return Err(Error::Dimension {
                    context: "one constraint matrix per block",
                    expected: c.len(),
                    found: row.len(),
                });
            }
            for (k, s) in row.iter().enumerate() {
                let n = c[k].rows();
                if s.entries.iter().any(|&(r, cc, _)| r >= n || cc >= n) {
                    return Err(Error::domain("constraint entry outside its block"));
                }
                let dense = s.to_dense(n);
                let asym = dense.symmetry_residual();
                if asym > 1e-12 {
                    return Err(Error::NotSymmetric { asymmetry: asym });
                }
            }
        }
        Ok(SdpProblem { c, a, b, offset })
    }

    pub fn constraints(&self) -> usize {
        self.b.len()
    }

    pub fn blocks(&self) -> usize {
        self.c.len()
    }

    /// `C_k - Σ y_i A_ik` for every block.
    pub fn slack(&self, y: &[f64]) -> Vec<Matrix> {
        let mut z = self.c.clone();
        for (yi, row) in y.iter().zip(&self.a) {
            if *yi == 0.0 {
                continue;
            }
            for (zk, s) in z.iter_mut().zip(row) {
                for &(r, c, v) in &s.entries {
                    zk[(r, c)] -= yi * v;
                }
            }
        }
        z
    }

    fn adjoint(&self, dy: &[f64]) -> Vec<Matrix> {
        let mut out: Vec<Matrix> = self.c.iter().map(|m| Matrix::zeros(m.rows(), m.cols())).collect();
        for (yi, row) in dy.iter().zip(&self.a) {
            for (ok, s) in out.iter_mut().zip(row) {
                for &(r, c, v) in &s.entries {
                    ok[(r, c)] += yi * v;
                }
            }
        }
        out
    }

    /// `A(M)_i = Σ_k <A_ik, M_k>`
    fn apply(&self, m: &[Matrix]) -> Vec<f64> {
        self.a
            .iter()
            .map(|row| row.iter().zip(m).map(|(s, mk)| s.dot(mk)).sum())
            .collect()
    }

    /// `M_ij = Σ_k tr(A_ik X_k A_jk Z_k⁻¹)`
    fn schur(&self, x: &[Matrix], zinv: &[Matrix]) -> Matrix {
        let m = self.constraints();
        let mut out = Matrix::zeros(m, m);
        for k in 0..self.blocks() {
            let (xk, wk) = (&x[k], &zinv[k]);
            for i in 0..m {
                let ai = &self.a[i][k].entries;
                if ai.is_empty() {
                    continue;
                }
                for j in i..m {
                    let aj = &self.a[j][k].entries;
                    let mut s = 0.0;
                    for &(p, q, va) in ai {
                        for &(r, t, vb) in aj {
                            s += va * vb * xk[(q, r)] * wk[(t, p)];
                        }
                    }
                    out[(i, j)] += s;
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                out[(i, j)] = out[(j, i)];
            }
        }
        out
    }
}

fn inner(a: &[Matrix], b: &[Matrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Largest `α` with `S + α dS ⪰ 0` (infinite if `dS ⪰ 0`).
fn max_step(chol: &[Cholesky], ds: &[Matrix]) -> Result<f64> {
    let mut alpha = f64::INFINITY;
    for (ch, d) in chol.iter().zip(ds) {
        let lmin = eigvalsh(&ch.whiten(d))?.last().copied().unwrap_or(0.0);
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    Ok(alpha)
}

fn factor_all(ms: &[Matrix]) -> Option<Vec<Cholesky>> {
    ms.iter().map(Cholesky::new).collect()
}

struct Direction {
    dx: Vec<Matrix>,
    dy: Vec<f64>,
    dz: Vec<Matrix>,
}

/// Solves the problem to relative gap and infeasibility `tol`.
///
/// Fails with `SdpNotConverged` after the iteration cap and with
/// `SdpInfeasible` if the certificate side diverges.
pub fn sdp_solve(p: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    let sol = sdp_solve_best_effort(p, tol)?;
    if sol.gap.abs() / (1.0 + sol.value.abs()) > tol || sol.infeasibility > tol {
        return Err(Error::SdpNotConverged {
            iterations: sol.iterations,
            gap: sol.gap,
        });
    }
    Ok(sol)
}

/// Like [`sdp_solve`], but returns the last iterate when the iteration stalls
/// or hits the cap. The `y` side is feasible either way.
pub fn sdp_solve_best_effort(p: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    let m = p.constraints();
    let sizes: Vec<usize> = p.c.iter().map(Matrix::rows).collect();
    let n_total: usize = sizes.iter().sum();
    let mut y = vec![0.0; m];
    let mut z = p.c.clone();
    let mut zchol =
        factor_all(&z).ok_or_else(|| Error::domain("the starting point y = 0 is not strictly feasible"))?;

    let b_norm = libm::sqrt(p.b.iter().map(|v| v * v).sum::<f64>());
    let x_scale =
        p.a.iter()
            .zip(&p.b)
            .map(|(row, bi)| {
                let a_norm = libm::sqrt(
                    row.iter()
                        .flat_map(|s| s.entries.iter().map(|e| e.2 * e.2))
                        .sum::<f64>(),
                );
                (1.0 + bi.abs()) / (1.0 + a_norm)
            })
            .fold(libm::sqrt(n_total as f64).max(10.0), f64::max);
    let mut x: Vec<Matrix> = sizes
        .iter()
        .map(|&n| Matrix::identity(n).scaled(x_scale))
        .collect();
    let mut xchol = factor_all(&x).expect("scaled identity is positive definite");

    let mut iterations = 0;
    let summary = |x: &[Matrix], y: &[f64], z: &[Matrix], iterations: usize| {
        let value = p.b.iter().zip(y).map(|(b, y)| b * y).sum::<f64>() + p.offset;
        let upper = inner(&p.c, x) + p.offset;
        let ax = p.apply(x);
        let res = libm::sqrt(ax.iter().zip(&p.b).map(|(a, b)| (b - a) * (b - a)).sum::<f64>());
        SdpSolution {
            y: y.to_vec(),
            z: z.to_vec(),
            x: x.to_vec(),
            value,
            upper_bound: upper,
            gap: upper - value,
            infeasibility: res / (1.0 + b_norm),
            iterations,
        }
    };

    while iterations < MAX_ITERS {
        let s = summary(&x, &y, &z, iterations);
        let complementarity = inner(&x, &z);
        let rel_gap = complementarity / (1.0 + s.value.abs() + s.upper_bound.abs());
        if rel_gap <= tol && s.gap.abs() / (1.0 + s.value.abs()) <= tol && s.infeasibility <= tol {
            return Ok(s);
        }
        if x.iter().any(|xk| xk.max_abs() > DIVERGENCE) {
            return Err(Error::SdpInfeasible { iterations });
        }
        iterations += 1;

        let zinv: Vec<Matrix> = zchol.iter().map(Cholesky::inverse).collect();
        let mu = complementarity / n_total as f64;
        let schur = p.schur(&x, &zinv);
        let Some(mchol) = Cholesky::new(&schur).or_else(|| {
            let bump = 1e-14 * (0..m).map(|i| schur[(i, i)]).fold(0.0f64, f64::max);
            let mut reg = schur.clone();
            for i in 0..m {
                reg[(i, i)] += bump;
            }
            Cholesky::new(&reg)
        }) else {
            break;
        };

        let a_zinv = p.apply(&zinv);
        let direction = |sigma_mu: f64, second: Option<&[Matrix]>| -> Direction {
            let mut rhs: Vec<f64> = p.b.iter().zip(&a_zinv).map(|(b, a)| b - sigma_mu * a).collect();
            if let Some(corr) = second {
                for (r, v) in rhs.iter_mut().zip(p.apply(corr)) {
                    *r += v;
                }
            }
            let dy = mchol.solve(&rhs);
            let dz: Vec<Matrix> = p.adjoint(&dy).into_iter().map(|m| m.scaled(-1.0)).collect();
            let dx: Vec<Matrix> = (0..x.len())
                .map(|k| {
                    let mut d = zinv[k].scaled(sigma_mu);
                    d.add_scaled(-1.0, &x[k]);
                    d.add_scaled(-1.0, &(&(&x[k] * &dz[k]) * &zinv[k]));
                    if let Some(corr) = second {
                        d.add_scaled(-1.0, &corr[k]);
                    }
                    d.symmetrized()
                })
                .collect();
            Direction { dx, dy, dz }
        };

        let pred = direction(0.0, None);
        let ap = STEP_FRACTION * max_step(&xchol, &pred.dx)?;
        let ad = STEP_FRACTION * max_step(&zchol, &pred.dz)?;
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut xa = x.clone();
        let mut za = z.clone();
        for k in 0..x.len() {
            xa[k].add_scaled(ap, &pred.dx[k]);
            za[k].add_scaled(ad, &pred.dz[k]);
        }
        let mu_aff = inner(&xa, &za) / n_total as f64;
        let ratio = (mu_aff / mu).clamp(0.0, 1.0);
        let sigma = ratio * ratio * ratio;
        let second: Vec<Matrix> = (0..x.len())
            .map(|k| &(&pred.dx[k] * &pred.dz[k]) * &zinv[k])
            .collect();
        let dir = direction(sigma * mu, Some(&second));

        let ap = (STEP_FRACTION * max_step(&xchol, &dir.dx)?).min(1.0);
        let mut ad = (STEP_FRACTION * max_step(&zchol, &dir.dz)?).min(1.0);

        let mut new_x = x.clone();
        for (m, dm) in new_x.iter_mut().zip(&dir.dx) {
            m.add_scaled(ap, dm);
        }
        let Some(new_xchol) = factor_all(&new_x) else {
            break;
        };
        // recompute Z from y so the y side stays exactly feasible
        let mut accepted = None;
        for _ in 0..30 {
            let new_y: Vec<f64> = y.iter().zip(&dir.dy).map(|(a, b)| a + ad * b).collect();
            let new_z = p.slack(&new_y);
            if let Some(ch) = factor_all(&new_z) {
                accepted = Some((new_y, new_z, ch));
                break;
            }
            ad *= 0.5;
        }
        let Some((new_y, new_z, new_zchol)) = accepted else {
            break;
        };
        x = new_x;
        xchol = new_xchol;
        y = new_y;
        z = new_z;
        zchol = new_zchol;
    }
    Ok(summary(&x, &y, &z, iterations))
}
