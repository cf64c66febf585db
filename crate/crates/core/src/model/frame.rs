use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{dot, eigh, kron_vec, Matrix};
use crate::{Error, Result};

/// `d - 1` unit vectors pointing at the vertices of a regular simplex inside
/// `span{|2>, ..., |d-1>}`.
///
/// Their Gram matrix is `((d-1) I - J) / (d-2)`. The realization is obtained
/// by factorizing that Gram matrix, so it is fixed for each `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaFrame {
    d: usize,
    thetas: Vec<Vec<f64>>,
}

/// Largest violations of the frame identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameResiduals {
    /// `Σ_p θ_p = 0`
    pub sum: f64,
    /// `<θ_p|θ_q> = (-1 + (d-1) δ_pq) / (d-2)`
    pub gram: f64,
    /// `Σ_p |θ_p><θ_p| = (d-1)/(d-2) · projector onto span{|2>..|d-1>}`
    pub completeness: f64,
    /// `Σ_p |θ_p, θ_p> = (d-1)/(d-2) Σ_k |k, k>`
    pub pair_sum: f64,
}

impl FrameResiduals {
    pub fn max(&self) -> f64 {
        self.sum.max(self.gram).max(self.completeness).max(self.pair_sum)
    }
}

impl ThetaFrame {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::domain("the theta frame needs d >= 3"));
        }
        let m = d - 1;
        let scale = (d - 2) as f64;
        let gram = Matrix::from_fn(m, m, |p, q| {
            (if p == q { (d - 1) as f64 } else { 0.0 } - 1.0) / scale
        });
        let spec = eigh(&gram)?;
        // The Gram matrix has eigenvalue (d-1)/(d-2) with multiplicity d-2 and
        // a zero eigenvalue along the all-ones vector; keep the former.
        let mut thetas = vec![vec![0.0; d]; m];
        for c in 0..d - 2 {
            let lambda = spec.eigenvalues[c];
            let mut col = spec.vector(c);
            // fix the sign so the first clearly nonzero entry is positive
            if let Some(&first) = col.iter().find(|v| v.abs() > 1e-8) {
                if first < 0.0 {
                    col.iter_mut().for_each(|v| *v = -*v);
                }
            }
            let s = libm::sqrt(lambda);
            for (p, theta) in thetas.iter_mut().enumerate() {
                theta[2 + c] = col[p] * s;
            }
        }
        Ok(ThetaFrame { d, thetas })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// One-based `θ_{p+1}`, for `p` in `0..d-1`.
    pub fn theta(&self, p: usize) -> &[f64] {
        &self.thetas[p]
    }

    pub fn thetas(&self) -> &[Vec<f64>] {
        &self.thetas
    }

    pub fn residuals(&self) -> FrameResiduals {
        let d = self.d;
        let scale = (d - 1) as f64 / (d - 2) as f64;
        let mut sum = vec![0.0; d];
        for t in &self.thetas {
            for (s, v) in sum.iter_mut().zip(t) {
                *s += v;
            }
        }
        let sum_res = sum.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        let mut gram_res: f64 = 0.0;
        for (p, tp) in self.thetas.iter().enumerate() {
            for (q, tq) in self.thetas.iter().enumerate() {
                let target = (if p == q { (d - 1) as f64 } else { 0.0 } - 1.0) / (d - 2) as f64;
                gram_res = gram_res.max((dot(tp, tq) - target).abs());
            }
        }

        let mut comp = Matrix::zeros(d, d);
        for t in &self.thetas {
            comp.add_scaled(1.0, &Matrix::projector(t));
        }
        let target = Matrix::from_fn(d, d, |i, j| if i == j && i >= 2 { scale } else { 0.0 });
        let comp_res = (&comp - &target).max_abs();

        let mut pairs = vec![0.0; d * d];
        for t in &self.thetas {
            for (s, v) in pairs.iter_mut().zip(kron_vec(t, t)) {
                *s += v;
            }
        }
        let mut pair_res: f64 = 0.0;
        for j in 0..d {
            for k in 0..d {
                let target = if j == k && j >= 2 { scale } else { 0.0 };
                pair_res = pair_res.max((pairs[j * d + k] - target).abs());
            }
        }

        FrameResiduals {
            sum: sum_res,
            gram: gram_res,
            completeness: comp_res,
            pair_sum: pair_res,
        }
    }
}

pub fn theta_frame(d: usize) -> Result<ThetaFrame> {
    ThetaFrame::new(d)
}

/// `|X> = (d-2)^{-1/2} Σ_{k=2}^{d-1} |k, k>`.
pub fn x_vector(d: usize) -> Vec<f64> {
    let mut x = vec![0.0; d * d];
    let c = 1.0 / libm::sqrt((d - 2) as f64);
    for k in 2..d {
        x[k * d + k] = c;
    }
    x
}

/// The `d - 2` vectors `|φ_k>`, `k = 2..d-1`, each of length `d²`.
pub fn phi_vectors(frame: &ThetaFrame) -> Result<Vec<Vec<f64>>> {
    let d = frame.d;
    if d < 4 {
        return Err(Error::domain("phi vectors need d >= 4"));
    }
    let c = libm::pow((d - 2) as f64, 1.5) / ((d - 1) as f64 * libm::sqrt((d - 3) as f64));
    let pairs: Vec<Vec<f64>> = frame.thetas.iter().map(|t| kron_vec(t, t)).collect();
    Ok((2..d)
        .map(|k| {
            let mut phi = vec![0.0; d * d];
            for (t, pair) in frame.thetas.iter().zip(&pairs) {
                let w = c * t[k];
                for (s, v) in phi.iter_mut().zip(pair) {
                    *s += w * v;
                }
            }
            phi
        })
        .collect())
}

/// Residual of
/// `Σ_k |φ_k><φ_k| = (d-2)²/((d-1)(d-3)) Σ_p |θ_p,θ_p><θ_p,θ_p| - (d-2)/(d-3) |X><X|`.
pub fn phi_identity_residual(frame: &ThetaFrame) -> Result<f64> {
    let d = frame.d;
    let phis = phi_vectors(frame)?;
    let n = d * d;
    let mut lhs = Matrix::zeros(n, n);
    for phi in &phis {
        lhs.add_scaled(1.0, &Matrix::projector(phi));
    }
    let dd = d as f64;
    let mut rhs = Matrix::zeros(n, n);
    let c = (dd - 2.0) * (dd - 2.0) / ((dd - 1.0) * (dd - 3.0));
    for t in &frame.thetas {
        rhs.add_scaled(c, &Matrix::projector(&kron_vec(t, t)));
    }
    rhs.add_scaled(-(dd - 2.0) / (dd - 3.0), &Matrix::projector(&x_vector(d)));
    Ok((&lhs - &rhs).max_abs())
}
