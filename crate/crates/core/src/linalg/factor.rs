use alloc::vec::Vec;

use super::Matrix;

/// Lower-triangular Cholesky factor `L` with `M = L L^T`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Returns `None` when `m` is not numerically positive definite.
    pub fn new(m: &Matrix) -> Option<Self> {
        let n = m.rows();
        debug_assert!(m.is_square());
        let src = m.as_slice();
        let mut l = alloc::vec![0.0; n * n];
        for j in 0..n {
            let (head, tail) = l.split_at_mut(j * n + n);
            let row_j = &head[j * n..j * n + j];
            let d = src[j * n + j] - row_j.iter().map(|v| v * v).sum::<f64>();
            if d <= 0.0 || !d.is_finite() {
                return None;
            }
            let d = libm::sqrt(d);
            head[j * n + j] = d;
            let row_j = &head[j * n..j * n + j];
            for i in j + 1..n {
                let off = (i - j - 1) * n;
                let row_i = &tail[off..off + j];
                let s = src[i * n + j] - row_i.iter().zip(row_j).map(|(a, b)| a * b).sum::<f64>();
                tail[off + j] = s / d;
            }
        }
        Some(Cholesky {
            l: Matrix::from_vec(n, n, l).expect("n * n entries"),
        })
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut y: Vec<f64> = b.to_vec();
        for i in 0..n {
            let s = y[i] - (0..i).map(|k| self.l[(i, k)] * y[k]).sum::<f64>();
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let s = y[i] - (i + 1..n).map(|k| self.l[(k, i)] * y[k]).sum::<f64>();
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.l.rows();
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = alloc::vec![0.0; n];
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv.symmetrized()
    }

    /// `L^{-1} S L^{-T}` for symmetric `S`.
    pub fn whiten(&self, s: &Matrix) -> Matrix {
        let n = self.l.rows();
        // W = L^{-1} S, column by column forward substitution
        let mut w = s.clone();
        for c in 0..n {
            for i in 0..n {
                let mut v = w[(i, c)];
                for k in 0..i {
                    v -= self.l[(i, k)] * w[(k, c)];
                }
                w[(i, c)] = v / self.l[(i, i)];
            }
        }
        // (L^{-1} W^T)^T = L^{-1} S L^{-T} since W^T = S L^{-T}
        let mut wt = w.transpose();
        for c in 0..n {
            for i in 0..n {
                let mut v = wt[(i, c)];
                for k in 0..i {
                    v -= self.l[(i, k)] * wt[(k, c)];
                }
                wt[(i, c)] = v / self.l[(i, i)];
            }
        }
        wt.symmetrized()
    }
}
