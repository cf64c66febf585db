//! Unconstrained coordinates for the state and measurement families.
//!
//! A free vector has 14 entries:
//!
//! ```text
//! [u0, u0p, u1, u1p, v0, v0p, v1, v1p, w, φ, ψ, α, β, γ]
//! ```
//!
//! The gauge is `B = V = 0`. For `d > 3` the overall scale is fixed by
//! `U = 1`, which makes `A = √((d-2)/(d-3))`; at `d = 3`, where `U` drops
//! out, `A = 1` instead. The `a_ij` then follow linearly. The `b` block is
//! `R(φ) diag(s, c/s) R(ψ)` with `s = e^w |(u, v, 1)|` and `c` the
//! determinant the `a00 a11` constraint demands, so every constraint holds
//! by construction. The whole vector is finally rescaled to unit trace.
//! Measurements use `x = (cos α, sin α cos β, sin α sin β)` and
//! `y = (cos γ, sin γ)`.

use crate::model::{MeasurementParams, StateParams};
use crate::{Error, Result};

/// Length of a free vector.
pub const FREE_DIM: usize = 14;

fn rot(t: f64) -> [[f64; 2]; 2] {
    let (s, c) = libm::sincos(t);
    [[c, -s], [s, c]]
}

fn mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `M = R(φ) diag(s1, s2) R(ψ)` with `s1 ≥ |s2|`; returns `(φ, s1, s2, ψ)`.
fn rotation_svd(m: [[f64; 2]; 2]) -> (f64, f64, f64, f64) {
    let e = 0.5 * (m[0][0] + m[1][1]);
    let f = 0.5 * (m[0][0] - m[1][1]);
    let g = 0.5 * (m[1][0] + m[0][1]);
    let h = 0.5 * (m[1][0] - m[0][1]);
    let q = libm::hypot(e, h);
    let r = libm::hypot(f, g);
    let a1 = libm::atan2(g, f);
    let a2 = libm::atan2(h, e);
    (0.5 * (a2 + a1), q + r, q - r, 0.5 * (a2 - a1))
}

fn scale_fix(d: usize) -> (f64, f64) {
    if d > 3 {
        let dd = d as f64;
        (1.0, libm::sqrt((dd - 2.0) / (dd - 3.0)))
    } else {
        (0.0, 1.0)
    }
}

/// Maps a free vector to normalized, constraint-satisfying parameters.
pub fn parameterize_free(d: usize, z: &[f64]) -> Result<(StateParams, MeasurementParams)> {
    if d < 3 {
        return Err(Error::domain("the state family needs d >= 3"));
    }
    if z.len() != FREE_DIM {
        return Err(Error::Dimension {
            context: "free vector",
            expected: FREE_DIM,
            found: z.len(),
        });
    }
    let [u0, u0p, u1, u1p, v0, v0p, v1, v1p, w, phi, psi, alpha, beta, gamma] =
        core::array::from_fn::<f64, FREE_DIM, _>(|i| z[i]);
    let (u_big, a_big) = scale_fix(d);
    let r = libm::sqrt((d - 2) as f64) / a_big;
    let a00 = r * (u0 * u0p + v0 * v0p);
    let a01 = r * (u0 * u1p + v0 * v1p);
    let a10 = r * (u1 * u0p + v1 * v0p);
    let a11 = r * (u1 * u1p + v1 * v1p);
    let det = a01 * a10 - a00 * a11;
    let n = libm::sqrt(z[..8].iter().map(|v| v * v).sum::<f64>() + 1.0);
    let s = libm::exp(w) * n;
    let b = mul(mul(rot(phi), [[s, 0.0], [0.0, det / s]]), rot(psi));
    let sp = StateParams {
        a00,
        a01,
        a10,
        a11,
        A: a_big,
        b00: b[0][0],
        b01: b[0][1],
        b10: b[1][0],
        b11: b[1][1],
        B: 0.0,
        u0,
        u0p,
        u1,
        u1p,
        U: u_big,
        v0,
        v0p,
        v1,
        v1p,
        V: 0.0,
    };
    if !sp.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok((
        sp.normalized(d)?,
        MeasurementParams::from_angles(alpha, beta, gamma),
    ))
}

/// Inverse of [`parameterize_free`] for states in the gauge `B = V = 0`
/// satisfying the constraints, with `U ≠ 0` (`d > 3`) or `A ≠ 0` (`d = 3`).
pub fn free_from_params(d: usize, sp: &StateParams, mp: &MeasurementParams) -> Result<[f64; FREE_DIM]> {
    if d < 3 {
        return Err(Error::domain("the state family needs d >= 3"));
    }
    let scale = if d > 3 { sp.U } else { sp.A };
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::domain("the chart needs U != 0 (d > 3) or A != 0 (d = 3)"));
    }
    let uv = [sp.u0, sp.u0p, sp.u1, sp.u1p, sp.v0, sp.v0p, sp.v1, sp.v1p].map(|v| v / scale);
    let b = [[sp.b00, sp.b01], [sp.b10, sp.b11]].map(|row| row.map(|v| v / scale));
    let (phi, s1, _, psi) = rotation_svd(b);
    let n = libm::sqrt(uv.iter().map(|v| v * v).sum::<f64>() + 1.0);
    let w = libm::log(s1.max(1e-300) / n);
    let [alpha, beta, gamma] = mp.angles();
    let mut z = [0.0; FREE_DIM];
    z[..8].copy_from_slice(&uv);
    z[8] = w;
    z[9] = phi;
    z[10] = psi;
    z[11] = alpha;
    z[12] = beta;
    z[13] = gamma;
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_svd_reconstructs() {
        let cases = [
            [[1.0, 2.0], [3.0, 4.0]],
            [[0.5, -0.2], [0.1, 0.0]],
            [[-1.0, 0.0], [0.0, 2.0]],
        ];
        for m in cases {
            let (phi, s1, s2, psi) = rotation_svd(m);
            assert!(s1 >= s2.abs());
            let back = mul(mul(rot(phi), [[s1, 0.0], [0.0, s2]]), rot(psi));
            for i in 0..2 {
                for j in 0..2 {
                    assert!((back[i][j] - m[i][j]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn zero_vector_is_valid() {
        for d in 3..=8 {
            let (sp, mp) = parameterize_free(d, &[0.0; FREE_DIM]).unwrap();
            assert!(sp.normalization_deficit(d).abs() < 1e-14);
            assert!(sp.max_constraint_residual(d) < 1e-14);
            assert!(mp.norm_residual() < 1e-15);
        }
    }

    #[test]
    fn round_trip() {
        let z = [
            0.1, -0.3, 0.7, 0.2, -0.5, 0.4, 0.9, -0.1, 0.3, 0.6, -1.1, 1.0, 0.4, -0.7,
        ];
        for d in 3..=6 {
            let (sp, mp) = parameterize_free(d, &z).unwrap();
            let back = free_from_params(d, &sp, &mp).unwrap();
            let (sp2, mp2) = parameterize_free(d, &back).unwrap();
            let a = sp.to_array();
            let b = sp2.to_array();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12, "d={d}");
            }
            assert!((mp.x1 - mp2.x1).abs() < 1e-14 && (mp.y1 - mp2.y1).abs() < 1e-14);
        }
    }

    #[test]
    fn wrong_length() {
        assert!(parameterize_free(4, &[0.0; 13]).is_err());
    }
}
