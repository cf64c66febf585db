use alloc::vec;
use alloc::vec::Vec;

use super::frame::{phi_vectors, x_vector, ThetaFrame};
use crate::linalg::{eigh, partial_transpose, rank_with_tol, BipartiteShape, Matrix};
use crate::{Error, Result};

/// Tolerance on the normalization condition when assembling a density matrix.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Parameter names in the order used by [`StateParams::to_array`].
pub const STATE_PARAM_NAMES: [&str; 20] = [
    "a00", "a01", "a10", "a11", "A", "b00", "b01", "b10", "b11", "B", "u0", "u0p", "u1", "u1p", "U", "v0",
    "v0p", "v1", "v1p", "V",
];

/// The twenty real parameters of the state family.
///
/// `ρ = |S0><S0| + |S1><S1| + Σ_k (|D0k><D0k| + |D1k><D1k|)` with
///
/// ```text
/// |S0>  = a00|0,0> + a01|0,1> + a10|1,0> + a11|1,1> + A|X>
/// |S1>  = b00|0,0> + b01|0,1> + b10|1,0> + b11|1,1> + B|X>
/// |D0k> = u0|0,k> + u0p|k,0> + u1|1,k> + u1p|k,1> + U|φ_k>
/// |D1k> = v0|0,k> + v0p|k,0> + v1|1,k> + v1p|k,1> + V|φ_k>
/// ```
///
/// At `d = 3` there are no `φ_k`, so `U` and `V` do not enter the state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[allow(non_snake_case)]
pub struct StateParams {
    pub a00: f64,
    pub a01: f64,
    pub a10: f64,
    pub a11: f64,
    pub A: f64,
    pub b00: f64,
    pub b01: f64,
    pub b10: f64,
    pub b11: f64,
    pub B: f64,
    pub u0: f64,
    pub u0p: f64,
    pub u1: f64,
    pub u1p: f64,
    pub U: f64,
    pub v0: f64,
    pub v0p: f64,
    pub v1: f64,
    pub v1p: f64,
    pub V: f64,
}

/// Weights of the four eigen-blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateSpectrumInfo {
    pub p_s0: f64,
    pub p_s1: f64,
    pub p_d0: f64,
    pub p_d1: f64,
}

impl StateSpectrumInfo {
    /// `p^S_0 + p^S_1 + (d-2)(p^D_0 + p^D_1)`
    pub fn total(&self, d: usize) -> f64 {
        self.p_s0 + self.p_s1 + (d - 2) as f64 * (self.p_d0 + self.p_d1)
    }
}

impl StateParams {
    pub fn to_array(&self) -> [f64; 20] {
        [
            self.a00, self.a01, self.a10, self.a11, self.A, self.b00, self.b01, self.b10, self.b11, self.B,
            self.u0, self.u0p, self.u1, self.u1p, self.U, self.v0, self.v0p, self.v1, self.v1p, self.V,
        ]
    }

    pub fn from_array(p: [f64; 20]) -> Self {
        StateParams {
            a00: p[0],
            a01: p[1],
            a10: p[2],
            a11: p[3],
            A: p[4],
            b00: p[5],
            b01: p[6],
            b10: p[7],
            b11: p[8],
            B: p[9],
            u0: p[10],
            u0p: p[11],
            u1: p[12],
            u1p: p[13],
            U: p[14],
            v0: p[15],
            v0p: p[16],
            v1: p[17],
            v1p: p[18],
            V: p[19],
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        StateParams::from_array(self.to_array().map(|v| v * s))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn probabilities(&self, d: usize) -> StateSpectrumInfo {
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let (u_big, v_big) = if d > 3 { (self.U, self.V) } else { (0.0, 0.0) };
        StateSpectrumInfo {
            p_s0: sq(&[self.a00, self.a01, self.a10, self.a11, self.A]),
            p_s1: sq(&[self.b00, self.b01, self.b10, self.b11, self.B]),
            p_d0: sq(&[self.u0, self.u0p, self.u1, self.u1p, u_big]),
            p_d1: sq(&[self.v0, self.v0p, self.v1, self.v1p, v_big]),
        }
    }

    /// `1 - (p^S_0 + p^S_1 + (d-2)(p^D_0 + p^D_1))`
    pub fn normalization_deficit(&self, d: usize) -> f64 {
        1.0 - self.probabilities(d).total(d)
    }

    /// Rescales every parameter so the normalization condition holds.
    pub fn normalized(&self, d: usize) -> Result<Self> {
        let total = self.probabilities(d).total(d);
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Normalization { deficit: 1.0 - total });
        }
        Ok(self.scaled(1.0 / libm::sqrt(total)))
    }

    /// Signed residuals `lhs - rhs` of the six partial-transpose invariance
    /// constraints, in order:
    ///
    /// ```text
    /// A² + B² = (d-2)/(d-3) (U² + V²)                (vacuous at d = 3)
    /// a00 a11 + b00 b11 = a01 a10 + b01 b10
    /// A a00 + B b00 = √(d-2) (u0 u0p + v0 v0p)
    /// A a01 + B b01 = √(d-2) (u0 u1p + v0 v1p)
    /// A a10 + B b10 = √(d-2) (u1 u0p + v1 v0p)
    /// A a11 + B b11 = √(d-2) (u1 u1p + v1 v1p)
    /// ```
    pub fn constraint_residuals(&self, d: usize) -> [f64; 6] {
        let s = self;
        let dd = d as f64;
        let r = libm::sqrt(dd - 2.0);
        let first = if d > 3 {
            s.A * s.A + s.B * s.B - (dd - 2.0) / (dd - 3.0) * (s.U * s.U + s.V * s.V)
        } else {
            0.0
        };
        [
            first,
            s.a00 * s.a11 + s.b00 * s.b11 - s.a01 * s.a10 - s.b01 * s.b10,
            s.A * s.a00 + s.B * s.b00 - r * (s.u0 * s.u0p + s.v0 * s.v0p),
            s.A * s.a01 + s.B * s.b01 - r * (s.u0 * s.u1p + s.v0 * s.v1p),
            s.A * s.a10 + s.B * s.b10 - r * (s.u1 * s.u0p + s.v1 * s.v0p),
            s.A * s.a11 + s.B * s.b11 - r * (s.u1 * s.u1p + s.v1 * s.v1p),
        ]
    }

    pub fn max_constraint_residual(&self, d: usize) -> f64 {
        self.constraint_residuals(d)
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

/// Unnormalized eigen-vectors of the state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVectors {
    pub s0: Vec<f64>,
    pub s1: Vec<f64>,
    /// `|D_{0k}>` for `k = 2..d-1`.
    pub d0: Vec<Vec<f64>>,
    /// `|D_{1k}>` for `k = 2..d-1`.
    pub d1: Vec<Vec<f64>>,
}

impl StateVectors {
    /// The four block operators `Ŝ0, Ŝ1, D̂0, D̂1`.
    pub fn blocks(&self) -> [Matrix; 4] {
        let n = self.s0.len();
        let sum = |vs: &[Vec<f64>]| {
            let mut m = Matrix::zeros(n, n);
            for v in vs {
                m.add_scaled(1.0, &Matrix::projector(v));
            }
            m
        };
        [
            Matrix::projector(&self.s0),
            Matrix::projector(&self.s1),
            sum(&self.d0),
            sum(&self.d1),
        ]
    }
}

pub fn build_state_vectors(sp: &StateParams, frame: &ThetaFrame) -> Result<StateVectors> {
    let d = frame.d();
    let x = x_vector(d);
    let phis = if d > 3 { Some(phi_vectors(frame)?) } else { None };
    let at = |j: usize, k: usize| j * d + k;
    let s_vec = |c: [f64; 4], big: f64| {
        let mut v: Vec<f64> = x.iter().map(|xi| big * xi).collect();
        v[at(0, 0)] += c[0];
        v[at(0, 1)] += c[1];
        v[at(1, 0)] += c[2];
        v[at(1, 1)] += c[3];
        v
    };
    let d_vecs = |c: [f64; 4], big: f64| {
        (2..d)
            .map(|k| {
                let mut v = match &phis {
                    Some(p) => p[k - 2].iter().map(|pi| big * pi).collect(),
                    None => vec![0.0; d * d],
                };
                v[at(0, k)] += c[0];
                v[at(k, 0)] += c[1];
                v[at(1, k)] += c[2];
                v[at(k, 1)] += c[3];
                v
            })
            .collect()
    };
    Ok(StateVectors {
        s0: s_vec([sp.a00, sp.a01, sp.a10, sp.a11], sp.A),
        s1: s_vec([sp.b00, sp.b01, sp.b10, sp.b11], sp.B),
        d0: d_vecs([sp.u0, sp.u0p, sp.u1, sp.u1p], sp.U),
        d1: d_vecs([sp.v0, sp.v0p, sp.v1, sp.v1p], sp.V),
    })
}

/// Dense real symmetric operator on a bipartite space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    shape: BipartiteShape,
    matrix: Matrix,
}

impl DensityMatrix {
    pub fn new(shape: BipartiteShape, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != shape.total() || matrix.cols() != shape.total() {
            return Err(Error::Dimension {
                context: "density matrix",
                expected: shape.total(),
                found: matrix.rows(),
            });
        }
        let asym = matrix.symmetry_residual();
        if asym > 1e-10 {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(DensityMatrix {
            shape,
            matrix: matrix.symmetrized(),
        })
    }

    pub fn shape(&self) -> BipartiteShape {
        self.shape
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn partial_transpose(&self) -> Matrix {
        partial_transpose(&self.matrix, self.shape).expect("shape checked at construction")
    }

    /// `max |ρ^{T_B} - ρ|`
    pub fn ppt_residual(&self) -> f64 {
        (&self.partial_transpose() - &self.matrix).max_abs()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(&self.matrix)?.min())
    }

    pub fn min_eigenvalue_pt(&self) -> Result<f64> {
        Ok(eigh(&self.partial_transpose())?.min())
    }

    pub fn rank(&self, tol: f64) -> Result<usize> {
        rank_with_tol(&self.matrix, tol)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigh(&self.matrix)?.eigenvalues)
    }
}

/// `ρ = Ŝ0 + Ŝ1 + D̂0 + D̂1` on the `d × d` space.
pub fn assemble_density(d: usize, sp: &StateParams) -> Result<DensityMatrix> {
    let deficit = sp.normalization_deficit(d);
    if !(deficit.abs() <= NORMALIZATION_TOL) {
        return Err(Error::Normalization { deficit });
    }
    let frame = ThetaFrame::new(d)?;
    let blocks = build_state_vectors(sp, &frame)?.blocks();
    let n = d * d;
    let mut rho = Matrix::zeros(n, n);
    for b in &blocks {
        rho.add_scaled(1.0, b);
    }
    DensityMatrix::new(BipartiteShape::square(d)?, rho)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Sign::Plus => v,
            Sign::Minus => -v,
        }
    }
}

/// Independent parameters of a state in the gauge `B = V = 0`.
///
/// `A` follows from `U`, the `a_ij` from `A`, and `b10` from the `a00 a11`
/// constraint. At `d = 3` `A` is not fixed by the constraints and is taken from
/// `a_d3`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[allow(non_snake_case)]
pub struct FreeStateParams {
    pub u0: f64,
    pub u0p: f64,
    pub u1: f64,
    pub u1p: f64,
    pub U: f64,
    pub v0: f64,
    pub v0p: f64,
    pub v1: f64,
    pub v1p: f64,
    pub b00: f64,
    pub b01: f64,
    pub b11: f64,
    /// Value of `A` at `d = 3`; ignored otherwise.
    pub a_d3: f64,
    /// Sign of `A` at `d > 3`.
    pub a_sign: Sign,
}

const DEGENERATE: f64 = 1e-14;

/// Solves the invariance constraints for the dependent parameters. The result
/// is not normalized; use [`StateParams::normalized`].
pub fn solve_constraints(d: usize, free: &FreeStateParams) -> Result<StateParams> {
    if d < 3 {
        return Err(Error::domain("the state family needs d >= 3"));
    }
    let dd = d as f64;
    let f = free;
    let (big_a, big_u) = if d > 3 {
        let a = libm::sqrt((dd - 2.0) / (dd - 3.0)) * f.U.abs();
        (f.a_sign.apply(a), f.U)
    } else {
        (f.a_d3, 0.0)
    };
    let r = libm::sqrt(dd - 2.0);
    let rhs = [
        r * (f.u0 * f.u0p + f.v0 * f.v0p),
        r * (f.u0 * f.u1p + f.v0 * f.v1p),
        r * (f.u1 * f.u0p + f.v1 * f.v0p),
        r * (f.u1 * f.u1p + f.v1 * f.v1p),
    ];
    let a = if big_a.abs() > DEGENERATE {
        rhs.map(|v| v / big_a)
    } else if rhs.iter().all(|v| v.abs() <= DEGENERATE) {
        [0.0; 4]
    } else {
        return Err(Error::Infeasible(alloc::format!(
            "A = 0 but the u/v products do not vanish (max {:e})",
            rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        )));
    };
    let [a00, a01, a10, a11] = a;
    // a00 a11 + b00 b11 = a01 a10 + b01 b10
    let need = a00 * a11 + f.b00 * f.b11 - a01 * a10;
    let b10 = if f.b01.abs() > DEGENERATE {
        need / f.b01
    } else if need.abs() <= DEGENERATE {
        0.0
    } else {
        return Err(Error::Infeasible(
            "b01 = 0 leaves the a00 a11 constraint unsatisfiable".into(),
        ));
    };
    Ok(StateParams {
        a00,
        a01,
        a10,
        a11,
        A: big_a,
        b00: f.b00,
        b01: f.b01,
        b10,
        b11: f.b11,
        B: 0.0,
        u0: f.u0,
        u0p: f.u0p,
        u1: f.u1,
        u1p: f.u1p,
        U: big_u,
        v0: f.v0,
        v0p: f.v0p,
        v1: f.v1,
        v1p: f.v1p,
        V: 0.0,
    })
}

fn check_orthogonal(o: &[[f64; 2]; 2]) -> Result<()> {
    let m = Matrix::from_vec(2, 2, vec![o[0][0], o[0][1], o[1][0], o[1][1]])?;
    let resid = (&(&m.transpose() * &m) - &Matrix::identity(2)).max_abs();
    if resid > 1e-12 {
        return Err(Error::domain(alloc::format!(
            "gauge matrix is not orthogonal (residual {resid:e})"
        )));
    }
    Ok(())
}

/// Replaces `(S0, S1)` by `o_s (S0, S1)` and `(D0k, D1k)` by `o_d (D0k, D1k)`.
/// The density matrix does not change.
pub fn apply_gauge(sp: &StateParams, o_s: &[[f64; 2]; 2], o_d: &[[f64; 2]; 2]) -> Result<StateParams> {
    check_orthogonal(o_s)?;
    check_orthogonal(o_d)?;
    let p = sp.to_array();
    let mut out = p;
    for i in 0..5 {
        out[i] = o_s[0][0] * p[i] + o_s[0][1] * p[5 + i];
        out[5 + i] = o_s[1][0] * p[i] + o_s[1][1] * p[5 + i];
        out[10 + i] = o_d[0][0] * p[10 + i] + o_d[0][1] * p[15 + i];
        out[15 + i] = o_d[1][0] * p[10 + i] + o_d[1][1] * p[15 + i];
    }
    Ok(StateParams::from_array(out))
}

/// Rotation `[[c, s], [-s, c]]` that maps `(p, q)` to `(√(p² + q²), 0)`.
pub fn zeroing_rotation(p: f64, q: f64) -> [[f64; 2]; 2] {
    let r = libm::hypot(p, q);
    if r == 0.0 {
        return [[1.0, 0.0], [0.0, 1.0]];
    }
    let (c, s) = (p / r, q / r);
    [[c, s], [-s, c]]
}

/// Uses the gauge freedom to set `B = V = 0` with `A, U ≥ 0`.
pub fn gauge_fix(sp: &StateParams) -> StateParams {
    let o_s = zeroing_rotation(sp.A, sp.B);
    let o_d = zeroing_rotation(sp.U, sp.V);
    apply_gauge(sp, &o_s, &o_d).expect("rotations are orthogonal")
}
