//! Closed-form quantum value of the family, the reduced parametrization and
//! its large-`d` law.
//!
//! The value splits into one contribution per eigen-block of the state:
//! `Q = Q_S0 + Q_S1 + Q_D0 + Q_D1`. The `S1` and `D1` terms reuse the `S0`
//! and `D0` formulas with the `b` and `v` parameters.

use crate::model::{MeasurementParams, StateParams};
use crate::{Error, Result};

/// The four block contributions and the auxiliary `F`, `G` quantities.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ViolationBreakdown {
    pub q_s0: f64,
    pub q_s1: f64,
    pub q_d0: f64,
    pub q_d1: f64,
    pub f0: f64,
    pub g0: f64,
    pub f1: f64,
    pub g1: f64,
    pub total: f64,
}

/// Contribution of a `D` block together with its `F` and `G`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DContribution {
    pub value: f64,
    pub f: f64,
    pub g: f64,
}

/// `Q_S(d)` for `|S> = a00|0,0> + a01|0,1> + a10|1,0> + a11|1,1> + A|X>`.
///
/// `a = [a00, a01, a10, a11]`.
pub fn q_s0(d: usize, a: [f64; 4], big_a: f64, mp: &MeasurementParams) -> f64 {
    let dd = d as f64;
    let [a00, a01, a10, a11] = a;
    let mix = mp.x0 * mp.y0 * a00 + mp.x0 * mp.y1 * a01 + mp.x1 * mp.y0 * a10 + mp.x1 * mp.y1 * a11
        - mp.x2 * big_a / (dd - 2.0);
    let bob = mp.y0 * a01 - mp.y1 * a00;
    let alice = mp.x0 * a00 + mp.x1 * a10;
    (dd - 2.0) * (a00 * a00 - bob * bob) - (dd - 2.0) * mix * mix
        + (dd - 1.0) * (alice * alice - a00 * a00 - a10 * a10)
}

/// `Q_D(d)` for `|D_k> = u0|0,k> + u0p|k,0> + u1|1,k> + u1p|k,1> + U|φ_k>`.
///
/// `u = [u0, u0p, u1, u1p]`. At `d = 3` the `U` terms are absent.
pub fn q_d0(d: usize, u: [f64; 4], big_u: f64, mp: &MeasurementParams) -> DContribution {
    let dd = d as f64;
    let [u0, u0p, u1, u1p] = u;
    let shift = if d > 3 {
        mp.x2 * big_u / libm::sqrt(dd - 3.0)
    } else {
        0.0
    };
    let f = libm::sqrt(dd - 2.0) * (mp.x0 * u0 + mp.x1 * u1) - shift;
    let g = mp.x2 * (mp.y0 * u0p + mp.y1 * u1p) - shift;
    let value =
        2.0 * f * g - (dd - 2.0) * (f * f + g * g) - (dd - 1.0) * u0p * u0p * (dd - 2.0 - mp.x2 * mp.x2);
    DContribution { value, f, g }
}

/// Quantum value `tr(ρ B̂)` of the family in closed form.
pub fn quantum_value_analytic(d: usize, sp: &StateParams, mp: &MeasurementParams) -> ViolationBreakdown {
    let q_s0v = q_s0(d, [sp.a00, sp.a01, sp.a10, sp.a11], sp.A, mp);
    let q_s1v = q_s0(d, [sp.b00, sp.b01, sp.b10, sp.b11], sp.B, mp);
    let dd0 = q_d0(d, [sp.u0, sp.u0p, sp.u1, sp.u1p], sp.U, mp);
    let dd1 = q_d0(d, [sp.v0, sp.v0p, sp.v1, sp.v1p], sp.V, mp);
    ViolationBreakdown {
        q_s0: q_s0v,
        q_s1: q_s1v,
        q_d0: dd0.value,
        q_d1: dd1.value,
        f0: dd0.f,
        g0: dd0.g,
        f1: dd1.f,
        g1: dd1.g,
        total: q_s0v + q_s1v + dd0.value + dd1.value,
    }
}

/// Free parameters of the reduced solution.
///
/// Everything else follows: Bob uses the Yu–Oh settings, `u1, u1p` make
/// `F0 = G0 = 0`, `v1` makes `F1 = 0`, the `b00/b11` ratio balances the two
/// negative `S1` terms and `v0p` makes `Q` stationary.
#[derive(Clone, Copy, Debug, PartialEq)]
#[allow(non_snake_case)]
pub struct ReducedParams {
    pub x0: f64,
    pub x1: f64,
    pub U: f64,
    pub v0: f64,
}

/// Which sign of `x0 x1 b00 b11` the reduced solution uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CrossTermSign {
    #[default]
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedSolution {
    /// Quantum value of the normalized state.
    pub value: f64,
    /// Normalized state parameters.
    pub state: StateParams,
    pub measurements: MeasurementParams,
    /// Contributions for the normalized state.
    pub breakdown: ViolationBreakdown,
}

fn reduced_chain(d: usize, rp: &ReducedParams, v0p: f64) -> (StateParams, MeasurementParams) {
    let dd = d as f64;
    let ReducedParams { x0, x1, U: u, v0 } = *rp;
    let x2 = libm::sqrt((1.0 - x0 * x0 - x1 * x1).max(0.0));
    let [y0, y1] = MeasurementParams::yu_oh_bob(d);
    let u1 = x2 * u / (x1 * libm::sqrt((dd - 2.0) * (dd - 3.0)));
    let u1p = -u * libm::sqrt(dd / (dd - 3.0));
    let v1 = -x0 * v0 / x1;
    let big_a = libm::sqrt((dd - 2.0) / (dd - 3.0)) * u;
    let r = libm::sqrt(dd - 2.0);
    let a11 = r * u1 * u1p / big_a;
    let a00 = r * v0 * v0p / big_a;
    let a10 = r * v1 * v0p / big_a;
    // b00 b11 = -a00 a11, with the ratio that equalizes the negative S1 terms
    let prod = -a00 * a11;
    let ratio = libm::sqrt((dd - 2.0) / (2.0 * (dd - 1.0))) * x1.abs() / libm::sqrt(1.0 - x0 * x0);
    let b11 = libm::sqrt(prod.abs() / ratio);
    let b00 = prod.signum() * libm::sqrt(prod.abs() * ratio);
    let sp = StateParams {
        a00,
        a10,
        a11,
        A: big_a,
        b00,
        b11,
        u1,
        u1p,
        U: u,
        v0,
        v0p,
        v1,
        ..StateParams::default()
    };
    let mp = MeasurementParams { x0, x1, x2, y0, y1 };
    (sp, mp)
}

/// The reduced solution with the default sign convention.
pub fn reduced_solution(d: usize, rp: &ReducedParams) -> Result<ReducedSolution> {
    reduced_solution_with_sign(d, rp, CrossTermSign::Positive)
}

pub fn reduced_solution_with_sign(
    d: usize,
    rp: &ReducedParams,
    sign: CrossTermSign,
) -> Result<ReducedSolution> {
    if d < 4 {
        return Err(Error::domain("the reduced solution needs d >= 4"));
    }
    if rp.x1 == 0.0 {
        return Err(Error::domain("the reduced solution divides by x1"));
    }
    if rp.U == 0.0 {
        return Err(Error::domain("the reduced solution divides by U"));
    }
    if !(rp.x0 * rp.x0 + rp.x1 * rp.x1 <= 1.0) || rp.x0 * rp.x0 >= 1.0 {
        return Err(Error::domain("x0² + x1² must lie in (0, 1]"));
    }
    // Q(v0p) = lin |v0p| - quad v0p² on each sign branch
    let branch = [1.0, -1.0]
        .into_iter()
        .find(|&sg| {
            let (sp, mp) = reduced_chain(d, rp, sg);
            let cross = mp.x0 * mp.x1 * sp.b00 * sp.b11;
            match sign {
                CrossTermSign::Positive => cross > 0.0,
                CrossTermSign::Negative => cross < 0.0,
            }
        })
        .unwrap_or(1.0);
    let (sp1, mp1) = reduced_chain(d, rp, branch);
    let bd1 = quantum_value_analytic(d, &sp1, &mp1);
    let lin = bd1.q_s1;
    let quad = -(bd1.q_s0 + bd1.q_d1);
    let v0p = if lin > 0.0 && quad > 0.0 {
        branch * lin / (2.0 * quad)
    } else {
        0.0
    };
    let (sp, mp) = reduced_chain(d, rp, v0p);
    let state = sp.normalized(d)?;
    let breakdown = quantum_value_analytic(d, &state, &mp);
    Ok(ReducedSolution {
        value: breakdown.total,
        state,
        measurements: mp,
        breakdown,
    })
}

pub fn reduced_solution_value(d: usize, rp: &ReducedParams) -> Result<f64> {
    Ok(reduced_solution(d, rp)?.value)
}

/// Leading constant of the large-`d` law, rounded to four figures.
pub const ROUNDED_LEADING: f64 = 0.01686;
/// Correction constant of the large-`d` law, rounded to four figures.
pub const ROUNDED_CORRECTION: f64 = 6.118;

/// Large-`d` optimum of the reduced solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticParams {
    /// `z = U² d`, the real root of `4z³ - 8z² + 6z - 1`.
    pub z: f64,
    pub x0sq: f64,
    pub x1sq: f64,
    pub x2sq: f64,
}

fn cubic(z: f64) -> f64 {
    ((4.0 * z - 8.0) * z + 6.0) * z - 1.0
}

/// Root by bisection on `[0, 0.5]` followed by Newton polishing.
pub fn asymptotic_params() -> AsymptoticParams {
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if cubic(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..50 {
        let step = cubic(z) / ((12.0 * z - 16.0) * z + 6.0);
        let next = z - step;
        // stay inside the bracket
        z = if next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if step.abs() < 1e-14 {
            break;
        }
    }
    let w = libm::sqrt(z * (1.0 - z));
    let den = 2.0 * (1.0 - 2.0 * z);
    let x0sq = (w - z) / den;
    let x1sq = (1.0 - z - w) / den;
    AsymptoticParams {
        z,
        x0sq,
        x1sq,
        x2sq: 0.5,
    }
}

impl AsymptoticParams {
    pub fn cubic_residual(&self) -> f64 {
        cubic(self.z)
    }

    /// `z - x0²/(x1² - x0²) (√((x1² + x0²)/(2 x0²)) - 1)`, the stationary
    /// point in `z` of the large-`d` law at fixed `x`.
    pub fn fixed_point_residual(&self) -> f64 {
        let (a, b) = (self.x0sq, self.x1sq);
        self.z - a / (b - a) * (libm::sqrt((b + a) / (2.0 * a)) - 1.0)
    }

    /// `x1² x2² (1 - 2z) z / (1 + (x1² - x0²) z / x0²)`
    pub fn leading_constant(&self) -> f64 {
        let z = self.z;
        self.x1sq * self.x2sq * (1.0 - 2.0 * z) * z / (1.0 + (self.x1sq - self.x0sq) * z / self.x0sq)
    }

    /// `√(8 (1 - x0²)) / x0`
    pub fn correction_constant(&self) -> f64 {
        libm::sqrt(8.0 * (1.0 - self.x0sq)) / libm::sqrt(self.x0sq)
    }

    /// `(0.01686 / d²)(1 - 6.118 / √d)`
    pub fn q_approx(&self, d: f64) -> f64 {
        ROUNDED_LEADING / (d * d) * (1.0 - ROUNDED_CORRECTION / libm::sqrt(d))
    }

    /// Same law with constants computed from `z` and the `x²` values.
    pub fn q_approx_rebuilt(&self, d: f64) -> f64 {
        self.leading_constant() / (d * d) * (1.0 - self.correction_constant() / libm::sqrt(d))
    }

    /// Seed for the reduced solution at dimension `d`, from the large-`d`
    /// relations `U² d = z` and `2U² + (x0² + x1²)/x1² v0² = 1/d`.
    pub fn reduced_seed(&self, d: usize) -> ReducedParams {
        let dd = d as f64;
        let u = libm::sqrt(self.z / dd);
        let v0sq = (1.0 / dd - 2.0 * u * u) * self.x1sq / (self.x0sq + self.x1sq);
        ReducedParams {
            x0: libm::sqrt(self.x0sq),
            x1: libm::sqrt(self.x1sq),
            U: u,
            v0: libm::sqrt(v0sq.max(1e-12)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(x: [f64; 3], y: [f64; 2]) -> MeasurementParams {
        MeasurementParams::new(x, y).unwrap()
    }

    #[test]
    fn q_s0_examples() {
        let m = mp([1.0, 0.0, 0.0], [1.0, 0.0]);
        assert_eq!(q_s0(5, [0.0; 4], 0.0, &m), 0.0);
        // (d-2)[1 - 0] - (d-2)[1]² + (d-1)[1 - 1] = 0
        assert_eq!(q_s0(5, [1.0, 0.0, 0.0, 0.0], 0.0, &m), 0.0);
    }

    #[test]
    fn q_d0_examples() {
        let m = mp([0.6, 0.8, 0.0], [1.0, 0.0]);
        let z = q_d0(4, [0.0; 4], 0.0, &m);
        assert_eq!((z.value, z.f, z.g), (0.0, 0.0, 0.0));
        // x = |θ> direction only, d = 4: F = -U and G = u1p - U, so U = -1 gives F = G = 1
        let m = mp([0.0, 0.0, 1.0], [0.0, 1.0]);
        let c = q_d0(4, [0.0, 0.0, 0.0, 0.0], -1.0, &m);
        assert!((c.f - 1.0).abs() < 1e-15 && (c.g - 1.0).abs() < 1e-15);
        assert!((c.value + 2.0).abs() < 1e-15);
    }

    #[test]
    fn q_d0_never_positive() {
        let mut seed = 99u64;
        let mut next = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for d in 3..=12 {
            for _ in 0..200 {
                let m = MeasurementParams::from_angles(3.0 * next(), 3.0 * next(), 3.0 * next());
                let c = q_d0(d, [next(), next(), next(), next()], next(), &m);
                assert!(c.value <= 1e-14, "d={d}: {}", c.value);
            }
        }
    }

    #[test]
    fn cubic_root_and_constants() {
        let a = asymptotic_params();
        // Cardano's closed form as an independent oracle
        let s = libm::sqrt(33.0);
        let closed = (4.0 + libm::cbrt(3.0 * s - 17.0) - libm::cbrt(3.0 * s + 17.0)) / 6.0;
        assert!((a.z - closed).abs() < 1e-14);
        assert!(a.cubic_residual().abs() < 1e-12);
        assert!((a.z - 0.2282).abs() < 1e-4);
        assert_eq!(a.x2sq, 0.5);
        assert!((a.x0sq + a.x1sq + a.x2sq - 1.0).abs() < 1e-12);
        assert!(a.fixed_point_residual().abs() < 1e-10);
        assert!((a.leading_constant() / ROUNDED_LEADING - 1.0).abs() < 5e-4);
        assert!((a.correction_constant() / ROUNDED_CORRECTION - 1.0).abs() < 5e-4);
    }

    #[test]
    fn q_approx_sign_change() {
        let a = asymptotic_params();
        for d in 4..=37 {
            assert!(a.q_approx(d as f64) <= 0.0, "d={d}");
        }
        assert!(a.q_approx(38.0) > 0.0);
    }

    #[test]
    fn reduced_chain_relations() {
        let a = asymptotic_params();
        for d in [5usize, 20, 100, 1000] {
            let rp = a.reduced_seed(d);
            let (sp, mp) = reduced_chain(d, &rp, 0.01);
            let bd = quantum_value_analytic(d, &sp, &mp);
            assert!(bd.f0.abs() < 1e-12 && bd.g0.abs() < 1e-12);
            assert!(bd.q_d0.abs() < 1e-14);
            assert!(bd.f1.abs() < 1e-12);
            assert!(sp.max_constraint_residual(d) < 1e-12);
        }
    }

    #[test]
    fn reduced_stationarity() {
        let a = asymptotic_params();
        for d in [40usize, 200, 1000] {
            let rp = a.reduced_seed(d);
            let sol = reduced_solution(d, &rp).unwrap();
            let b = sol.breakdown;
            let scale = b.q_s1.abs();
            assert!(sol.value > 0.0);
            assert!((2.0 * b.q_d1 + 2.0 * b.q_s0 + b.q_s1).abs() <= 1e-10 * scale.max(1e-300) + 1e-16);
            assert!((sol.value - 0.5 * b.q_s1).abs() <= 1e-10 * scale);
            assert!(sol.state.max_constraint_residual(d) < 1e-12);
            assert!(sol.state.normalization_deficit(d).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_rejects_zero_x1() {
        let rp = ReducedParams {
            x0: 0.5,
            x1: 0.0,
            U: 0.1,
            v0: 0.1,
        };
        assert!(matches!(reduced_solution(6, &rp), Err(Error::Domain(_))));
    }
}
