use alloc::vec;
use alloc::vec::Vec;

use super::frame::ThetaFrame;
use crate::bell::{Behavior, BellFunctional, Scenario};
use crate::linalg::{basis, eigh, kron, BipartiteShape, Matrix};
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// Direction parameters of the measurement family.
///
/// Alice's outcome-zero vectors are `x0|0> + x1|1> + x2|θ_p>`; Bob's `d`-outcome
/// basis is built from `(y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementParams {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub y0: f64,
    pub y1: f64,
}

impl MeasurementParams {
    pub fn new(x: [f64; 3], y: [f64; 2]) -> Result<Self> {
        let mp = MeasurementParams {
            x0: x[0],
            x1: x[1],
            x2: x[2],
            y0: y[0],
            y1: y[1],
        };
        mp.validate()?;
        Ok(mp)
    }

    /// `x = (cos α, sin α cos β, sin α sin β)`, `y = (cos γ, sin γ)`.
    pub fn from_angles(alpha: f64, beta: f64, gamma: f64) -> Self {
        let (sa, ca) = libm::sincos(alpha);
        let (sb, cb) = libm::sincos(beta);
        let (sg, cg) = libm::sincos(gamma);
        MeasurementParams {
            x0: ca,
            x1: sa * cb,
            x2: sa * sb,
            y0: cg,
            y1: sg,
        }
    }

    /// Inverse of [`from_angles`](Self::from_angles), with `α ∈ [0, π]`.
    pub fn angles(&self) -> [f64; 3] {
        [
            libm::acos(self.x0.clamp(-1.0, 1.0)),
            libm::atan2(self.x2, self.x1),
            libm::atan2(self.y1, self.y0),
        ]
    }

    /// Bob's settings of Yu and Oh: `y0 = √((d-1)/d)`, `y1 = -1/√d`.
    pub fn yu_oh_bob(d: usize) -> [f64; 2] {
        let dd = d as f64;
        [libm::sqrt((dd - 1.0) / dd), -1.0 / libm::sqrt(dd)]
    }

    /// Largest deviation of `|x|²` and `|y|²` from one.
    pub fn norm_residual(&self) -> f64 {
        let nx = self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2;
        let ny = self.y0 * self.y0 + self.y1 * self.y1;
        (nx - 1.0).abs().max((ny - 1.0).abs())
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.norm_residual();
        if !(r <= UNIT_TOL) {
            return Err(Error::domain(alloc::format!(
                "measurement directions are not unit vectors (residual {r:e})"
            )));
        }
        Ok(())
    }
}

/// Measurement operators of both parties on a bipartite space.
///
/// `alice[x][a]` is Alice's effect for outcome `a` of setting `x`; likewise
/// for Bob. General POVMs are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    shape: BipartiteShape,
    alice: Vec<Vec<Matrix>>,
    bob: Vec<Vec<Matrix>>,
}

impl MeasurementSet {
    pub fn new(shape: BipartiteShape, alice: Vec<Vec<Matrix>>, bob: Vec<Vec<Matrix>>) -> Result<Self> {
        let fits =
            |ops: &[Vec<Matrix>], n: usize| ops.iter().flatten().all(|m| m.rows() == n && m.cols() == n);
        if !fits(&alice, shape.dim_a) || !fits(&bob, shape.dim_b) {
            return Err(Error::domain(
                "measurement operator size does not match the shape",
            ));
        }
        if alice.is_empty() || bob.is_empty() || alice.iter().chain(&bob).any(|s| s.is_empty()) {
            return Err(Error::domain("every setting needs at least one outcome"));
        }
        Ok(MeasurementSet { shape, alice, bob })
    }

    pub fn shape(&self) -> BipartiteShape {
        self.shape
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            alice: self.alice.iter().map(Vec::len).collect(),
            bob: self.bob.iter().map(Vec::len).collect(),
        }
    }

    pub fn alice(&self, x: usize, a: usize) -> &Matrix {
        &self.alice[x][a]
    }

    pub fn bob(&self, y: usize, b: usize) -> &Matrix {
        &self.bob[y][b]
    }

    pub fn alice_setting(&self, x: usize) -> &[Matrix] {
        &self.alice[x]
    }

    pub fn bob_setting(&self, y: usize) -> &[Matrix] {
        &self.bob[y]
    }

    pub fn set_alice_setting(&mut self, x: usize, ops: Vec<Matrix>) {
        debug_assert_eq!(ops.len(), self.alice[x].len());
        self.alice[x] = ops;
    }

    pub fn set_bob_setting(&mut self, y: usize, ops: Vec<Matrix>) {
        debug_assert_eq!(ops.len(), self.bob[y].len());
        self.bob[y] = ops;
    }

    /// Largest deviation of any setting's effects from summing to identity.
    pub fn completeness_residual(&self) -> f64 {
        let side = |ops: &[Vec<Matrix>], n: usize| {
            ops.iter()
                .map(|setting| {
                    let mut s = Matrix::identity(n).scaled(-1.0);
                    for m in setting {
                        s.add_scaled(1.0, m);
                    }
                    s.max_abs()
                })
                .fold(0.0f64, f64::max)
        };
        side(&self.alice, self.shape.dim_a).max(side(&self.bob, self.shape.dim_b))
    }

    /// Smallest eigenvalue over all effects.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut min = f64::INFINITY;
        for m in self.alice.iter().chain(&self.bob).flatten() {
            min = min.min(eigh(m)?.min());
        }
        Ok(min)
    }

    /// Largest `|E_i E_j - δ_ij E_i|` over pairs of effects within a setting.
    pub fn projectivity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for setting in self.alice.iter().chain(&self.bob) {
            for (i, ei) in setting.iter().enumerate() {
                for (j, ej) in setting.iter().enumerate() {
                    let mut p = ei * ej;
                    if i == j {
                        p.add_scaled(-1.0, ei);
                    }
                    worst = worst.max(p.max_abs());
                }
            }
        }
        worst
    }
}

/// Vectors defining the von Neumann measurements of the family.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementVectors {
    /// `|A_{0|q}>`, `q = 0..d-1`.
    pub alice: Vec<Vec<f64>>,
    /// `|B_{q|0}>`, `q = 0..d-1`.
    pub bob_d_outcome: Vec<Vec<f64>>,
    /// `|B_{0|1}> = |0>`.
    pub bob_binary: Vec<f64>,
}

pub fn measurement_vectors(frame: &ThetaFrame, mp: &MeasurementParams) -> MeasurementVectors {
    let d = frame.d();
    let e0 = basis(d, 0);
    let e1 = basis(d, 1);
    let mut alice = vec![e0.clone()];
    for t in frame.thetas() {
        alice.push(
            (0..d)
                .map(|i| mp.x0 * e0[i] + mp.x1 * e1[i] + mp.x2 * t[i])
                .collect(),
        );
    }
    let norm = 1.0 / libm::sqrt((d - 1) as f64);
    let root = libm::sqrt((d - 2) as f64);
    let mut bob_d_outcome = vec![(0..d).map(|i| -mp.y1 * e0[i] + mp.y0 * e1[i]).collect()];
    for t in frame.thetas() {
        bob_d_outcome.push(
            (0..d)
                .map(|i| norm * (mp.y0 * e0[i] + mp.y1 * e1[i] + root * t[i]))
                .collect(),
        );
    }
    MeasurementVectors {
        alice,
        bob_d_outcome,
        bob_binary: e0,
    }
}

/// Operators of the family: Alice has `d` binary projective settings, Bob one
/// `d`-outcome and one binary projective setting.
pub fn build_measurements(d: usize, mp: &MeasurementParams) -> Result<MeasurementSet> {
    mp.validate()?;
    let frame = ThetaFrame::new(d)?;
    let v = measurement_vectors(&frame, mp);
    let id = Matrix::identity(d);
    let binary = |vec: &[f64]| {
        let p = Matrix::projector(vec);
        let q = &id - &p;
        vec![p, q]
    };
    let alice = v.alice.iter().map(|a| binary(a)).collect();
    let bob = vec![
        v.bob_d_outcome.iter().map(|b| Matrix::projector(b)).collect(),
        binary(&v.bob_binary),
    ];
    MeasurementSet::new(BipartiteShape::square(d)?, alice, bob)
}

/// `Σ w(x,y,a,b) A_{a|x} ⊗ B_{b|y}`.
pub fn bell_operator(f: &BellFunctional, ms: &MeasurementSet) -> Result<Matrix> {
    if f.scenario() != &ms.scenario() {
        return Err(Error::domain(
            "measurements do not match the functional's scenario",
        ));
    }
    let n = ms.shape.total();
    let mut out = Matrix::zeros(n, n);
    for (c, w) in f.terms() {
        out.add_scaled(w, &kron(ms.alice(c.x, c.a), ms.bob(c.y, c.b)));
    }
    Ok(out.symmetrized())
}

/// `p(ab|xy) = tr[ρ (A_{a|x} ⊗ B_{b|y})]`.
pub fn behavior(rho: &Matrix, ms: &MeasurementSet) -> Result<Behavior> {
    let shape = ms.shape;
    if rho.rows() != shape.total() || rho.cols() != shape.total() {
        return Err(Error::Dimension {
            context: "state does not match the measurements",
            expected: shape.total(),
            found: rho.rows(),
        });
    }
    let scenario = ms.scenario();
    // reduce once per Bob effect, then pair with Alice's effects
    let reduced: Vec<Vec<Matrix>> = ms
        .bob
        .iter()
        .map(|setting| {
            setting
                .iter()
                .map(|b| crate::linalg::reduce_to_a(rho, shape, b))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(Behavior::from_fn(&scenario, |c| {
        ms.alice(c.x, c.a).dot(&reduced[c.y][c.b])
    }))
}
