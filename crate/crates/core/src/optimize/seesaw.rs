//! Seesaw maximization over PPT states and general measurements.
//!
//! Each cycle optimizes the state for fixed measurements (an SDP over unit
//! trace `ρ ⪰ 0`, `ρ^{T_B} ⪰ 0`), then every party's settings for the fixed
//! rest. Binary settings have a closed-form optimum, the projector onto the
//! positive eigenspace of `K_0 - K_1`; settings with more outcomes are an
//! SDP over POVMs. A step is kept only if it does not lower the value.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::family::Diagnostics;
use super::sdp::{sdp_solve_best_effort, SdpProblem, SymSparse};
use super::{stream_key, stream_rng, Purpose};
use crate::bell::{make_id, BellFunctional};
use crate::linalg::{
    eigh, partial_transpose, positive_eigenspace_projector, reduce_to_a, reduce_to_b, BipartiteShape, Matrix,
    PROJECTOR_TOL,
};
use crate::model::{bell_operator, build_measurements, DensityMatrix, MeasurementParams, MeasurementSet};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeesawConfig {
    pub restarts: usize,
    /// Cycle cap of a single restart.
    pub max_cycles: usize,
    /// Stop when a full cycle gains at most `tol_rel |value| + tol_abs`.
    pub tol_rel: f64,
    pub tol_abs: f64,
    /// Relative gap and infeasibility target of each SDP.
    pub sdp_tol: f64,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        SeesawConfig {
            restarts: 20,
            max_cycles: 2000,
            tol_rel: 1e-10,
            tol_abs: 1e-15,
            sdp_tol: 1e-10,
            seed: 0,
        }
    }
}

impl SeesawConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0
            || self.max_cycles == 0
            || !(self.tol_rel >= 0.0)
            || !(self.tol_abs >= 0.0)
            || !(self.sdp_tol > 0.0)
        {
            return Err(Error::domain(
                "seesaw config needs restarts >= 1, cycles >= 1 and non-negative tolerances",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeesawResult {
    pub value: f64,
    pub rho: DensityMatrix,
    pub measurements: MeasurementSet,
    /// Value after every step of the best restart.
    pub history: Vec<f64>,
    /// Final value of each restart, in order.
    pub restart_values: Vec<f64>,
    /// Restarts that met the cycle tolerance before the cap.
    pub converged_restarts: usize,
    /// Cycles summed over restarts; `converged` refers to the best restart.
    pub diagnostics: Diagnostics,
}

fn bell_value(f: &BellFunctional, rho: &Matrix, ms: &MeasurementSet) -> Result<f64> {
    Ok(bell_operator(f, ms)?.dot(rho))
}

/// Orthonormal basis of the symmetric `n × n` matrices; the traceless part
/// comes first when `traceless` is set and the identity direction is dropped.
fn symmetric_basis(n: usize, traceless: bool) -> Vec<Matrix> {
    let mut out = Vec::new();
    let h = core::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            let mut e = Matrix::zeros(n, n);
            e[(i, j)] = h;
            e[(j, i)] = h;
            out.push(e);
        }
    }
    if traceless {
        for l in 1..n {
            let s = 1.0 / libm::sqrt((l * (l + 1)) as f64);
            let mut e = Matrix::zeros(n, n);
            for k in 0..l {
                e[(k, k)] = s;
            }
            e[(l, l)] = -(l as f64) * s;
            out.push(e);
        }
    } else {
        for i in 0..n {
            let mut e = Matrix::zeros(n, n);
            e[(i, i)] = 1.0;
            out.push(e);
        }
    }
    out
}

/// Constraint data of the state step, independent of the Bell operator.
struct StateStep {
    n: usize,
    basis: Vec<Matrix>,
    a: Vec<Vec<SymSparse>>,
}

impl StateStep {
    fn new(shape: BipartiteShape) -> Result<Self> {
        let n = shape.total();
        let basis = symmetric_basis(n, true);
        let a = basis
            .iter()
            .map(|e| {
                Ok(vec![
                    SymSparse::from_dense(&e.scaled(-1.0)),
                    SymSparse::from_dense(&partial_transpose(e, shape)?.scaled(-1.0)),
                ])
            })
            .collect::<Result<_>>()?;
        Ok(StateStep { n, basis, a })
    }

    /// `max tr(ρ W)` over PPT states, with `ρ = I/n + Σ y_i E_i`.
    fn solve(&self, w: &Matrix, tol: f64) -> Result<Matrix> {
        let n = self.n as f64;
        let c = Matrix::identity(self.n).scaled(1.0 / n);
        let b = self.basis.iter().map(|e| w.dot(e)).collect();
        let p = SdpProblem::new(vec![c.clone(), c], self.a.clone(), b, w.trace() / n)?;
        let sol = sdp_solve_best_effort(&p, tol)?;
        Ok(sol.z[0].symmetrized())
    }
}

/// The PPT state of the given shape maximizing `tr(ρ W)`.
pub fn optimal_ppt_state(w: &Matrix, shape: BipartiteShape, tol: f64) -> Result<DensityMatrix> {
    if w.rows() != shape.total() || !w.is_square() {
        return Err(Error::Dimension {
            context: "operator does not match the shape",
            expected: shape.total(),
            found: w.rows(),
        });
    }
    DensityMatrix::new(shape, StateStep::new(shape)?.solve(w, tol)?)
}

/// `max Σ_j tr(B_j N_j)` over POVMs `{B_j}` on an `m`-dimensional space.
fn povm_step(n_ops: &[Matrix], tol: f64) -> Result<Vec<Matrix>> {
    let k = n_ops.len();
    let m = n_ops[0].rows();
    let basis = symmetric_basis(m, false);
    let c = Matrix::identity(m).scaled(1.0 / k as f64);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..k - 1 {
        for e in &basis {
            let mut row = vec![SymSparse::from_dense(&Matrix::zeros(m, m)); k];
            row[j] = SymSparse::from_dense(&e.scaled(-1.0));
            row[k - 1] = SymSparse::from_dense(e);
            a.push(row);
            b.push((&n_ops[j] - &n_ops[k - 1]).dot(e));
        }
    }
    let offset = n_ops.iter().map(Matrix::trace).sum::<f64>() / k as f64;
    let p = SdpProblem::new(vec![c; k], a, b, offset)?;
    let sol = sdp_solve_best_effort(&p, tol)?;
    Ok(sol.z.into_iter().map(|z| z.symmetrized()).collect())
}

/// Best response of one setting to its effective operators.
fn best_response(k_ops: &[Matrix], tol: f64) -> Result<Vec<Matrix>> {
    if k_ops.len() == 2 {
        let p = positive_eigenspace_projector(&(&k_ops[0] - &k_ops[1]), PROJECTOR_TOL)?;
        let q = &Matrix::identity(p.rows()) - &p;
        Ok(vec![p, q])
    } else if k_ops.len() == 1 {
        Ok(vec![Matrix::identity(k_ops[0].rows())])
    } else {
        povm_step(k_ops, tol)
    }
}

/// `K_{x,a} = Σ_{y,b} w(x,y,a,b) tr_B[ρ (I ⊗ B_{b|y})]`
pub fn alice_effective_operators(
    f: &BellFunctional,
    rho: &Matrix,
    ms: &MeasurementSet,
) -> Result<Vec<Vec<Matrix>>> {
    let shape = ms.shape();
    let sc = f.scenario();
    let mut k: Vec<Vec<Matrix>> = sc
        .alice
        .iter()
        .map(|&n| vec![Matrix::zeros(shape.dim_a, shape.dim_a); n])
        .collect();
    let mut cache: Vec<Vec<Option<Matrix>>> = sc.bob.iter().map(|&n| vec![None; n]).collect();
    for (c, w) in f.terms() {
        if cache[c.y][c.b].is_none() {
            cache[c.y][c.b] = Some(reduce_to_a(rho, shape, ms.bob(c.y, c.b))?);
        }
        let r = cache[c.y][c.b].as_ref().expect("filled above");
        k[c.x][c.a].add_scaled(w, r);
    }
    Ok(k)
}

/// `N_{y,b} = Σ_{x,a} w(x,y,a,b) tr_A[ρ (A_{a|x} ⊗ I)]`
pub fn bob_effective_operators(
    f: &BellFunctional,
    rho: &Matrix,
    ms: &MeasurementSet,
) -> Result<Vec<Vec<Matrix>>> {
    let shape = ms.shape();
    let sc = f.scenario();
    let mut k: Vec<Vec<Matrix>> = sc
        .bob
        .iter()
        .map(|&n| vec![Matrix::zeros(shape.dim_b, shape.dim_b); n])
        .collect();
    let mut cache: Vec<Vec<Option<Matrix>>> = sc.alice.iter().map(|&n| vec![None; n]).collect();
    for (c, w) in f.terms() {
        if cache[c.x][c.a].is_none() {
            cache[c.x][c.a] = Some(reduce_to_b(rho, shape, ms.alice(c.x, c.a))?);
        }
        let r = cache[c.x][c.a].as_ref().expect("filled above");
        k[c.y][c.b].add_scaled(w, r);
    }
    Ok(k)
}

/// Largest distance between a binary setting's first effect and the
/// positive-eigenspace projector of its own effective operator.
pub fn self_consistency_residual(f: &BellFunctional, rho: &Matrix, ms: &MeasurementSet) -> Result<f64> {
    let mut worst = 0.0f64;
    let ka = alice_effective_operators(f, rho, ms)?;
    let kb = bob_effective_operators(f, rho, ms)?;
    let sides = [(ka, ms.scenario().alice, true), (kb, ms.scenario().bob, false)];
    for (ks, counts, alice) in &sides {
        for (s, ops) in ks.iter().enumerate() {
            if counts[s] != 2 {
                continue;
            }
            let p = positive_eigenspace_projector(&(&ops[0] - &ops[1]), PROJECTOR_TOL)?;
            let cur = if *alice { ms.alice(s, 0) } else { ms.bob(s, 0) };
            worst = worst.max((&p - cur).max_abs());
        }
    }
    Ok(worst)
}

fn random_setting(rng: &mut impl Rng, n: usize, outcomes: usize) -> Result<Vec<Matrix>> {
    let mut gauss = || -> f64 { StandardNormal.sample(&mut *rng) };
    match outcomes {
        1 => Ok(vec![Matrix::identity(n)]),
        2 => {
            let g = Matrix::from_fn(n, n, |_, _| gauss()).symmetrized();
            let p = positive_eigenspace_projector(&g, PROJECTOR_TOL)?;
            let q = &Matrix::identity(n) - &p;
            Ok(vec![p, q])
        }
        k => {
            let gs: Vec<Matrix> = (0..k)
                .map(|_| {
                    let m = Matrix::from_fn(n, n, |_, _| gauss());
                    &m * &m.transpose()
                })
                .collect();
            let mut s = Matrix::zeros(n, n);
            for g in &gs {
                s.add_scaled(1.0, g);
            }
            let inv_sqrt = eigh(&s)?.map(|l| 1.0 / libm::sqrt(l));
            Ok(gs
                .iter()
                .map(|g| (&(&inv_sqrt * g) * &inv_sqrt).symmetrized())
                .collect())
        }
    }
}

fn random_measurements(
    rng: &mut impl Rng,
    f: &BellFunctional,
    shape: BipartiteShape,
) -> Result<MeasurementSet> {
    let sc = f.scenario();
    let alice = sc
        .alice
        .iter()
        .map(|&k| random_setting(rng, shape.dim_a, k))
        .collect::<Result<_>>()?;
    let bob = sc
        .bob
        .iter()
        .map(|&k| random_setting(rng, shape.dim_b, k))
        .collect::<Result<_>>()?;
    MeasurementSet::new(shape, alice, bob)
}

struct Run {
    value: f64,
    rho: Matrix,
    ms: MeasurementSet,
    history: Vec<f64>,
    cycles: usize,
    converged: bool,
}

fn run_once(f: &BellFunctional, step: &StateStep, mut ms: MeasurementSet, cfg: &SeesawConfig) -> Result<Run> {
    let shape = ms.shape();
    let mut rho = Matrix::identity(shape.total()).scaled(1.0 / shape.total() as f64);
    let mut value = bell_value(f, &rho, &ms)?;
    let mut history = vec![value];
    let mut converged = false;
    let mut cycles = 0;

    // Each closure-free step: propose, evaluate, keep if not worse.
    while cycles < cfg.max_cycles {
        cycles += 1;
        let start = value;

        let w = bell_operator(f, &ms)?;
        let Ok(cand) = step.solve(&w, cfg.sdp_tol) else {
            break;
        };
        let v = w.dot(&cand);
        if v >= value {
            rho = cand;
            value = v;
        }
        history.push(value);

        let ka = alice_effective_operators(f, &rho, &ms)?;
        let mut cand = ms.clone();
        let mut failed = false;
        for (x, ops) in ka.iter().enumerate() {
            match best_response(ops, cfg.sdp_tol) {
                Ok(new) => cand.set_alice_setting(x, new),
                Err(_) => failed = true,
            }
        }
        if failed {
            break;
        }
        let v = bell_value(f, &rho, &cand)?;
        if v >= value {
            ms = cand;
            value = v;
        }
        history.push(value);

        let kb = bob_effective_operators(f, &rho, &ms)?;
        let mut cand = ms.clone();
        for (y, ops) in kb.iter().enumerate() {
            match best_response(ops, cfg.sdp_tol) {
                Ok(new) => cand.set_bob_setting(y, new),
                Err(_) => failed = true,
            }
        }
        if failed {
            break;
        }
        let v = bell_value(f, &rho, &cand)?;
        if v >= value {
            ms = cand;
            value = v;
        }
        history.push(value);

        if cycles > 1 && value - start <= cfg.tol_rel * value.abs() + cfg.tol_abs {
            converged = true;
            break;
        }
    }
    Ok(Run {
        value,
        rho,
        ms,
        history,
        cycles,
        converged,
    })
}

fn run_seesaw(
    f: &BellFunctional,
    shape: BipartiteShape,
    cfg: &SeesawConfig,
    stream: u64,
    init: &mut dyn FnMut(&mut ChaCha8Rng) -> Result<MeasurementSet>,
) -> Result<SeesawResult> {
    cfg.validate()?;
    let step = StateStep::new(shape)?;
    let mut best: Option<Run> = None;
    let mut restart_values = Vec::with_capacity(cfg.restarts);
    let mut cycles = 0;
    let mut converged_restarts = 0;
    for r in 0..cfg.restarts {
        let mut rng = stream_rng(cfg.seed, stream, r as u64);
        let ms = init(&mut rng)?;
        let run = run_once(f, &step, ms, cfg)?;
        cycles += run.cycles;
        converged_restarts += usize::from(run.converged);
        restart_values.push(run.value);
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(SeesawResult {
        value: best.value,
        rho: DensityMatrix::new(shape, best.rho)?,
        measurements: best.ms,
        history: best.history,
        restart_values,
        converged_restarts,
        diagnostics: Diagnostics {
            iterations: cycles,
            restarts: cfg.restarts,
            converged: best.converged,
        },
    })
}

fn random_family_measurements(rng: &mut ChaCha8Rng, d: usize) -> Result<MeasurementSet> {
    let mut angle = || rng.random_range(0.0..core::f64::consts::TAU);
    let mp = MeasurementParams::from_angles(angle(), angle(), angle());
    build_measurements(d, &mp)
}

/// Random `n × m` matrix with orthonormal columns.
fn random_isometry(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Result<Matrix> {
    let g = Matrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut *rng));
    // G (GᵀG)^{-1/2}
    let inv_sqrt = eigh(&(&g.transpose() * &g))?.map(|l| 1.0 / libm::sqrt(l));
    Ok(&g * &inv_sqrt)
}

/// `Vᵀ E V` for every effect; POVMs stay POVMs when `V` is an isometry.
fn compress(ms: &MeasurementSet, va: &Matrix, vb: &Matrix) -> Result<MeasurementSet> {
    let side = |ops: Vec<&[Matrix]>, v: &Matrix| -> Vec<Vec<Matrix>> {
        ops.iter()
            .map(|s| {
                s.iter()
                    .map(|e| (&(&v.transpose() * e) * v).symmetrized())
                    .collect()
            })
            .collect()
    };
    let sc = ms.scenario();
    let alice = side((0..sc.alice.len()).map(|x| ms.alice_setting(x)).collect(), va);
    let bob = side((0..sc.bob.len()).map(|y| ms.bob_setting(y)).collect(), vb);
    MeasurementSet::new(BipartiteShape::new(va.cols(), vb.cols())?, alice, bob)
}

/// A single seesaw run from the given measurements.
pub fn seesaw_from(f: &BellFunctional, ms: MeasurementSet, cfg: &SeesawConfig) -> Result<SeesawResult> {
    cfg.validate()?;
    if f.scenario() != &ms.scenario() {
        return Err(Error::domain(
            "measurements do not match the functional's scenario",
        ));
    }
    let shape = ms.shape();
    let run = run_once(f, &StateStep::new(shape)?, ms, cfg)?;
    Ok(SeesawResult {
        value: run.value,
        rho: DensityMatrix::new(shape, run.rho)?,
        measurements: run.ms,
        history: run.history,
        restart_values: vec![run.value],
        converged_restarts: usize::from(run.converged),
        diagnostics: Diagnostics {
            iterations: run.cycles,
            restarts: 1,
            converged: run.converged,
        },
    })
}

/// Seesaw maximization of `f` over PPT states of the given shape, starting
/// each restart from random projective and POVM settings.
pub fn seesaw_functional(
    f: &BellFunctional,
    shape: BipartiteShape,
    cfg: &SeesawConfig,
) -> Result<SeesawResult> {
    let stream = stream_key(shape.total(), Purpose::Seesaw) ^ 0x8000_0000;
    run_seesaw(f, shape, cfg, stream, &mut |rng| {
        random_measurements(rng, f, shape)
    })
}

/// Seesaw maximization of `I_d` over `d × d` PPT states.
///
/// Each restart starts from the measurement family at random angles. Fully
/// random settings almost always fall into the trivial local optimum where
/// every binary effect vanishes.
pub fn seesaw(d: usize, cfg: &SeesawConfig) -> Result<SeesawResult> {
    if d < 3 {
        return Err(Error::domain("the seesaw search needs d >= 3"));
    }
    run_seesaw(
        &make_id(d)?,
        BipartiteShape::square(d)?,
        cfg,
        stream_key(d, Purpose::Seesaw),
        &mut |rng| random_family_measurements(rng, d),
    )
}

/// Seesaw maximization of `I_{d_ineq}` over `d_state × d_state` PPT states.
///
/// Each restart compresses the `d_ineq` measurement family at random angles
/// onto random `d_state`-dimensional subspaces of both sides.
pub fn restricted_dimension_search(
    d_ineq: usize,
    d_state: usize,
    cfg: &SeesawConfig,
) -> Result<SeesawResult> {
    if d_ineq < 3 || d_state < 1 || d_state > d_ineq {
        return Err(Error::domain(
            "restricted search needs d_ineq >= 3 and 1 <= d_state <= d_ineq",
        ));
    }
    let stream = stream_key(d_ineq, Purpose::Restricted) ^ ((d_state as u64) << 24);
    let shape = BipartiteShape::square(d_state)?;
    run_seesaw(&make_id(d_ineq)?, shape, cfg, stream, &mut |rng| {
        let full = random_family_measurements(rng, d_ineq)?;
        let va = random_isometry(rng, d_ineq, d_state)?;
        let vb = random_isometry(rng, d_ineq, d_state)?;
        compress(&full, &va, &vb)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal() {
        for traceless in [true, false] {
            let b = symmetric_basis(4, traceless);
            assert_eq!(b.len(), if traceless { 9 } else { 10 });
            for (i, e) in b.iter().enumerate() {
                if traceless {
                    assert!(e.trace().abs() < 1e-15);
                }
                for (j, g) in b.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((e.dot(g) - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn povm_step_picks_dominant_operator() {
        // N_0 dominates on e0, N_2 on e1: optimum is a projective measurement
        let n = vec![
            Matrix::diag(&[1.0, 0.0]),
            Matrix::diag(&[0.2, 0.2]),
            Matrix::diag(&[0.0, 1.0]),
        ];
        let b = povm_step(&n, 1e-10).unwrap();
        let value: f64 = b.iter().zip(&n).map(|(b, n)| b.dot(n)).sum();
        assert!((value - 2.0).abs() < 1e-8);
        let mut total = Matrix::zeros(2, 2);
        for e in &b {
            total.add_scaled(1.0, e);
            assert!(eigh(e).unwrap().min() > -1e-12);
        }
        assert!((&total - &Matrix::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn random_settings_are_measurements() {
        let mut rng = stream_rng(1, 2, 3);
        for k in 1..5 {
            let ops = random_setting(&mut rng, 3, k).unwrap();
            let mut total = Matrix::zeros(3, 3);
            for e in &ops {
                total.add_scaled(1.0, e);
                assert!(eigh(e).unwrap().min() > -1e-12);
            }
            assert!((&total - &Matrix::identity(3)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_states_do_not_violate() {
        let cfg = SeesawConfig {
            restarts: 3,
            ..Default::default()
        };
        let r = restricted_dimension_search(3, 2, &cfg).unwrap();
        assert!(r.value <= 1e-9, "{}", r.value);
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rejects_bad_dimensions() {
        let cfg = SeesawConfig::default();
        assert!(seesaw(2, &cfg).is_err());
        assert!(restricted_dimension_search(3, 4, &cfg).is_err());
    }
}
