use alloc::vec::Vec;

use super::chart::{free_from_params, parameterize_free, FREE_DIM};
use super::simplex::{nelder_mead, SimplexConfig};
use super::{stream_key, Purpose};
use crate::analytic::{
    asymptotic_params, quantum_value_analytic, reduced_solution, ReducedParams, ReducedSolution,
};
use crate::model::{MeasurementParams, StateParams};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
}

/// Best point of the family found by the simplex search.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyOptimum {
    pub d: usize,
    /// Analytic quantum value of `state` with `measurements`.
    pub value: f64,
    pub state: StateParams,
    pub measurements: MeasurementParams,
    pub free: [f64; FREE_DIM],
    pub diagnostics: Diagnostics,
}

/// Best point of the reduced solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedOptimum {
    pub d: usize,
    pub value: f64,
    /// Search coordinates `(a, b, v0/U)` with `x0 = cos a`, `x1 = sin a cos b`.
    pub coords: [f64; 3],
    pub solution: ReducedSolution,
    pub diagnostics: Diagnostics,
}

/// Objective of the full search; `-∞` where the chart is not defined.
pub fn full_objective(d: usize, z: &[f64]) -> f64 {
    match parameterize_free(d, z) {
        Ok((sp, mp)) => quantum_value_analytic(d, &sp, &mp).total,
        Err(_) => f64::NEG_INFINITY,
    }
}

fn reduced_params(w: &[f64]) -> ReducedParams {
    let (sa, ca) = libm::sincos(w[0]);
    ReducedParams {
        x0: ca,
        x1: sa * libm::cos(w[1]),
        U: 1.0,
        v0: w[2],
    }
}

/// Objective of the reduced search; `-∞` where the chain is not defined.
pub fn reduced_objective(d: usize, w: &[f64]) -> f64 {
    match reduced_solution(d, &reduced_params(w)) {
        Ok(s) => s.value,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Coarse grid over `(a, b, v0/U)` used to seed the reduced search.
pub fn reduced_grid_seed(d: usize) -> [f64; 3] {
    let mut best = ([0.8, 0.8, 1.0], f64::NEG_INFINITY);
    for i in 0..13 {
        let a = 0.2 + 0.1 * i as f64;
        for j in 0..15 {
            let b = 0.1 + 0.1 * j as f64;
            for r in [0.25, 0.5, 1.0, 2.0, 4.0] {
                let w = [a, b, r];
                let v = reduced_objective(d, &w);
                if v > best.1 {
                    best = (w, v);
                }
            }
        }
    }
    best.0
}

/// Maximizes the reduced solution over `(x0, x1, U, v0)` (with `U = 1`
/// before normalization). Starts at `init` or at [`reduced_grid_seed`].
pub fn optimize_reduced(d: usize, init: Option<[f64; 3]>, cfg: &SimplexConfig) -> Result<ReducedOptimum> {
    if d < 4 {
        return Err(Error::domain("the reduced solution needs d >= 4"));
    }
    let seed = init.unwrap_or_else(|| reduced_grid_seed(d));
    let mut f = |w: &[f64]| reduced_objective(d, w);
    let r = nelder_mead(&mut f, &seed, cfg, stream_key(d, Purpose::Reduced))?;
    let coords = [r.x[0], r.x[1], r.x[2]];
    let solution = reduced_solution(d, &reduced_params(&coords))?;
    Ok(ReducedOptimum {
        d,
        value: solution.value,
        coords,
        solution,
        diagnostics: Diagnostics {
            iterations: r.iterations,
            restarts: r.restarts,
            converged: r.converged,
        },
    })
}

/// Maximizes the analytic value over the 14 free parameters starting at `z0`.
pub fn optimize_full_from(d: usize, z0: &[f64; FREE_DIM], cfg: &SimplexConfig) -> Result<FamilyOptimum> {
    let mut f = |z: &[f64]| full_objective(d, z);
    let r = nelder_mead(&mut f, z0, cfg, stream_key(d, Purpose::Full))?;
    let free: [f64; FREE_DIM] = core::array::from_fn(|i| r.x[i]);
    let (state, measurements) = parameterize_free(d, &free)?;
    let value = quantum_value_analytic(d, &state, &measurements).total;
    Ok(FamilyOptimum {
        d,
        value,
        state,
        measurements,
        free,
        diagnostics: Diagnostics {
            iterations: r.iterations,
            restarts: r.restarts,
            converged: r.converged,
        },
    })
}

/// Seed of the full search.
///
/// For `d > 3` this is the optimized reduced solution. At `d = 3` the reduced
/// chain does not exist; the `d = 4` optimum is carried over instead.
pub fn full_seed(d: usize, cfg: &SimplexConfig) -> Result<[f64; FREE_DIM]> {
    let single = SimplexConfig { restarts: 1, ..*cfg };
    if d > 3 {
        let r = optimize_reduced(d, None, &single)?;
        free_from_params(d, &r.solution.state, &r.solution.measurements)
    } else if d == 3 {
        let o = optimize_full(4, &single)?;
        free_from_params(3, &o.state, &o.measurements)
    } else {
        Err(Error::domain("the state family needs d >= 3"))
    }
}

/// Maximizes the analytic value of the family at dimension `d`.
pub fn optimize_full(d: usize, cfg: &SimplexConfig) -> Result<FamilyOptimum> {
    let z0 = full_seed(d, cfg)?;
    optimize_full_from(d, &z0, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveMode {
    Full,
    Reduced,
    Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub d: usize,
    pub value: f64,
    pub diagnostics: Diagnostics,
}

/// Roughly `per_octave` integers per doubling from `d_min` to `d_max`, both included.
pub fn log_spaced_dims(d_min: usize, d_max: usize, per_octave: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut k = 0;
    loop {
        let v = libm::round(d_min as f64 * libm::exp2(k as f64 / per_octave.max(1) as f64)) as usize;
        if v >= d_max {
            break;
        }
        if out.last() != Some(&v) {
            out.push(v);
        }
        k += 1;
    }
    out.push(d_max);
    out
}

/// Optimized (or asymptotic) value at each `d`, in order.
///
/// Full and reduced modes warm-start each dimension from the previous
/// optimum; dimension-dependent quantities are recomputed by the chart.
/// `d = 3` is always optimized on its own, since its chart differs.
pub fn curve(ds: &[usize], mode: CurveMode, cfg: &SimplexConfig) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::with_capacity(ds.len());
    match mode {
        CurveMode::Asymptotic => {
            let a = asymptotic_params();
            for &d in ds {
                out.push(CurvePoint {
                    d,
                    value: a.q_approx(d as f64),
                    diagnostics: Diagnostics {
                        converged: true,
                        ..Default::default()
                    },
                });
            }
        }
        CurveMode::Reduced => {
            let mut warm = None;
            for &d in ds {
                let r = optimize_reduced(d, warm, cfg)?;
                warm = Some(r.coords);
                out.push(CurvePoint {
                    d,
                    value: r.value,
                    diagnostics: r.diagnostics,
                });
            }
        }
        CurveMode::Full => {
            let mut warm: Option<[f64; FREE_DIM]> = None;
            for &d in ds {
                let o = match (&warm, d) {
                    (Some(z), d) if d > 3 => optimize_full_from(d, z, cfg)?,
                    _ => optimize_full(d, cfg)?,
                };
                if d > 3 {
                    warm = Some(o.free);
                }
                out.push(CurvePoint {
                    d,
                    value: o.value,
                    diagnostics: o.diagnostics,
                });
            }
        }
    }
    Ok(out)
}
