use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use super::stream_rng;
use crate::{Error, Result};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Settings of the downhill-simplex search (run uphill).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexConfig {
    /// Independent starts; the first uses `init` unperturbed.
    pub restarts: usize,
    /// Iteration cap of a single simplex run.
    pub max_iters: usize,
    /// Stop when the spread of simplex values is below `tol_f (1 + |best|)`.
    pub tol_f: f64,
    /// Stop when every vertex is within `tol_x` of the best (max norm).
    pub tol_x: f64,
    pub seed: u64,
    /// Edge length of the initial simplex; also the scale of restart perturbations.
    pub init_scale: f64,
    /// Maximum number of times the simplex is rebuilt around the best point.
    pub polish_rounds: usize,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        SimplexConfig {
            restarts: 20,
            max_iters: 8000,
            tol_f: 1e-18,
            tol_x: 1e-10,
            seed: 0,
            init_scale: 0.05,
            polish_rounds: 20,
        }
    }
}

impl SimplexConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || !(self.tol_f > 0.0) || !(self.tol_x > 0.0) || !(self.init_scale > 0.0) {
            return Err(Error::domain(
                "simplex config needs restarts >= 1 and positive tolerances and scale",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// Simplex iterations summed over all runs.
    pub iterations: usize,
    pub restarts: usize,
    /// Whether the best run stopped on a tolerance rather than the iteration cap.
    pub converged: bool,
}

struct Run {
    x: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn finite_or_worst(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::NEG_INFINITY
    }
}

/// One Nelder–Mead run maximizing `f` from an axis-aligned simplex at `x0`.
fn run(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], cfg: &SimplexConfig) -> Run {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += cfg.init_scale;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| finite_or_worst(f(p))).collect();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iters {
        // best first
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = vals[0] - vals[n];
        let diameter = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if vals[n].is_finite() && (spread <= cfg.tol_f * (1.0 + vals[0].abs()) || diameter <= cfg.tol_x) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = finite_or_worst(f(&xr));
        if fr > vals[0] {
            let xe = along(REFLECT * EXPAND);
            let fe = finite_or_worst(f(&xe));
            if fe > fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr > vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let outside = fr > vals[n];
        let xc = along(if outside { REFLECT * CONTRACT } else { -CONTRACT });
        let fc = finite_or_worst(f(&xc));
        let accept = if outside { fc >= fr } else { fc > vals[n] };
        if accept {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        let best = pts[0].clone();
        for i in 1..=n {
            for (p, b) in pts[i].iter_mut().zip(&best) {
                *p = b + SHRINK * (*p - b);
            }
            vals[i] = finite_or_worst(f(&pts[i]));
        }
    }
    let best = (0..=n).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    Run {
        x: pts[best].clone(),
        value: vals[best],
        iterations,
        converged,
    }
}

/// Repeated runs, each restarting the simplex at the previous best, until a
/// round no longer improves the value.
fn polished(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], cfg: &SimplexConfig) -> Run {
    let mut cur = run(f, x0, cfg);
    let mut iterations = cur.iterations;
    for _ in 1..cfg.polish_rounds.max(1) {
        let next = run(f, &cur.x, cfg);
        iterations += next.iterations;
        let gain = next.value - cur.value;
        let better = next.value > cur.value;
        if better {
            cur = Run {
                iterations: 0,
                ..next
            };
        }
        if !better || gain <= 1e-10 * cur.value.abs() + cfg.tol_f {
            break;
        }
    }
    cur.iterations = iterations;
    cur
}

/// Maximizes `f` by Nelder–Mead with restarts.
///
/// Restart `r > 0` starts from `init` plus Gaussian noise of size
/// `init_scale`, drawn from the stream keyed by `(stream, r)`. Non-finite
/// values count as worse than anything finite. Fails only when no restart
/// produced a finite value.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    init: &[f64],
    cfg: &SimplexConfig,
    stream: u64,
) -> Result<SimplexResult> {
    cfg.validate()?;
    let mut best: Option<Run> = None;
    let mut iterations = 0;
    for r in 0..cfg.restarts {
        let start: Vec<f64> = if r == 0 {
            init.to_vec()
        } else {
            let mut rng = stream_rng(cfg.seed, stream, r as u64);
            init.iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v + cfg.init_scale * z
                })
                .collect()
        };
        if !f(&start).is_finite() {
            continue;
        }
        let out = polished(f, &start, cfg);
        iterations += out.iterations;
        if best.as_ref().is_none_or(|b| out.value > b.value) {
            best = Some(out);
        }
    }
    let best = best.ok_or(Error::NonFinite)?;
    if !best.value.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(SimplexResult {
        x: best.x,
        value: best.value,
        iterations,
        restarts: cfg.restarts,
        converged: best.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concave_quadratic() {
        let cfg = SimplexConfig {
            restarts: 1,
            init_scale: 0.5,
            ..Default::default()
        };
        let mut f = |x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>();
        let r = nelder_mead(&mut f, &[1.0, 1.0, 1.0], &cfg, 0).unwrap();
        assert!(r.value.abs() < 1e-8);
        assert!(r.x.iter().all(|v| v.abs() < 1e-4));
        assert!(r.converged);
    }

    #[test]
    fn rosenbrock() {
        let cfg = SimplexConfig {
            restarts: 1,
            max_iters: 20_000,
            init_scale: 0.5,
            ..Default::default()
        };
        let mut f = |x: &[f64]| -(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
        let r = nelder_mead(&mut f, &[-1.2, 1.0], &cfg, 0).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn non_finite_start_everywhere_fails() {
        let cfg = SimplexConfig {
            restarts: 3,
            ..Default::default()
        };
        let mut f = |_: &[f64]| f64::NAN;
        assert_eq!(nelder_mead(&mut f, &[0.0], &cfg, 0), Err(Error::NonFinite));
    }

    #[test]
    fn avoids_non_finite_region() {
        let cfg = SimplexConfig {
            restarts: 1,
            init_scale: 0.3,
            ..Default::default()
        };
        // infinite wall for x < 0, optimum at x = 0.5
        let mut f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                -(x[0] - 0.5).powi(2)
            }
        };
        let r = nelder_mead(&mut f, &[2.0], &cfg, 0).unwrap();
        assert!((r.x[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn restarts_are_reproducible() {
        let cfg = SimplexConfig {
            restarts: 4,
            seed: 7,
            ..Default::default()
        };
        let mut f = |x: &[f64]| (3.0 * x[0]).sin() - 0.1 * x[0] * x[0];
        let a = nelder_mead(&mut f, &[0.0], &cfg, 1).unwrap();
        let b = nelder_mead(&mut f, &[0.0], &cfg, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SimplexConfig {
            restarts: 0,
            ..Default::default()
        };
        let mut f = |_: &[f64]| 0.0;
        assert!(nelder_mead(&mut f, &[0.0], &cfg, 0).is_err());
    }
}
