use ppt_bell_core::analytic::quantum_value_analytic;
use ppt_bell_core::bell::{evaluate_behavior, make_id};
use ppt_bell_core::linalg::{eigh, BipartiteShape, Matrix};
use ppt_bell_core::model::{assemble_density, behavior, bell_operator, build_measurements, DensityMatrix};
use ppt_bell_core::optimize::{
    optimal_ppt_state, optimize_full, restricted_dimension_search, sdp_solve, seesaw,
    self_consistency_residual, SdpProblem, SeesawConfig, SimplexConfig, SymSparse,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn cfg(restarts: usize) -> SimplexConfig {
    SimplexConfig {
        restarts,
        ..SimplexConfig::default()
    }
}

/// Multiplicities of the nonzero eigenvalues, grouped at relative spread `rel`.
fn multiplicities(rho: &DensityMatrix, rel: f64) -> Vec<usize> {
    let ev: Vec<f64> = rho
        .eigenvalues()
        .unwrap()
        .into_iter()
        .filter(|&v| v > 1e-7)
        .collect();
    let mut out: Vec<usize> = Vec::new();
    let mut start = 0;
    for i in 1..=ev.len() {
        if i == ev.len() || (ev[start] - ev[i]).abs() > rel * ev[start] {
            out.push(i - start);
            start = i;
        }
    }
    out.sort_unstable();
    out
}

#[test]
fn simplex_reaches_known_values() {
    let d3 = optimize_full(3, &cfg(4)).unwrap();
    assert!(d3.value >= 0.000262, "d=3: {}", d3.value);
    let d6 = optimize_full(6, &cfg(4)).unwrap();
    assert!((d6.value - 0.000128375).abs() <= 1e-8, "d=6: {}", d6.value);
    let d8 = optimize_full(8, &cfg(2)).unwrap();
    assert!(d8.value >= 0.000085, "d=8: {}", d8.value);
}

#[test]
fn behavior_of_the_d3_optimum_evaluates_to_its_value() {
    let o = optimize_full(3, &cfg(4)).unwrap();
    let rho = assemble_density(3, &o.state).unwrap();
    let ms = build_measurements(3, &o.measurements).unwrap();
    let p = behavior(rho.matrix(), &ms).unwrap();
    assert!(p.is_valid());
    let v = evaluate_behavior(&make_id(3).unwrap(), &p).unwrap();
    assert!((v - 0.000265264).abs() <= 1e-8, "{v}");
    assert!((v - quantum_value_analytic(3, &o.state, &o.measurements).total).abs() <= 1e-12);
}

#[test]
fn optimized_states_have_rank_two_d_minus_two() {
    for (d, rank) in [(4, 6), (5, 8)] {
        let o = optimize_full(d, &cfg(2)).unwrap();
        let rho = assemble_density(d, &o.state).unwrap();
        assert_eq!(rho.rank(1e-7).unwrap(), rank, "d={d}");
        assert!(rho.ppt_residual() <= 1e-9);
        assert!(rho.min_eigenvalue().unwrap() >= -1e-9);
        assert!(rho.min_eigenvalue_pt().unwrap() >= -1e-9);
        assert_eq!(multiplicities(&rho, 1e-6), vec![1, 1, d - 2, d - 2], "d={d}");
    }
}

#[test]
fn ppt_relaxation_dominates_and_matches_at_the_optimum() {
    let o = optimize_full(3, &cfg(4)).unwrap();
    let ms = build_measurements(3, &o.measurements).unwrap();
    let w = bell_operator(&make_id(3).unwrap(), &ms).unwrap();
    let shape = BipartiteShape::square(3).unwrap();
    let rho = optimal_ppt_state(&w, shape, 1e-10).unwrap();
    let v = w.dot(rho.matrix());
    let lmax = eigh(&w).unwrap().eigenvalues[0];
    assert!(v <= lmax + 1e-9);
    assert!(v >= o.value - 1e-9);
    assert!((v - 0.000265264).abs() <= 1e-7, "{v}");
    assert!(rho.min_eigenvalue().unwrap() >= -1e-9);
    assert!(rho.min_eigenvalue_pt().unwrap() >= -1e-9);
}

#[test]
fn sdp_weak_duality_on_random_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut g = move || -> f64 { StandardNormal.sample(&mut rng) };
    for _ in 0..10 {
        let n = 5;
        let m = 4;
        let root = Matrix::from_fn(n, n, |_, _| g());
        let mut c = root.matmul(&root.transpose());
        c.add_scaled(1.0, &Matrix::identity(n));
        let a: Vec<Vec<SymSparse>> = (0..m)
            .map(|_| {
                let r = Matrix::from_fn(n, n, |_, _| g());
                vec![SymSparse::from_dense(&r.symmetrized())]
            })
            .collect();
        let b: Vec<f64> = (0..m).map(|_| g()).collect();
        let p = SdpProblem::new(vec![c.clone()], a.clone(), b.clone(), 0.0).unwrap();
        let s = sdp_solve(&p, 1e-8).unwrap();
        assert!(s.value <= s.upper_bound + 1e-9);
        assert!(s.gap <= 1e-7);
        assert!(eigh(&s.z[0]).unwrap().eigenvalues[n - 1] >= -1e-9);
        assert!(eigh(&s.x[0]).unwrap().eigenvalues[n - 1] >= -1e-9);
        // any feasible y gives a lower value than the dual bound
        for t in [0.1, 0.5, 0.9] {
            let y: Vec<f64> = s.y.iter().map(|v| v * t).collect();
            let lower: f64 = y.iter().zip(&b).map(|(u, v)| u * v).sum();
            assert!(lower <= s.upper_bound + 1e-9);
        }
    }
}

#[test]
fn small_seesaw_is_monotone_and_self_consistent() {
    let c = SeesawConfig {
        restarts: 3,
        ..SeesawConfig::default()
    };
    let r = seesaw(3, &c).unwrap();
    assert_eq!(r.restart_values.len(), 3);
    assert!(r.value > 0.0);
    for w in r.history.windows(2) {
        assert!(w[1] >= w[0] - 1e-9);
    }
    let f = make_id(3).unwrap();
    assert!(self_consistency_residual(&f, r.rho.matrix(), &r.measurements).unwrap() <= 1e-8);
    assert!(r.rho.min_eigenvalue().unwrap() >= -1e-9);
    assert!(r.rho.min_eigenvalue_pt().unwrap() >= -1e-9);
    assert!(r.measurements.completeness_residual() <= 1e-9);
    assert!(r.measurements.min_eigenvalue().unwrap() >= -1e-9);
}

#[test]
fn restricted_search_finds_violations_at_full_dimension() {
    let c = SeesawConfig {
        restarts: 4,
        ..SeesawConfig::default()
    };
    let full = restricted_dimension_search(3, 3, &c).unwrap();
    assert!(full.value >= 0.00026, "{}", full.value);
    let small = restricted_dimension_search(3, 2, &c).unwrap();
    assert!(small.value <= 1e-9, "{}", small.value);
}
