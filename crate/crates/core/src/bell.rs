//! Bell scenarios, sparse Bell functionals and exact classical bounds.
//!
//! Settings and outcomes are numbered from zero. A coefficient keyed by
//! `Cell { x, y, a, b }` multiplies `p(ab|xy)`, the probability that Alice
//! answers `a` and Bob answers `b` when they measure settings `x` and `y`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Default cap on the number of deterministic strategies enumerated.
pub const STRATEGY_CAP: u128 = 1 << 24;

/// Outcome counts for every setting of each party.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl Scenario {
    pub fn new(alice: Vec<usize>, bob: Vec<usize>) -> Result<Self> {
        if alice.is_empty() || bob.is_empty() {
            return Err(Error::domain("each party needs at least one setting"));
        }
        if alice.iter().chain(&bob).any(|&n| n == 0) {
            return Err(Error::domain("every setting needs at least one outcome"));
        }
        Ok(Scenario { alice, bob })
    }

    /// Alice: `d` binary settings. Bob: one `d`-outcome and one binary setting.
    pub fn id_family(d: usize) -> Self {
        Scenario {
            alice: vec![2; d],
            bob: vec![d, 2],
        }
    }

    pub fn strategy_count(&self) -> u128 {
        self.alice
            .iter()
            .chain(&self.bob)
            .fold(1u128, |acc, &n| acc.saturating_mul(n as u128))
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.x < self.alice.len()
            && cell.y < self.bob.len()
            && cell.a < self.alice[cell.x]
            && cell.b < self.bob[cell.y]
    }
}

/// Index of one conditional probability `p(ab|xy)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
    pub a: usize,
    pub b: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize, a: usize, b: usize) -> Self {
        Cell { x, y, a, b }
    }
}

/// Linear functional on behaviors together with its local bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BellFunctional {
    scenario: Scenario,
    coeffs: BTreeMap<Cell, f64>,
    classical_bound: f64,
}

impl BellFunctional {
    pub fn new(scenario: Scenario, classical_bound: f64) -> Self {
        BellFunctional {
            scenario,
            coeffs: BTreeMap::new(),
            classical_bound,
        }
    }

    /// Adds `w` to the coefficient of `p(ab|xy)`; zero results are dropped.
    pub fn add(&mut self, x: usize, y: usize, a: usize, b: usize, w: f64) -> Result<()> {
        let cell = Cell::new(x, y, a, b);
        if !self.scenario.contains(cell) {
            return Err(Error::domain(format!("p({a}{b}|{x}{y}) is outside the scenario")));
        }
        let entry = self.coeffs.entry(cell).or_insert(0.0);
        *entry += w;
        if *entry == 0.0 {
            self.coeffs.remove(&cell);
        }
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn classical_bound(&self) -> f64 {
        self.classical_bound
    }

    pub fn coeff(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.coeffs.get(&Cell::new(x, y, a, b)).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Cell, f64)> + '_ {
        self.coeffs.iter().map(|(&c, &w)| (c, w))
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn relabel(&self, r: &Relabeling) -> BellFunctional {
        let scenario = Scenario {
            alice: permute_counts(&self.scenario.alice, &r.alice.settings),
            bob: permute_counts(&self.scenario.bob, &r.bob.settings),
        };
        let coeffs = self
            .coeffs
            .iter()
            .map(|(c, &w)| {
                let cell = Cell::new(
                    r.alice.settings[c.x],
                    r.bob.settings[c.y],
                    r.alice.outcomes[c.x][c.a],
                    r.bob.outcomes[c.y][c.b],
                );
                (cell, w)
            })
            .collect();
        BellFunctional {
            scenario,
            coeffs,
            classical_bound: self.classical_bound,
        }
    }

    /// Functional left over when Alice's setting `x` always answers `a` (for
    /// each `(x, a)` in `alice_fixed`) and Bob's outcome `b` of setting `y`
    /// never occurs (for each `(y, b)` in `bob_forbidden`).
    ///
    /// Fails if a term would turn into one of Bob's marginals, which the
    /// scenario cannot represent.
    pub fn restrict(
        &self,
        alice_fixed: &[(usize, usize)],
        bob_forbidden: &[(usize, usize)],
    ) -> Result<BellFunctional> {
        let fixed = |x: usize| alice_fixed.iter().find(|&&(fx, _)| fx == x).map(|&(_, a)| a);
        let forbidden = |y: usize, b: usize| bob_forbidden.contains(&(y, b));

        let alice_map: Vec<Option<usize>> = {
            let mut next = 0;
            (0..self.scenario.alice.len())
                .map(|x| {
                    if fixed(x).is_some() {
                        None
                    } else {
                        next += 1;
                        Some(next - 1)
                    }
                })
                .collect()
        };
        let bob_outcome_map: Vec<Vec<Option<usize>>> = self
            .scenario
            .bob
            .iter()
            .enumerate()
            .map(|(y, &n)| {
                let mut next = 0;
                (0..n)
                    .map(|b| {
                        if forbidden(y, b) {
                            None
                        } else {
                            next += 1;
                            Some(next - 1)
                        }
                    })
                    .collect()
            })
            .collect();

        let scenario = Scenario::new(
            (0..self.scenario.alice.len())
                .filter(|&x| alice_map[x].is_some())
                .map(|x| self.scenario.alice[x])
                .collect(),
            bob_outcome_map
                .iter()
                .map(|m| m.iter().filter(|o| o.is_some()).count())
                .collect(),
        )?;
        let mut out = BellFunctional::new(scenario, self.classical_bound);
        for (c, w) in self.terms() {
            if let Some(a_fixed) = fixed(c.x) {
                if c.a == a_fixed && !forbidden(c.y, c.b) {
                    return Err(Error::domain(format!(
                        "p({}{}|{}{}) reduces to a marginal of Bob",
                        c.a, c.b, c.x, c.y
                    )));
                }
                continue;
            }
            let Some(b) = bob_outcome_map[c.y][c.b] else {
                continue;
            };
            out.add(alice_map[c.x].unwrap(), c.y, c.a, b, w)?;
        }
        Ok(out)
    }
}

fn permute_counts(counts: &[usize], perm: &[usize]) -> Vec<usize> {
    let mut out = vec![0; counts.len()];
    for (old, &new) in perm.iter().enumerate() {
        out[new] = counts[old];
    }
    out
}

/// The family `I_d`:
/// `(d-2)[p(00|01) - p(00|00)] - Σ_{i≠j≥1} p(0j|i0) - Σ_{i≥1} p(10|i1) ≤ 0`.
pub fn make_id(d: usize) -> Result<BellFunctional> {
    if d < 3 {
        return Err(Error::domain("I_d needs d >= 3"));
    }
    let mut f = BellFunctional::new(Scenario::id_family(d), 0.0);
    let w = (d - 2) as f64;
    f.add(0, 1, 0, 0, w)?;
    f.add(0, 0, 0, 0, -w)?;
    for i in 1..d {
        for j in 1..d {
            if i != j {
                f.add(i, 0, 0, j, -1.0)?;
            }
        }
        f.add(i, 1, 1, 0, -1.0)?;
    }
    Ok(f)
}

/// Yu–Oh functional `p(00|01) - p(00|00) - Σ_i p(0i|i0) - Σ_i p(10|i1) ≤ 0`.
pub fn make_yu_oh(d: usize) -> Result<BellFunctional> {
    if d < 3 {
        return Err(Error::domain("the Yu-Oh functional needs d >= 3"));
    }
    let mut f = BellFunctional::new(Scenario::id_family(d), 0.0);
    f.add(0, 1, 0, 0, 1.0)?;
    f.add(0, 0, 0, 0, -1.0)?;
    for i in 1..d {
        f.add(i, 0, 0, i, -1.0)?;
        f.add(i, 1, 1, 0, -1.0)?;
    }
    Ok(f)
}

/// First of the two new tight `d = 4` facets (ten terms).
pub fn make_d4_first() -> BellFunctional {
    let mut f = BellFunctional::new(Scenario::id_family(4), 0.0);
    let terms: [((usize, usize, usize, usize), f64); 10] = [
        ((0, 1, 0, 0), 1.0),
        ((0, 0, 0, 0), -1.0),
        ((1, 0, 0, 2), -1.0),
        ((1, 0, 0, 3), -1.0),
        ((1, 1, 1, 0), -1.0),
        ((2, 0, 0, 1), -1.0),
        ((2, 0, 0, 3), -1.0),
        ((2, 1, 1, 0), -1.0),
        ((3, 0, 0, 3), 1.0),
        ((3, 1, 0, 0), -1.0),
    ];
    for ((x, y, a, b), w) in terms {
        f.add(x, y, a, b, w).expect("cells lie in the d = 4 scenario");
    }
    f
}

/// Second of the two new tight `d = 4` facets, the seed of the `I_d` family.
pub fn make_d4_second() -> BellFunctional {
    let mut f = BellFunctional::new(Scenario::id_family(4), 0.0);
    let terms: [((usize, usize, usize, usize), f64); 11] = [
        ((0, 1, 0, 0), 2.0),
        ((0, 0, 0, 0), -2.0),
        ((1, 0, 0, 2), -1.0),
        ((1, 0, 0, 3), -1.0),
        ((1, 1, 1, 0), -1.0),
        ((2, 0, 0, 1), -1.0),
        ((2, 0, 0, 3), -1.0),
        ((2, 1, 1, 0), -1.0),
        ((3, 0, 0, 1), -1.0),
        ((3, 0, 0, 2), -1.0),
        ((3, 1, 1, 0), -1.0),
    ];
    for ((x, y, a, b), w) in terms {
        f.add(x, y, a, b, w).expect("cells lie in the d = 4 scenario");
    }
    f
}

/// One fixed outcome for every setting of both parties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        let fits = |choice: &[usize], counts: &[usize]| {
            choice.len() == counts.len() && choice.iter().zip(counts).all(|(c, n)| c < n)
        };
        if fits(&self.alice, &scenario.alice) && fits(&self.bob, &scenario.bob) {
            Ok(())
        } else {
            Err(Error::domain("strategy does not match the scenario"))
        }
    }
}

pub fn evaluate_strategy(f: &BellFunctional, s: &DeterministicStrategy) -> Result<f64> {
    s.validate(&f.scenario)?;
    Ok(strategy_value(f, &s.alice, &s.bob))
}

fn strategy_value(f: &BellFunctional, alice: &[usize], bob: &[usize]) -> f64 {
    f.coeffs
        .iter()
        .filter(|(c, _)| alice[c.x] == c.a && bob[c.y] == c.b)
        .map(|(_, &w)| w)
        .sum()
}

/// Result of exhaustive strategy enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalBound {
    pub value: f64,
    /// First maximizer in enumeration order.
    pub strategy: DeterministicStrategy,
    pub strategies_checked: u128,
}

pub fn classical_bound(f: &BellFunctional) -> Result<ClassicalBound> {
    classical_bound_with_cap(f, STRATEGY_CAP)
}

/// Exact maximum over all deterministic strategies (Alice outer, Bob inner).
pub fn classical_bound_with_cap(f: &BellFunctional, cap: u128) -> Result<ClassicalBound> {
    let count = f.scenario.strategy_count();
    if count > cap {
        return Err(Error::StrategyCap { count, cap });
    }
    let mut alice = vec![0; f.scenario.alice.len()];
    let mut best: Option<(f64, DeterministicStrategy)> = None;
    loop {
        let mut bob = vec![0; f.scenario.bob.len()];
        loop {
            let v = strategy_value(f, &alice, &bob);
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((
                    v,
                    DeterministicStrategy {
                        alice: alice.clone(),
                        bob: bob.clone(),
                    },
                ));
            }
            if !odometer_step(&mut bob, &f.scenario.bob) {
                break;
            }
        }
        if !odometer_step(&mut alice, &f.scenario.alice) {
            break;
        }
    }
    let (value, strategy) = best.expect("scenario has at least one strategy");
    Ok(ClassicalBound {
        value,
        strategy,
        strategies_checked: count,
    })
}

/// Mixed-radix increment; returns false after wrapping around.
fn odometer_step(digits: &mut [usize], radix: &[usize]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radix).rev() {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

/// Table of conditional probabilities `p(ab|xy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    probs: Vec<f64>,
}

impl Behavior {
    fn layout(scenario: &Scenario) -> usize {
        let per_pair: usize = scenario.bob.iter().sum();
        scenario.alice.iter().map(|na| na * per_pair).sum()
    }

    fn offset(&self, c: Cell) -> usize {
        let per_pair: usize = self.scenario.bob.iter().sum();
        let before_x: usize = self.scenario.alice[..c.x].iter().map(|na| na * per_pair).sum();
        let nb = self.scenario.bob[c.y];
        let before_y: usize = self.scenario.bob[..c.y]
            .iter()
            .map(|&n| n * self.scenario.alice[c.x])
            .sum();
        before_x + before_y + c.a * nb + c.b
    }

    pub fn from_fn(scenario: &Scenario, mut p: impl FnMut(Cell) -> f64) -> Self {
        let mut out = Behavior {
            scenario: scenario.clone(),
            probs: vec![0.0; Behavior::layout(scenario)],
        };
        for x in 0..scenario.alice.len() {
            for y in 0..scenario.bob.len() {
                for a in 0..scenario.alice[x] {
                    for b in 0..scenario.bob[y] {
                        let c = Cell::new(x, y, a, b);
                        let i = out.offset(c);
                        out.probs[i] = p(c);
                    }
                }
            }
        }
        out
    }

    /// Uniformly random outcomes: `p(ab|xy) = 1 / (n_x n_y)`.
    pub fn uniform(scenario: &Scenario) -> Self {
        Behavior::from_fn(scenario, |c| {
            1.0 / (scenario.alice[c.x] * scenario.bob[c.y]) as f64
        })
    }

    pub fn from_strategy(scenario: &Scenario, s: &DeterministicStrategy) -> Result<Self> {
        s.validate(scenario)?;
        Ok(Behavior::from_fn(scenario, |c| {
            if s.alice[c.x] == c.a && s.bob[c.y] == c.b {
                1.0
            } else {
                0.0
            }
        }))
    }

    /// Convex combination `Σ w_i b_i`; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, Behavior)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::domain("empty mixture"))?;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain("mixture weights must be a probability vector"));
        }
        let mut probs = vec![0.0; first.1.probs.len()];
        for (w, b) in parts {
            if b.scenario != first.1.scenario {
                return Err(Error::domain("mixture of behaviors from different scenarios"));
            }
            for (p, q) in probs.iter_mut().zip(&b.probs) {
                *p += w * q;
            }
        }
        Ok(Behavior {
            scenario: first.1.scenario.clone(),
            probs,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn get(&self, c: Cell) -> f64 {
        self.probs[self.offset(c)]
    }

    /// Largest deviation from `Σ_ab p(ab|xy) = 1` and most negative entry.
    pub fn validity(&self) -> (f64, f64) {
        let mut norm_dev: f64 = 0.0;
        let mut min_p = f64::INFINITY;
        for x in 0..self.scenario.alice.len() {
            for y in 0..self.scenario.bob.len() {
                let mut s = 0.0;
                for a in 0..self.scenario.alice[x] {
                    for b in 0..self.scenario.bob[y] {
                        let p = self.get(Cell::new(x, y, a, b));
                        s += p;
                        min_p = min_p.min(p);
                    }
                }
                norm_dev = norm_dev.max((s - 1.0).abs());
            }
        }
        (norm_dev, min_p)
    }

    pub fn is_valid(&self) -> bool {
        let (dev, min_p) = self.validity();
        dev <= 1e-10 && min_p >= -1e-12
    }
}

pub fn evaluate_behavior(f: &BellFunctional, b: &Behavior) -> Result<f64> {
    if f.scenario != b.scenario {
        return Err(Error::domain("behavior does not match the functional's scenario"));
    }
    Ok(f.terms().map(|(c, w)| w * b.get(c)).sum())
}

/// Relabeling of one party: `settings[old] = new`, `outcomes[old_x][old_a] = new_a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyRelabeling {
    pub settings: Vec<usize>,
    pub outcomes: Vec<Vec<usize>>,
}

impl PartyRelabeling {
    pub fn identity(counts: &[usize]) -> Self {
        PartyRelabeling {
            settings: (0..counts.len()).collect(),
            outcomes: counts.iter().map(|&n| (0..n).collect()).collect(),
        }
    }

    /// Swaps two settings with the same outcome count.
    pub fn swap_settings(counts: &[usize], s: usize, t: usize) -> Self {
        let mut r = PartyRelabeling::identity(counts);
        r.settings.swap(s, t);
        r
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relabeling {
    pub alice: PartyRelabeling,
    pub bob: PartyRelabeling,
}

/// Upper bound on the relabeling group size searched by [`find_relabeling`].
pub const RELABELING_CAP: u128 = 50_000_000;

/// Searches for a setting/outcome relabeling taking `f` to `g` coefficient by
/// coefficient. Parties are not exchanged.
pub fn find_relabeling(f: &BellFunctional, g: &BellFunctional) -> Result<Option<Relabeling>> {
    if f.nonzero_count() != g.nonzero_count() {
        return Ok(None);
    }
    let mut fs = f.scenario.alice.clone();
    let mut gs = g.scenario.alice.clone();
    fs.sort_unstable();
    gs.sort_unstable();
    let mut fb = f.scenario.bob.clone();
    let mut gb = g.scenario.bob.clone();
    fb.sort_unstable();
    gb.sort_unstable();
    if fs != gs || fb != gb {
        return Ok(None);
    }
    let group = party_group_size(&f.scenario.alice, &g.scenario.alice)
        .saturating_mul(party_group_size(&f.scenario.bob, &g.scenario.bob));
    if group > RELABELING_CAP {
        return Err(Error::StrategyCap {
            count: group,
            cap: RELABELING_CAP,
        });
    }
    let alice_options = party_relabelings(&f.scenario.alice, &g.scenario.alice);
    let bob_options = party_relabelings(&f.scenario.bob, &g.scenario.bob);
    for alice in &alice_options {
        for bob in &bob_options {
            let r = Relabeling {
                alice: alice.clone(),
                bob: bob.clone(),
            };
            if f.relabel(&r).coeffs == g.coeffs {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn party_group_size(from: &[usize], _to: &[usize]) -> u128 {
    let mut counts = BTreeMap::new();
    for &n in from {
        *counts.entry(n).or_insert(0usize) += 1;
    }
    let setting_perms: u128 = counts.values().map(|&m| factorial(m)).product();
    let outcome_perms: u128 = from.iter().map(|&n| factorial(n)).product();
    setting_perms.saturating_mul(outcome_perms)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

fn party_relabelings(from: &[usize], to: &[usize]) -> Vec<PartyRelabeling> {
    let n = from.len();
    let setting_perms: Vec<Vec<usize>> = permutations(n)
        .into_iter()
        .filter(|p| (0..n).all(|old| to[p[old]] == from[old]))
        .collect();
    let outcome_perms: Vec<Vec<Vec<usize>>> = from.iter().map(|&k| permutations(k)).collect();
    let mut out = Vec::new();
    for sp in setting_perms {
        let mut choice = vec![0; n];
        let radix: Vec<usize> = outcome_perms.iter().map(|v| v.len()).collect();
        loop {
            out.push(PartyRelabeling {
                settings: sp.clone(),
                outcomes: (0..n).map(|x| outcome_perms[x][choice[x]].clone()).collect(),
            });
            if !odometer_step(&mut choice, &radix) {
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_term_count() {
        // 2 leading terms, (d-1)(d-2) off-diagonal terms, d-1 binary terms
        for d in 3..=8 {
            let expected = 2 + (d - 1) * (d - 2) + (d - 1);
            assert_eq!(make_id(d).unwrap().nonzero_count(), expected);
        }
        assert_eq!(make_id(5).unwrap().nonzero_count(), 18);
    }

    #[test]
    fn id_coefficients() {
        let f = make_id(5).unwrap();
        assert_eq!(f.coeff(0, 1, 0, 0), 3.0);
        assert_eq!(f.coeff(0, 0, 0, 0), -3.0);
        assert_eq!(f.coeff(2, 0, 0, 4), -1.0);
        assert_eq!(f.coeff(2, 0, 0, 2), 0.0);
        assert_eq!(f.coeff(4, 1, 1, 0), -1.0);
        assert_eq!(f.classical_bound(), 0.0);
    }

    #[test]
    fn small_d_rejected() {
        assert!(matches!(make_id(2), Err(Error::Domain(_))));
        assert!(matches!(make_yu_oh(2), Err(Error::Domain(_))));
    }

    #[test]
    fn yu_oh_term_count() {
        assert_eq!(make_yu_oh(3).unwrap().nonzero_count(), 6);
    }

    #[test]
    fn add_rejects_cells_outside_scenario() {
        let mut f = BellFunctional::new(Scenario::id_family(3), 0.0);
        assert!(f.add(0, 0, 0, 3, 1.0).is_err());
        assert!(f.add(0, 1, 2, 0, 1.0).is_err());
        assert!(f.add(3, 0, 0, 0, 1.0).is_err());
    }

    #[test]
    fn strategy_examples() {
        let f = make_id(4).unwrap();
        let zero = DeterministicStrategy {
            alice: vec![1, 1, 1, 1],
            bob: vec![0, 1],
        };
        assert_eq!(evaluate_strategy(&f, &zero).unwrap(), 0.0);
        let only_penalty = DeterministicStrategy {
            alice: vec![0; 4],
            bob: vec![0, 1],
        };
        assert_eq!(evaluate_strategy(&f, &only_penalty).unwrap(), -2.0);
        let bad = DeterministicStrategy {
            alice: vec![0; 3],
            bob: vec![0, 1],
        };
        assert!(evaluate_strategy(&f, &bad).is_err());
    }

    #[test]
    fn id4_enumeration_maximum() {
        let f = make_id(4).unwrap();
        // independent oracle: loop over every strategy explicitly
        let mut best = f64::NEG_INFINITY;
        for mask in 0..16usize {
            let alice: Vec<usize> = (0..4).map(|x| (mask >> x) & 1).collect();
            for b0 in 0..4 {
                for b1 in 0..2 {
                    let s = DeterministicStrategy {
                        alice: alice.clone(),
                        bob: vec![b0, b1],
                    };
                    best = best.max(evaluate_strategy(&f, &s).unwrap());
                }
            }
        }
        assert_eq!(best, 0.0);
        let cb = classical_bound(&f).unwrap();
        assert_eq!(cb.value, 0.0);
        assert_eq!(cb.strategies_checked, 16 * 4 * 2);
    }

    #[test]
    fn zero_functional_bound() {
        let f = BellFunctional::new(Scenario::id_family(3), 0.0);
        assert_eq!(classical_bound(&f).unwrap().value, 0.0);
    }

    #[test]
    fn cap_exceeded() {
        let f = make_id(10).unwrap();
        let err = classical_bound_with_cap(&f, 100).unwrap_err();
        assert_eq!(
            err,
            Error::StrategyCap {
                count: 1024 * 20,
                cap: 100
            }
        );
    }

    #[test]
    fn uniform_behavior_on_i3() {
        let f = make_id(3).unwrap();
        let b = Behavior::uniform(f.scenario());
        // (1)(1/6 - 1/6) - 2 * (1/6) - 2 * (1/4)?  Bob's binary setting has
        // p = 1/(2*2) = 1/4, his ternary setting 1/(2*3) = 1/6.
        let expected = 1.0 * (0.25 - 1.0 / 6.0) - 2.0 / 6.0 - 2.0 * 0.25;
        let got = evaluate_behavior(&f, &b).unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn behavior_from_strategy_matches_strategy_value() {
        let f = make_id(5).unwrap();
        let s = DeterministicStrategy {
            alice: vec![0, 1, 0, 0, 1],
            bob: vec![3, 0],
        };
        let b = Behavior::from_strategy(f.scenario(), &s).unwrap();
        assert!(b.is_valid());
        assert_eq!(
            evaluate_behavior(&f, &b).unwrap(),
            evaluate_strategy(&f, &s).unwrap()
        );
    }

    #[test]
    fn id3_is_yu_oh3_with_alice_settings_swapped() {
        let id3 = make_id(3).unwrap();
        let yo3 = make_yu_oh(3).unwrap();
        let swap = Relabeling {
            alice: PartyRelabeling::swap_settings(&id3.scenario().alice, 1, 2),
            bob: PartyRelabeling::identity(&id3.scenario().bob),
        };
        assert_eq!(yo3.relabel(&swap), id3);
        assert!(find_relabeling(&yo3, &id3).unwrap().is_some());
    }

    #[test]
    fn id4_is_second_d4_facet() {
        assert!(find_relabeling(&make_id(4).unwrap(), &make_d4_second())
            .unwrap()
            .is_some());
    }

    #[test]
    fn d4_facets_are_not_relabelings_of_each_other() {
        assert!(find_relabeling(&make_d4_first(), &make_d4_second())
            .unwrap()
            .is_none());
    }

    #[test]
    fn first_d4_facet_reduces_to_yu_oh3() {
        let f = make_d4_first();
        assert_eq!(f.nonzero_count(), 10);
        // Alice's setting 3 always answers 1, Bob's outcome 3 of setting 0 never occurs.
        let reduced = f.restrict(&[(3, 1)], &[(0, 3)]).unwrap();
        assert_eq!(reduced.scenario(), &Scenario::id_family(3));
        assert!(find_relabeling(&reduced, &make_yu_oh(3).unwrap())
            .unwrap()
            .is_some());
    }

    #[test]
    fn restriction_to_marginal_is_rejected() {
        let f = make_id(4).unwrap();
        // fixing Alice's setting 1 to answer 1 turns p(10|11) into Bob's marginal
        assert!(f.restrict(&[(1, 1)], &[]).is_err());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(1).len(), 1);
    }
}
