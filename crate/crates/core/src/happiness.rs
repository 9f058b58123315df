//! The objective: ρ-happy vertices.
//!
//! A vertex is ρ-happy when at least `⌈ρ·deg(v)⌉` of its neighbours share
//! its colour. Isolated vertices have threshold 0 and are always happy.

use thiserror::Error;

use crate::colouring::{Colour, Colouring, PartialColouring};
use crate::graph::{Graph, Vertex};

/// Slack subtracted before taking the ceiling so that products which are
/// integers in exact arithmetic (0.5·4, 0.1·30) do not round up.
const CEIL_GUARD: f64 = 1e-12;

/// Number of same-coloured neighbours a vertex of degree `degree` needs.
#[inline]
pub fn happy_threshold(rho: f64, degree: usize) -> usize {
    let x = rho * degree as f64 - CEIL_GUARD;
    if x <= 0.0 {
        0
    } else {
        x.ceil() as usize
    }
}

/// Precomputed per-vertex thresholds for one (graph, ρ) pair.
#[derive(Clone, Debug)]
pub struct Thresholds {
    rho: f64,
    need: Vec<u32>,
}

impl Thresholds {
    pub fn new(g: &Graph, rho: f64) -> Self {
        Self {
            rho,
            need: (0..g.n())
                .map(|v| happy_threshold(rho, g.degree(v)) as u32)
                .collect(),
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    pub fn need(&self, v: Vertex) -> u32 {
        self.need[v]
    }
}

#[inline]
fn same_colour_count(g: &Graph, sigma: &Colouring, v: Vertex) -> u32 {
    let c = sigma.get(v);
    g.neighbours(v)
        .iter()
        .filter(|&&u| sigma.get(u as usize) == c)
        .count() as u32
}

pub fn is_happy(g: &Graph, sigma: &Colouring, v: Vertex, rho: f64) -> bool {
    same_colour_count(g, sigma, v) as usize >= happy_threshold(rho, g.degree(v))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HappinessReport {
    pub happy_count: usize,
    pub alpha: f64,
    pub per_vertex: Vec<bool>,
}

pub fn evaluate(g: &Graph, sigma: &Colouring, rho: f64) -> HappinessReport {
    evaluate_with(g, sigma, &Thresholds::new(g, rho))
}

pub fn evaluate_with(g: &Graph, sigma: &Colouring, t: &Thresholds) -> HappinessReport {
    let per_vertex: Vec<bool> = (0..g.n())
        .map(|v| same_colour_count(g, sigma, v) >= t.need(v))
        .collect();
    let happy_count = per_vertex.iter().filter(|&&h| h).count();
    HappinessReport {
        happy_count,
        alpha: happy_count as f64 / g.n() as f64,
        per_vertex,
    }
}

/// H_ρ only; the inner-loop score.
pub fn happy_count(g: &Graph, sigma: &Colouring, t: &Thresholds) -> usize {
    (0..g.n())
        .filter(|&v| same_colour_count(g, sigma, v) >= t.need(v))
        .count()
}

/// Free vertices that are ρ-unhappy under `sigma`, ascending.
pub fn unhappy_free_vertices(
    g: &Graph,
    sigma: &Colouring,
    pc: &PartialColouring,
    t: &Thresholds,
) -> Vec<Vertex> {
    (0..g.n())
        .filter(|&v| pc.is_free(v) && same_colour_count(g, sigma, v) < t.need(v))
        .collect()
}

/// Happiness state kept in sync with single-vertex recolourings in O(deg).
#[derive(Clone, Debug)]
pub struct HappinessTracker {
    same: Vec<u32>,
    happy: Vec<bool>,
    happy_count: usize,
}

impl HappinessTracker {
    pub fn new(g: &Graph, sigma: &Colouring, t: &Thresholds) -> Self {
        let same: Vec<u32> = (0..g.n()).map(|v| same_colour_count(g, sigma, v)).collect();
        let happy: Vec<bool> = same
            .iter()
            .enumerate()
            .map(|(v, &s)| s >= t.need(v))
            .collect();
        let happy_count = happy.iter().filter(|&&h| h).count();
        Self {
            same,
            happy,
            happy_count,
        }
    }

    pub fn happy_count(&self) -> usize {
        self.happy_count
    }

    #[inline]
    pub fn is_happy(&self, v: Vertex) -> bool {
        self.happy[v]
    }

    pub fn per_vertex(&self) -> &[bool] {
        &self.happy
    }

    #[inline]
    fn refresh(&mut self, v: Vertex, t: &Thresholds) {
        let now = self.same[v] >= t.need(v);
        if now != self.happy[v] {
            self.happy[v] = now;
            if now {
                self.happy_count += 1;
            } else {
                self.happy_count -= 1;
            }
        }
    }

    /// Set `sigma(v) = to`, updating counts for `v` and its neighbours.
    pub fn recolour(
        &mut self,
        g: &Graph,
        sigma: &mut Colouring,
        t: &Thresholds,
        v: Vertex,
        to: Colour,
    ) {
        let from = sigma.get(v);
        if from == to {
            return;
        }
        let mut same_v = 0;
        for &u in g.neighbours(v) {
            let u = u as usize;
            let cu = sigma.get(u);
            if cu == from {
                self.same[u] -= 1;
                self.refresh(u, t);
            } else if cu == to {
                self.same[u] += 1;
                same_v += 1;
                self.refresh(u, t);
            }
        }
        sigma.set(v, to);
        self.same[v] = same_v;
        self.refresh(v, t);
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{colourings} extensions exceed the budget of {limit}")]
    BudgetExceeded { colourings: u128, limit: u128 },
}

/// Best extension of `pc` by full enumeration. Among optimal colourings the
/// lexicographically smallest free-vertex colour vector wins.
pub fn exhaustive_optimum(
    g: &Graph,
    pc: &PartialColouring,
    rho: f64,
    budget_limit: u128,
) -> Result<(Colouring, usize), OracleError> {
    let free = pc.free_vertices();
    let k = pc.k();
    let colourings = (k as u128)
        .checked_pow(free.len() as u32)
        .unwrap_or(u128::MAX);
    if colourings > budget_limit {
        return Err(OracleError::BudgetExceeded {
            colourings,
            limit: budget_limit,
        });
    }
    let t = Thresholds::new(g, rho);
    let mut sigma = pc.complete_with(Colour::from_index(0));
    let mut best = sigma.clone();
    let mut best_h = happy_count(g, &sigma, &t);
    // Odometer over free vertices, most significant digit first, so the
    // visiting order is lexicographic and strict improvement keeps the
    // first optimum found.
    let mut digits = vec![0usize; free.len()];
    loop {
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return Ok((best, best_h));
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < k {
                sigma.set(free[pos], Colour::from_index(digits[pos]));
                break;
            }
            digits[pos] = 0;
            sigma.set(free[pos], Colour::from_index(0));
        }
        let h = happy_count(g, &sigma, &t);
        if h > best_h {
            best_h = h;
            best = sigma.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn k3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn k4() -> Graph {
        Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn p3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn threshold_guard_at_exact_products() {
        assert_eq!(happy_threshold(0.5, 4), 2);
        assert_eq!(happy_threshold(0.1, 30), 3);
        assert_eq!(happy_threshold(0.3, 10), 3);
        assert_eq!(happy_threshold(0.7, 10), 7);
        assert_eq!(happy_threshold(1.0 / 3.0, 3), 1);
        assert_eq!(happy_threshold(0.51, 4), 3);
        assert_eq!(happy_threshold(0.0, 9), 0);
        assert_eq!(happy_threshold(1.0, 0), 0);
    }

    #[test]
    fn monochromatic_triangle() {
        let sigma = Colouring::from_labels(2, &[1, 1, 1]).unwrap();
        assert!((0..3).all(|v| is_happy(&k3(), &sigma, v, 1.0)));
    }

    #[test]
    fn path_half_happiness() {
        let sigma = Colouring::from_labels(2, &[1, 1, 2]).unwrap();
        let r = evaluate(&p3(), &sigma, 0.5);
        assert_eq!(r.per_vertex, [true, true, false]);
        assert_eq!(r.happy_count, 2);
    }

    #[test]
    fn isolated_vertex_is_happy() {
        let g = Graph::empty(1).unwrap();
        let sigma = Colouring::from_labels(3, &[2]).unwrap();
        assert!(is_happy(&g, &sigma, 0, 1.0));
    }

    #[test]
    fn k4_two_two() {
        let sigma = Colouring::from_labels(2, &[1, 1, 2, 2]).unwrap();
        assert_eq!(evaluate(&k4(), &sigma, 1.0 / 3.0).alpha, 1.0);
        assert_eq!(evaluate(&k4(), &sigma, 0.5).alpha, 0.0);
        assert_eq!(evaluate(&k4(), &sigma, 0.0).alpha, 1.0);
    }

    #[test]
    fn unhappy_free_sets() {
        let t = Thresholds::new(&p3(), 0.5);
        let sigma = Colouring::from_labels(2, &[1, 1, 2]).unwrap();
        let pc = PartialColouring::new(2, vec![Colour::from_label(1), Colour::from_label(1), None])
            .unwrap();
        assert_eq!(unhappy_free_vertices(&p3(), &sigma, &pc, &t), [2]);
        let all_pre =
            PartialColouring::new(2, sigma.as_slice().iter().map(|&c| Some(c)).collect()).unwrap();
        assert!(unhappy_free_vertices(&p3(), &sigma, &all_pre, &t).is_empty());
        let happy = Colouring::from_labels(2, &[1, 1, 1]).unwrap();
        assert!(unhappy_free_vertices(&p3(), &happy, &pc, &t).is_empty());
    }

    #[test]
    fn oracle_on_p3() {
        let pc = PartialColouring::new(2, vec![Colour::from_label(1), None, Colour::from_label(1)])
            .unwrap();
        let (best, h) = exhaustive_optimum(&p3(), &pc, 1.0, 1 << 20).unwrap();
        assert_eq!(h, 3);
        assert_eq!(best.labels(), [1, 1, 1]);
    }

    #[test]
    fn oracle_fully_precoloured() {
        let pc = PartialColouring::new(
            2,
            vec![
                Colour::from_label(1),
                Colour::from_label(2),
                Colour::from_label(1),
            ],
        )
        .unwrap();
        let (best, h) = exhaustive_optimum(&p3(), &pc, 0.5, 1).unwrap();
        assert_eq!(best.labels(), [1, 2, 1]);
        assert_eq!(h, 0);
    }

    #[test]
    fn oracle_budget() {
        let pc = PartialColouring::all_free(3, 3).unwrap();
        assert_eq!(
            exhaustive_optimum(&p3(), &pc, 0.5, 26),
            Err(OracleError::BudgetExceeded {
                colourings: 27,
                limit: 26
            })
        );
    }

    #[test]
    fn oracle_prefers_lexicographically_smallest() {
        // Everything free on K3 at rho = 1: both monochromatic colourings are
        // optimal; (1,1,1) comes first.
        let pc = PartialColouring::all_free(3, 2).unwrap();
        let (best, h) = exhaustive_optimum(&k3(), &pc, 1.0, 8).unwrap();
        assert_eq!((best.labels(), h), (vec![1, 1, 1], 3));
    }

    fn random_case(rng: &mut ChaCha8Rng) -> (Graph, Colouring) {
        let n = rng.random_range(1..15);
        let k = rng.random_range(1..5);
        let density: f64 = rng.random();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < density {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(n, edges).unwrap();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(1..=k)).collect();
        (g, Colouring::from_labels(k, &labels).unwrap())
    }

    #[test]
    fn evaluate_matches_vertexwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (g, sigma) = random_case(&mut rng);
            let rho = rng.random_range(0..=20) as f64 / 20.0;
            let r = evaluate(&g, &sigma, rho);
            let expected: Vec<bool> = (0..g.n()).map(|v| is_happy(&g, &sigma, v, rho)).collect();
            assert_eq!(r.per_vertex, expected);
            assert_eq!(r.happy_count, expected.iter().filter(|&&h| h).count());
            assert_eq!(r.alpha, r.happy_count as f64 / g.n() as f64);
        }
    }

    #[test]
    fn tracker_agrees_with_full_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let (g, mut sigma) = random_case(&mut rng);
            let rho: f64 = rng.random();
            let t = Thresholds::new(&g, rho);
            let mut tracker = HappinessTracker::new(&g, &sigma, &t);
            for _ in 0..30 {
                let v = rng.random_range(0..g.n());
                let c = Colour::from_index(rng.random_range(0..sigma.k()));
                tracker.recolour(&g, &mut sigma, &t, v, c);
                let full = evaluate_with(&g, &sigma, &t);
                assert_eq!(tracker.per_vertex(), &full.per_vertex[..]);
                assert_eq!(tracker.happy_count(), full.happy_count);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn monotone_in_rho(seed in 0u64..10_000, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g, sigma) = random_case(&mut rng);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let r_lo = evaluate(&g, &sigma, lo);
            let r_hi = evaluate(&g, &sigma, hi);
            for v in 0..g.n() {
                proptest::prop_assert!(!r_hi.per_vertex[v] || r_lo.per_vertex[v]);
            }
            proptest::prop_assert!(r_lo.happy_count >= r_hi.happy_count);
            proptest::prop_assert_eq!(evaluate(&g, &sigma, 0.0).alpha, 1.0);
        }

        #[test]
        fn relabelling_invariance(seed in 0u64..10_000, rho in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g, sigma) = random_case(&mut rng);
            let mut perm: Vec<usize> = (0..sigma.k()).collect();
            rand::seq::SliceRandom::shuffle(&mut perm[..], &mut rng);
            proptest::prop_assert_eq!(
                evaluate(&g, &sigma, rho).happy_count,
                evaluate(&g, &sigma.relabel(&perm), rho).happy_count
            );
        }
    }
}
