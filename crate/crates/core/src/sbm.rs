//! Stochastic Block Model instances and the ρ-thresholds that split the
//! three difficulty regimes.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colouring::{Colour, Colouring, PartialColouring};
use crate::graph::Graph;
use crate::rng;

pub const DEFAULT_PRECOLOUR_FRACTION: f64 = 0.05;
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SbmError {
    #[error("need k >= 2 and n >= k (n = {n}, k = {k})")]
    BadSize { n: usize, k: usize },
    #[error("need 0 < q < p <= 1 (p = {p}, q = {q})")]
    BadProbabilities { p: f64, q: f64 },
    #[error("precolour fraction {0} outside (0, 1]")]
    BadPrecolourFraction(f64),
    #[error("epsilon {0} outside (0, 1)")]
    BadEpsilon(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub precolour_fraction: f64,
    pub seed: u64,
    pub epsilon: f64,
}

impl SbmParams {
    /// Parameters with the default precolour fraction and ε.
    pub fn new(n: usize, k: usize, p: f64, q: f64, seed: u64) -> Self {
        Self {
            n,
            k,
            p,
            q,
            precolour_fraction: DEFAULT_PRECOLOUR_FRACTION,
            seed,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn validate(&self) -> Result<(), SbmError> {
        if self.k < 2 || self.n < self.k || self.k > Colour::MAX_COLOURS {
            return Err(SbmError::BadSize {
                n: self.n,
                k: self.k,
            });
        }
        if !(self.q > 0.0 && self.q < self.p && self.p <= 1.0) {
            return Err(SbmError::BadProbabilities {
                p: self.p,
                q: self.q,
            });
        }
        if !(self.precolour_fraction > 0.0 && self.precolour_fraction <= 1.0) {
            return Err(SbmError::BadPrecolourFraction(self.precolour_fraction));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(SbmError::BadEpsilon(self.epsilon));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> RegimeThresholds {
        RegimeThresholds::compute(self.n, self.k, self.p, self.q, self.epsilon)
    }

    /// `(k/n)·ln ε − [q(k−1)(e^ρ − 1) + p(e^ρ − e)]`; positive exactly when
    /// the planted partition is ρ-happy with probability at least (1−ε)^n.
    pub fn feasibility_margin(&self, rho: f64) -> f64 {
        let (n, k) = (self.n as f64, self.k as f64);
        let e_rho = rho.exp();
        (k / n) * self.epsilon.ln()
            - (self.q * (k - 1.0) * (e_rho - 1.0) + self.p * (e_rho - std::f64::consts::E))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    /// Below this, complete ρ-happy colourings need not follow the communities.
    pub mu: f64,
    /// Limit of `xi` as n grows.
    pub xi_tilde: f64,
    /// Finite-n bound: planted communities are ρ-happy w.h.p. for ρ ≤ xi.
    pub xi: f64,
}

impl RegimeThresholds {
    /// Total over all inputs: a non-positive logarithm argument makes that
    /// branch −∞, so the outer max yields 0.
    pub fn compute(n: usize, k: usize, p: f64, q: f64, epsilon: f64) -> Self {
        let (nf, kf) = (n as f64, k as f64);
        let denom = p + (kf - 1.0) * q;
        let mu = q / denom;
        let xi_tilde = p / denom;
        let arg = ((kf / nf) * epsilon.ln() + p * std::f64::consts::E + (kf - 1.0) * q) / denom;
        let log_branch = if arg > 0.0 {
            arg.ln()
        } else {
            f64::NEG_INFINITY
        };
        let xi = log_branch.min(xi_tilde).max(0.0);
        Self { mu, xi_tilde, xi }
    }

    pub fn classify(&self, rho: f64) -> Regime {
        classify_regime(rho, self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Mild,
    Intermediate,
    Tight,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Mild, Regime::Intermediate, Regime::Tight];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Mild => "mild",
            Regime::Intermediate => "intermediate",
            Regime::Tight => "tight",
        }
    }
}

/// Mild for ρ < μ, intermediate for μ ≤ ρ ≤ ξ̃, tight for ρ > ξ̃.
pub fn classify_regime(rho: f64, t: &RegimeThresholds) -> Regime {
    if rho < t.mu {
        Regime::Mild
    } else if rho <= t.xi_tilde {
        Regime::Intermediate
    } else {
        Regime::Tight
    }
}

/// A generated graph with its planted partition and precolouring.
#[derive(Clone, Debug, PartialEq)]
pub struct SbmInstance {
    pub graph: Graph,
    /// Planted community of each vertex, as a colouring with k colours.
    pub communities: Colouring,
    pub precolouring: PartialColouring,
    pub params: SbmParams,
}

/// Balanced contiguous blocks: the first `n mod k` communities get one
/// extra vertex.
pub fn community_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|c| n / k + usize::from(c < n % k)).collect()
}

/// Skip length for geometric edge sampling: number of non-edges before the
/// next edge in a stream of Bernoulli(`prob`) pairs.
#[inline]
fn geometric_skip<R: Rng + ?Sized>(rng: &mut R, log_q: f64) -> u64 {
    if log_q == f64::NEG_INFINITY {
        return 0;
    }
    // 1 - r lies in (0, 1], so the logarithm is finite and non-positive.
    let r: f64 = rng.random();
    let skip = ((1.0 - r).ln() / log_q).floor();
    if skip >= u64::MAX as f64 {
        u64::MAX
    } else {
        skip as u64
    }
}

/// Edges among `size` vertices starting at `base`, each pair independently
/// with probability `prob`.
fn sample_within<R: Rng + ?Sized>(
    rng: &mut R,
    base: usize,
    size: usize,
    prob: f64,
    out: &mut Vec<(usize, usize)>,
) {
    if size < 2 {
        return;
    }
    let log_q = (1.0 - prob).ln();
    // Walk the lower triangle row by row: pair (w, v) with w < v.
    let (mut v, mut w) = (1u64, 0u64);
    let size = size as u64;
    let mut first = true;
    loop {
        let skip = geometric_skip(rng, log_q);
        w = if first {
            w.saturating_add(skip)
        } else {
            w.saturating_add(1).saturating_add(skip)
        };
        first = false;
        while w >= v && v < size {
            w -= v;
            v += 1;
        }
        if v >= size {
            break;
        }
        out.push((base + w as usize, base + v as usize));
    }
}

/// Edges between block `[a, a + sa)` and block `[b, b + sb)`.
fn sample_between<R: Rng + ?Sized>(
    rng: &mut R,
    (a, sa): (usize, usize),
    (b, sb): (usize, usize),
    prob: f64,
    out: &mut Vec<(usize, usize)>,
) {
    let total = (sa as u64) * (sb as u64);
    if total == 0 {
        return;
    }
    let log_q = (1.0 - prob).ln();
    let mut idx = geometric_skip(rng, log_q);
    while idx < total {
        let (i, j) = (idx / sb as u64, idx % sb as u64);
        out.push((a + i as usize, b + j as usize));
        idx = idx
            .saturating_add(1)
            .saturating_add(geometric_skip(rng, log_q));
    }
}

/// Draw an instance. Block pairs use independent derived streams so the
/// result depends only on `params`.
pub fn generate(params: &SbmParams) -> Result<SbmInstance, SbmError> {
    params.validate()?;
    let (n, k) = (params.n, params.k);
    let sizes = community_sizes(n, k);
    let starts: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, s| {
            let start = *acc;
            *acc += s;
            Some(start)
        })
        .collect();

    let mut edges = Vec::new();
    for a in 0..k {
        let mut r = rng::stream(params.seed, &[0, a as u64, a as u64]);
        sample_within(&mut r, starts[a], sizes[a], params.p, &mut edges);
        for b in a + 1..k {
            let mut r = rng::stream(params.seed, &[0, a as u64, b as u64]);
            sample_between(
                &mut r,
                (starts[a], sizes[a]),
                (starts[b], sizes[b]),
                params.q,
                &mut edges,
            );
        }
    }
    let graph = Graph::from_edges(n, edges).expect("generated edges are in range and loop-free");

    let mut community = Vec::with_capacity(n);
    for (c, &s) in sizes.iter().enumerate() {
        community.extend(std::iter::repeat_n(Colour::from_index(c), s));
    }
    let communities = Colouring::new(k, community).expect("community ids below k");

    let mut assign = vec![None; n];
    let mut r = rng::stream(params.seed, &[1]);
    for c in 0..k {
        let size = sizes[c];
        let want = ((params.precolour_fraction * size as f64).ceil() as usize).clamp(1, size);
        let mut picked: Vec<usize> = sample(&mut r, size, want).into_vec();
        picked.sort_unstable();
        for i in picked {
            assign[starts[c] + i] = Some(Colour::from_index(c));
        }
    }
    let precolouring = PartialColouring::new(k, assign).expect("precolours below k");

    Ok(SbmInstance {
        graph,
        communities,
        precolouring,
        params: params.clone(),
    })
}
