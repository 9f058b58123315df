//! Cross-entropy solver over per-vertex categorical colour distributions,
//! with an optional LS improvement step applied to every sample (CE+LS).
//!
//! Each generation draws `population_size` colourings from the model, scores
//! them by H_ρ, keeps the top `elite_size`, and moves every free vertex's
//! distribution towards the elite colour frequencies:
//!
//! ```text
//! P_v ← β · freq_elite(v) + (1 − β) · P_v
//! ```
//!
//! Sample `i` of generation `g` uses its own random stream derived from
//! `(seed, g, i)`, so results do not depend on the number of worker threads.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::colouring::{Colour, Colouring, PartialColouring, PluralityScratch};
use crate::graph::{Graph, Vertex};
use crate::happiness::{happy_count, Thresholds};
use crate::heuristics::LocalSearch;
use crate::rng;

pub const DEFAULT_POPULATION: usize = 20;
pub const DEFAULT_ELITE_FRACTION: f64 = 0.15;
pub const DEFAULT_BETA: f64 = 0.1;
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(600);

/// One categorical distribution over `k` colours per free vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbModel {
    k: usize,
    free: Vec<Vertex>,
    probs: Vec<f64>,
}

impl ProbModel {
    /// Uniform `1/k` for every free vertex of `pc`.
    pub fn uniform(pc: &PartialColouring) -> Self {
        let free = pc.free_vertices();
        let k = pc.k();
        Self {
            k,
            probs: vec![1.0 / k as f64; free.len() * k],
            free,
        }
    }

    /// Model with explicit rows, one per entry of `free`.
    pub fn from_rows(k: usize, free: Vec<Vertex>, rows: &[Vec<f64>]) -> Self {
        assert_eq!(free.len(), rows.len());
        assert!(rows.iter().all(|r| r.len() == k));
        Self {
            k,
            free,
            probs: rows.concat(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn free_vertices(&self) -> &[Vertex] {
        &self.free
    }

    pub fn len(&self) -> usize {
        self.free.len()
    }

    pub fn is_empty(&self) -> bool {
        self.free.is_empty()
    }

    /// Distribution of the `i`-th free vertex.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks_exact(self.k)
    }

    /// Distribution of vertex `v`, if it is free.
    pub fn for_vertex(&self, v: Vertex) -> Option<&[f64]> {
        self.free.binary_search(&v).ok().map(|i| self.row(i))
    }

    /// Overwrite every free vertex of `sigma` with a draw from its row.
    pub fn sample_into<R: Rng + ?Sized>(&self, sigma: &mut Colouring, rng: &mut R) {
        for (i, &v) in self.free.iter().enumerate() {
            sigma.set(v, draw(self.row(i), rng));
        }
    }

    /// Smoothed refit to the elite colour frequencies.
    pub fn update(&mut self, elite: &[&Colouring], beta: f64) {
        assert!(!elite.is_empty(), "elite set must be non-empty");
        let k = self.k;
        let size = elite.len() as f64;
        let mut counts = vec![0u32; k];
        for (i, &v) in self.free.iter().enumerate() {
            counts.iter_mut().for_each(|c| *c = 0);
            for sigma in elite {
                counts[sigma.get(v).index()] += 1;
            }
            let row = &mut self.probs[i * k..(i + 1) * k];
            // Same as β·raw + (1 − β)·old, rearranged so that decimal
            // inputs round the way hand arithmetic does.
            for (p, &c) in row.iter_mut().zip(&counts) {
                let raw = c as f64 / size;
                *p += beta * (raw - *p);
            }
        }
    }
}

/// Inverse-CDF draw. Rounding slack at the top end goes to the last colour
/// with positive mass.
fn draw<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> Colour {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = j;
            if r < acc {
                return Colour::from_index(j);
            }
        }
    }
    Colour::from_index(last)
}

pub fn init_probs(pc: &PartialColouring) -> ProbModel {
    ProbModel::uniform(pc)
}

pub fn update_probs(model_old: &ProbModel, elite: &[&Colouring], beta: f64) -> ProbModel {
    let mut next = model_old.clone();
    next.update(elite, beta);
    next
}

/// Indices of the `elite_size` best scores, best first; equal scores keep
/// sample order.
pub fn select_elite(scores: &[usize], elite_size: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(elite_size);
    order
}

fn sample_one<R: Rng + ?Sized>(
    pc: &PartialColouring,
    model: &ProbModel,
    improver: Option<&LocalSearch<'_>>,
    rng: &mut R,
) -> Colouring {
    let mut sigma = pc.complete_with(Colour::from_index(0));
    model.sample_into(&mut sigma, rng);
    if let Some(ls) = improver {
        let mut scratch = PluralityScratch::new(pc.k());
        ls.pass(&mut sigma, rng, &mut scratch);
    }
    sigma
}

/// `size` colourings drawn from `model`, each passed through `improver`
/// when given.
pub fn sample_population<R: Rng + ?Sized>(
    pc: &PartialColouring,
    model: &ProbModel,
    size: usize,
    rng: &mut R,
    improver: Option<&LocalSearch<'_>>,
) -> Vec<Colouring> {
    (0..size)
        .map(|_| sample_one(pc, model, improver, rng))
        .collect()
}

/// How the returned colouring is tracked across generations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IncumbentRule {
    /// Best sample over all generations; never regresses.
    #[default]
    BestEver,
    /// Best sample of the latest generation only.
    LatestGeneration,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CeError {
    #[error("population size must be at least 2, got {0}")]
    Population(usize),
    #[error("elite fraction {0} outside (0, 1]")]
    EliteFraction(f64),
    #[error("smoothing factor {0} outside [0, 1]")]
    Beta(f64),
    #[error("generation cap must be at least 1")]
    GenerationCap,
    #[error("rho {0} outside [0, 1]")]
    Rho(f64),
    #[error("precolouring covers {pc} vertices, graph has {graph}")]
    SizeMismatch { graph: usize, pc: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CeParams {
    pub population_size: usize,
    pub elite_fraction: f64,
    pub beta: f64,
    pub time_limit: Duration,
    pub max_generations: Option<u64>,
    pub seed: u64,
    /// Improve every sample with one LS pass (CE+LS).
    pub use_ls: bool,
    /// Worker threads for sampling; 0 or 1 runs inline.
    pub threads: usize,
    pub incumbent: IncumbentRule,
}

impl Default for CeParams {
    fn default() -> Self {
        Self {
            population_size: DEFAULT_POPULATION,
            elite_fraction: DEFAULT_ELITE_FRACTION,
            beta: DEFAULT_BETA,
            time_limit: DEFAULT_TIME_LIMIT,
            max_generations: None,
            seed: 0,
            use_ls: false,
            threads: 1,
            incumbent: IncumbentRule::BestEver,
        }
    }
}

impl CeParams {
    pub fn elite_size(&self) -> usize {
        ((self.elite_fraction * self.population_size as f64).round() as usize)
            .clamp(1, self.population_size)
    }

    pub fn validate(&self) -> Result<(), CeError> {
        if self.population_size < 2 {
            return Err(CeError::Population(self.population_size));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return Err(CeError::EliteFraction(self.elite_fraction));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(CeError::Beta(self.beta));
        }
        if self.max_generations == Some(0) {
            return Err(CeError::GenerationCap);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub best: Colouring,
    pub happy: usize,
    pub alpha: f64,
    pub generations: u64,
    pub samples_evaluated: u64,
    pub wall_time: Duration,
    /// Every vertex ρ-happy before the budget ran out.
    pub converged: bool,
}

/// Per-generation view passed to [`run_with_observer`].
#[derive(Clone, Debug)]
pub struct GenerationReport<'a> {
    pub generation: u64,
    pub population: &'a [Colouring],
    pub scores: &'a [usize],
    pub incumbent_happy: usize,
    pub model: &'a ProbModel,
}

pub fn run(
    g: &Graph,
    pc: &PartialColouring,
    rho: f64,
    params: &CeParams,
) -> Result<SolveResult, CeError> {
    run_with_observer(g, pc, rho, params, |_| {})
}

/// [`run`] with a callback after every generation's model update.
pub fn run_with_observer<F>(
    g: &Graph,
    pc: &PartialColouring,
    rho: f64,
    params: &CeParams,
    mut observe: F,
) -> Result<SolveResult, CeError>
where
    F: FnMut(&GenerationReport<'_>),
{
    params.validate()?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(CeError::Rho(rho));
    }
    if g.n() != pc.n() {
        return Err(CeError::SizeMismatch {
            graph: g.n(),
            pc: pc.n(),
        });
    }
    let start = Instant::now();
    let n = g.n();
    let thresholds = Thresholds::new(g, rho);

    let mut model = init_probs(pc);
    if model.is_empty() {
        let best = pc.complete_with(Colour::from_index(0));
        let happy = happy_count(g, &best, &thresholds);
        return Ok(SolveResult {
            alpha: happy as f64 / n as f64,
            converged: happy == n,
            best,
            happy,
            generations: 0,
            samples_evaluated: 0,
            wall_time: start.elapsed(),
        });
    }

    let ls = params
        .use_ls
        .then(|| LocalSearch::with_thresholds(g, pc, thresholds.clone()));
    let pool = (params.threads > 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(params.threads)
            .build()
            .expect("thread pool")
    });
    let elite_size = params.elite_size();

    let mut incumbent: Option<(Colouring, usize)> = None;
    let mut generation = 0u64;
    let mut samples = 0u64;
    loop {
        let make = |i: usize| {
            let mut r = rng::stream(params.seed, &[generation, i as u64]);
            let sigma = sample_one(pc, &model, ls.as_ref(), &mut r);
            let score = happy_count(g, &sigma, &thresholds);
            (sigma, score)
        };
        let drawn: Vec<(Colouring, usize)> = match &pool {
            Some(pool) => pool.install(|| {
                (0..params.population_size)
                    .into_par_iter()
                    .map(make)
                    .collect()
            }),
            None => (0..params.population_size).map(make).collect(),
        };
        let (population, scores): (Vec<Colouring>, Vec<usize>) = drawn.into_iter().unzip();
        samples += population.len() as u64;
        generation += 1;

        let elite_idx = select_elite(&scores, elite_size);
        let top = elite_idx[0];
        let replace = match (&incumbent, params.incumbent) {
            (None, _) | (_, IncumbentRule::LatestGeneration) => true,
            (Some((_, h)), IncumbentRule::BestEver) => scores[top] > *h,
        };
        if replace {
            incumbent = Some((population[top].clone(), scores[top]));
        }

        let elite: Vec<&Colouring> = elite_idx.iter().map(|&i| &population[i]).collect();
        model.update(&elite, params.beta);

        let incumbent_happy = incumbent.as_ref().unwrap().1;
        observe(&GenerationReport {
            generation,
            population: &population,
            scores: &scores,
            incumbent_happy,
            model: &model,
        });

        let out_of_gens = params.max_generations.is_some_and(|cap| generation >= cap);
        if incumbent_happy == n || out_of_gens || start.elapsed() >= params.time_limit {
            break;
        }
    }

    let (best, happy) = incumbent.expect("at least one generation ran");
    Ok(SolveResult {
        alpha: happy as f64 / n as f64,
        converged: happy == n,
        best,
        happy,
        generations: generation,
        samples_evaluated: samples,
        wall_time: start.elapsed(),
    })
}
